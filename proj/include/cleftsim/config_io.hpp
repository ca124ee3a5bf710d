#pragma once

#include <json.hpp>
#include <string>

#include "cleftsim/config.hpp"
#include "cleftsim/errors.hpp"

// JSON form of ModelConfig. Field names mirror the struct members
// (snake_case); time-valued fields accept plain numbers (microseconds) or
// strings with a unit suffix ("250us", "3ms").

namespace cleft {

using njson = nlohmann::json;

inline double parse_time_us(const njson& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::size_t pos = 0;
    double value = 0.0;
    try {
      value = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ParseError(field + ": cannot parse time '" + s + "'");
    }
    std::string unit = s.substr(pos);
    unit.erase(0, unit.find_first_not_of(" \t"));
    if (unit == "us" || unit.empty()) return value;
    if (unit == "ms") return value * 1000.0;
    throw ParseError(field + ": unknown time unit '" + unit + "' (use us or ms)");
  }
  throw ParseError(field + ": expected a number or a string with unit suffix");
}

namespace io_detail {

template <typename T>
T get_or(const njson& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const njson::exception& e) {
    throw ParseError(std::string(key) + ": " + e.what());
  }
}

inline double get_time_or(const njson& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return parse_time_us(j.at(key), key);
}

}  // namespace io_detail

inline ModelConfig config_from_json(const njson& j) {
  ModelConfig c;
  try {
    if (j.contains("geometry")) {
      const njson& g = j.at("geometry");
      c.geometry.a = io_detail::get_or(g, "a", c.geometry.a);
      c.geometry.width_y = io_detail::get_or(g, "width_y", c.geometry.width_y);
      c.geometry.width_z = io_detail::get_or(g, "width_z", c.geometry.width_z);
    }
    if (j.contains("kinetics")) {
      const njson& k = j.at("kinetics");
      c.kinetics.D = io_detail::get_or(k, "D", c.kinetics.D);
      c.kinetics.kappa_a0 = io_detail::get_or(k, "kappa_a0", 0.0);
      c.kinetics.kappa_a = io_detail::get_or(k, "kappa_a", 0.0);
      c.kinetics.kappa_d = io_detail::get_or(k, "kappa_d", c.kinetics.kappa_d);
      c.kinetics.kappa_e_CE = io_detail::get_or(k, "kappa_e_CE", c.kinetics.kappa_e_CE);
      c.kinetics.C_star = io_detail::get_or(k, "C_star", c.kinetics.C_star);
      c.kinetics.r = io_detail::get_or(k, "r", c.kinetics.r);
    }
    if (j.contains("schedule")) {
      c.schedule.events.clear();
      for (const njson& ev : j.at("schedule")) {
        ReleaseEvent event;
        event.time_us = io_detail::get_time_or(ev, "t", 0.0);
        event.count = io_detail::get_or(ev, "N", 0.0);
        c.schedule.events.push_back(event);
      }
    }
    if (j.contains("discretization")) {
      const njson& d = j.at("discretization");
      c.disc.T = io_detail::get_time_or(d, "T", c.disc.T);
      c.disc.Q = io_detail::get_or(d, "Q", c.disc.Q);
      c.disc.t_end = io_detail::get_time_or(d, "t_end", c.disc.t_end);
      c.disc.dt_pbs = io_detail::get_time_or(d, "dt_pbs", c.disc.dt_pbs);
      c.disc.n_runs = io_detail::get_or(d, "n_runs", c.disc.n_runs);
      c.disc.output_stride = io_detail::get_or(d, "output_stride", c.disc.output_stride);
      c.disc.clamp_bound = io_detail::get_or(d, "clamp_bound", c.disc.clamp_bound);
    }
    c.saturation_enabled = io_detail::get_or(j, "saturation_enabled", c.saturation_enabled);
    c.degradation_enabled = io_detail::get_or(j, "degradation_enabled", c.degradation_enabled);
  } catch (const njson::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return c;
}

inline njson config_to_json(const ModelConfig& c) {
  njson j;
  j["geometry"] = {{"a", c.geometry.a},
                   {"width_y", c.geometry.width_y},
                   {"width_z", c.geometry.width_z}};
  j["kinetics"] = {{"D", c.kinetics.D},       {"kappa_a0", c.kinetics.kappa_a0},
                   {"kappa_a", c.kinetics.kappa_a}, {"kappa_d", c.kinetics.kappa_d},
                   {"kappa_e_CE", c.kinetics.kappa_e_CE}, {"C_star", c.kinetics.C_star},
                   {"r", c.kinetics.r}};
  j["schedule"] = njson::array();
  for (const auto& ev : c.schedule.events) {
    j["schedule"].push_back({{"t", ev.time_us}, {"N", ev.count}});
  }
  j["discretization"] = {{"T", c.disc.T},
                         {"Q", c.disc.Q},
                         {"t_end", c.disc.t_end},
                         {"dt_pbs", c.disc.dt_pbs},
                         {"n_runs", c.disc.n_runs},
                         {"output_stride", c.disc.output_stride},
                         {"clamp_bound", c.disc.clamp_bound}};
  j["saturation_enabled"] = c.saturation_enabled;
  j["degradation_enabled"] = c.degradation_enabled;
  return j;
}

}  // namespace cleft
