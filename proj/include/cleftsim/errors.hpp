#pragma once

#include <stdexcept>
#include <string>

namespace cleft {

/// Bad input: rejected parameters, schema problems, infeasible layouts.
/// The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public ValidationError {
public:
  explicit ParseError(const std::string& what) : ValidationError(what) {}
};

class PlacementInfeasible : public ValidationError {
public:
  explicit PlacementInfeasible(const std::string& what) : ValidationError(what) {}
};

class GridMismatch : public ValidationError {
public:
  explicit GridMismatch(const std::string& what) : ValidationError(what) {}
};

class NoOverlap : public ValidationError {
public:
  explicit NoOverlap(const std::string& what) : ValidationError(what) {}
};

class OutOfDomain : public ValidationError {
public:
  explicit OutOfDomain(const std::string& what) : ValidationError(what) {}
};

/// Numerical failure during a run. The CLI maps these to exit code 3.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

class NonFiniteState : public SolverError {
public:
  explicit NonFiniteState(const std::string& what) : SolverError(what) {}
};

class Divergence : public SolverError {
public:
  explicit Divergence(const std::string& what) : SolverError(what) {}
};

class NonMonotoneConvergence : public SolverError {
public:
  explicit NonMonotoneConvergence(const std::string& what) : SolverError(what) {}
};

}  // namespace cleft
