#pragma once

#include <stdexcept>
#include <string>

namespace enopt {

/// Base class for all errors raised by this library.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invariant violations at construction time and malformed input
/// (scenario files, trace files, command-line values).
class validation_error : public error {
public:
  using error::error;
};

/// Evaluation requested outside a model's valid domain: voltage table
/// extrapolation, f <= f_k, nonpositive per-cycle time, derivative at
/// the singularity.
class domain_error : public error {
public:
  using error::error;
};

/// Operation requires an affine voltage map but a table map was given.
class unsupported_map_error : public error {
public:
  using error::error;
};

/// A closed-form solver found no admissible stationary point; the
/// minimum lies on the window boundary.
class no_interior_optimum_error : public error {
public:
  using error::error;
};

/// Estimation failed: rank-deficient data, too few samples, or a
/// constrained coefficient that cannot be satisfied.
class fit_error : public validation_error {
public:
  using validation_error::validation_error;
};

/// Raised when a fitted line has a nonpositive coefficient; carries the
/// unconstrained estimate so callers can inspect it.
class fit_constraint_error : public fit_error {
public:
  fit_constraint_error(const std::string& what, double m1, double m2)
      : fit_error(what), m1(m1), m2(m2) {}
  double m1;
  double m2;
};

}  // namespace enopt
