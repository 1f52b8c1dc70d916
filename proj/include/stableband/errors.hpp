#pragma once

#include <stdexcept>
#include <string>

namespace stableband {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters, bad configuration, bad CLI usage. Exit code 1.
class validation_error : public error {
 public:
  using error::error;
};

/// Unusable input data: parse failures, degenerate samples, exhausted
/// replay columns. Exit code 2.
class data_error : public error {
 public:
  using error::error;
};

/// Numerical failure inside an estimator or sampler.
class numeric_error : public error {
 public:
  using error::error;
};

/// ECF grid point where the estimator equations are ill-conditioned.
class ill_conditioned_grid_error : public numeric_error {
 public:
  ill_conditioned_grid_error(const std::string& what, double u)
      : numeric_error(what), offending_u(u) {}
  double offending_u;
};

/// Phase unwrap could not be disambiguated; retry with smaller u.
class unwrap_error : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

/// Evaluation of the auxiliary density at one of its poles.
class pole_error : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

}  // namespace stableband
