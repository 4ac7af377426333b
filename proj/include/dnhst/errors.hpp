#pragma once

#include <stdexcept>
#include <string>

namespace dnhst {

// Argument outside an operation's domain (alpha, q, n, nu, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// t_quantile asked for p = 0 or p = 1.
class UnboundedQuantileError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Sample with zero spread: t is undefined.
class DegenerateSampleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A criterion that diverges at the requested point (t_rep at q = 0).
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative solver missed its tolerance.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unusable input data (files, datasets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dnhst
