#pragma once

// Exception types thrown across the library. Everything derives from
// fairsel::error so callers can catch the whole family at once; the CLI maps
// configuration_error (and its children) to exit code 2 and everything else
// to exit code 1.

#include <stdexcept>
#include <string>

namespace fairsel {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function.
class domain_error : public error {
 public:
  using error::error;
};

// Population parameters that make the model meaningless (zero variance).
class degenerate_model_error : public error {
 public:
  using error::error;
};

// gamma-rule interval does not intersect the feasible rates.
class constraint_error : public error {
 public:
  using error::error;
};

// A numerical routine failed to converge or produced non-finite values.
class numeric_error : public error {
 public:
  using error::error;
};

// Bad user configuration: flags, grids, sample sizes.
class configuration_error : public error {
 public:
  using error::error;
};

// Input file does not match the declared schema.
class schema_error : public configuration_error {
 public:
  using configuration_error::configuration_error;
};

// Scoring mode incompatible with the cohort's prior.
class scoring_error : public error {
 public:
  using error::error;
};

}  // namespace fairsel
