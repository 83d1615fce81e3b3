#pragma once

#include <stdexcept>
#include <string>

namespace propgen {

// Input bytes cannot be parsed at all: broken JSON, wrong top-level shape.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input parsed but violates a data invariant: degenerate box, unknown class,
// annotation pointing at a missing image, and so on.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration value is out of range or missing: bad threshold grid,
// non-positive budget, stochastic stage without a seed.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace propgen
