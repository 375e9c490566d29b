#pragma once

#include <stdexcept>
#include <string>

namespace semplan {

/// Malformed input file (map, LBC state, calibration table, config syntax).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario configuration is well-formed but semantically invalid.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No path exists between the requested endpoints.
class UnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semplan
