#pragma once

#include <stdexcept>
#include <string>

namespace radiomap {

/// Bad user input: malformed config, unknown keys, inconsistent options.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad or missing data on disk, shape mismatches between stored artifacts.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a result (singular system, etc).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace radiomap
