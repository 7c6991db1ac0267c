#pragma once

#include <stdexcept>
#include <string>

namespace ppm {

// Configuration and validation problems: bad schema, malformed JSON,
// parameter values out of range. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Problems with the data itself: unparseable rows, inconsistent labels,
// single-class training sets. The CLI maps these to exit code 3.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ppm
