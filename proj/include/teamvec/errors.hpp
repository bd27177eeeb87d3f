#pragma once

#include <stdexcept>
#include <string>

namespace teamvec {

/// Problems with input data: missing or malformed files, invalid records,
/// corpora that violate structural requirements. CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Problems with how the tool was invoked: bad flag values, unknown
/// configuration keys, conflicting options. CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace teamvec
