#pragma once

#include <stdexcept>
#include <string>

namespace mcac {

/// Malformed or inconsistent input data (files, scenarios, artifacts).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mcac
