#pragma once

#include <stdexcept>
#include <string>

namespace nrmi {

// Raised when a numerical routine cannot deliver a result at the requested
// accuracy (bracketing failure, inconsistent moments, truncation caps).
// Precondition violations use std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nrmi
