#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace swkrr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments violate a documented precondition (bad shapes, weights off the simplex, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Arguments are individually valid but cannot be combined (features from different bases, negative distance).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A routine was handed inputs it does not serve; the message names the one that does.
class DispatchError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Factorization or other numerical breakdown.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary file. Carries the byte offset at which parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace swkrr
