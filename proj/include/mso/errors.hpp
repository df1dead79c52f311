#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mso {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text; `offset` is a 1-based character position.
struct SyntaxError : Error {
  std::size_t offset;
  SyntaxError(const std::string& msg, std::size_t off)
      : Error(msg + " at offset " + std::to_string(off)), offset(off) {}
};

// A precondition of an operation does not hold (arity/level mismatch,
// invalid partition, not potentially uniformizable, ...).
struct DomainError : Error {
  using Error::Error;
};

// A set of member theories disagrees on its projection.
struct CoherenceError : DomainError {
  using DomainError::DomainError;
};

// The configured resource budget was exhausted.
struct BudgetExceeded : Error {
  using Error::Error;
};

}  // namespace mso
