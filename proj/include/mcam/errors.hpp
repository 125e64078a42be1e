#pragma once

// Exception hierarchy shared by the library and the mcamsim CLI.
// The CLI maps ConfigError -> 2, CapacityError -> 3, DataError -> 4.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, inconsistent options, malformed config files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The requested support set does not fit in one MCAM block.
class CapacityError : public Error {
 public:
  CapacityError(std::size_t required, std::size_t available)
      : Error("capacity exceeded: " + std::to_string(required) + " strings required, " +
              std::to_string(available) + " available"),
        required_(required),
        available_(available) {}

  [[nodiscard]] std::size_t required() const noexcept { return required_; }
  [[nodiscard]] std::size_t available() const noexcept { return available_; }

 private:
  std::size_t required_;
  std::size_t available_;
};

// Bad input data: unreadable files, ragged rows, values outside an encoder's domain.
class DataError : public Error {
 public:
  using Error::Error;
};

// A value cannot be represented under the requested encoding.
class EncodingError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace mcam
