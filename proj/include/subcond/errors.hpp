#pragma once

#include <stdexcept>
#include <string>

namespace subcond {

/// Shape or dimension mismatch between operands.
class DimensionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid layer, model, benchmark, or run configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// API misuse: backward called twice, taps on a non-decomposed model, ...
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid runtime input: label out of range, absent subject id, ...
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed dataset file; carries the byte offset of the defect.
class FormatError : public std::runtime_error {
public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

/// NaN or Inf produced during a forward or backward pass.
class NonFiniteError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Training aborted; message carries epoch/batch context.
class TrainingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace subcond
