#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stereonormal {

/// Invalid argument or violated precondition of a public operation.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Offset set whose least-squares normal matrix is singular.
class SingularConfigurationError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Plane that contains the viewing ray of the point (n . X == 0).
class DegeneratePlaneError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Statistics requested over a field with no valid pixel.
class EmptyInputError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Malformed file content. `offset` is the byte position where decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// File that cannot be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text configuration (scene / rig files) that fails to parse.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace stereonormal
