#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ribcage {

/// Base of every error raised by the library. Each subclass corresponds to
/// one failure category so callers (and tests) can discriminate on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions disagree or a requested extent is invalid.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the declared range of its volume, or is NaN.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// On-disk data does not match the expected layout. `field()` names the
/// offending header field or manifest key.
class FormatError : public Error {
 public:
  FormatError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Filesystem failure (missing input, unwritable output).
class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Defect placement gave up after `attempts()` tries.
class PlacementError : public Error {
 public:
  PlacementError(int attempts, const std::string& what)
      : Error(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// A set-valued operand (mask, implant) has no foreground voxels.
class EmptySetError : public Error {
 public:
  using Error::Error;
};

/// Backward pass called with a cache that does not belong to the parameters.
class StaleCacheError : public Error {
 public:
  using Error::Error;
};

/// Training produced a NaN/Inf loss.
class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace ribcage
