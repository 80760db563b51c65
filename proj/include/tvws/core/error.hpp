#pragma once

#include <stdexcept>
#include <string>

namespace tvws {

/// Base error for every failure raised by the toolkit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Caller supplied a value outside the operation's domain.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// A numerical stage could not produce a result (degenerate data, singular system).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Error raised inside a pipeline, tagged with the failing stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)), message_(what) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string stage_;
  std::string message_;
};

}  // namespace tvws
