#pragma once

#include <stdexcept>
#include <string>

namespace qball {

enum class ErrorKind {
  Domain,     // argument outside the mathematical domain of an operation
  Existence,  // no Q-ball exists for the requested frequency
  Config,     // malformed or inconsistent configuration
  Numerical,  // root find / quadrature / shooting failed to converge
  Blowup,     // field evolution diverged
  Bracket,    // bisection bracket does not straddle a transition
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class BlowupError : public Error {
 public:
  BlowupError(double time, const std::string& what)
      : Error(ErrorKind::Blowup, what), time_(time) {}

  /// Simulation time of the first step that produced a non-finite or
  /// out-of-range value.
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace qball
