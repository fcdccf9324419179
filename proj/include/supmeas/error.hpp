#pragma once

#include <stdexcept>
#include <string>

namespace supmeas {

enum class ErrorKind {
  NonUnitDirection,
  ConvergenceFailure,
  ResolutionNotMet,
  DegenerateShell,
  IllConditioned,
  FaceEnumerationOverflow,
  TooManyAtoms,
  SolverStall,
  Infeasible,
  Unbounded,
  QuadratureMismatch,
  QuadratureFailure,
  LadderNotShrinking,
  InvalidInput,
  ParseError,
  IoError,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

} // namespace supmeas
