#pragma once

#include <stdexcept>
#include <string>

namespace swipt {

enum class ErrorKind {
  InvalidInput,    // malformed or inconsistent problem data
  Infeasible,      // no allocation satisfies the constraints
  NonConvergence,  // iterative solver gave up
  Pole,            // evaluation at a singularity of a multiplier function
};

const char* to_string(ErrorKind kind);

class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw SolverError(kind, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidInput, what);
}

}  // namespace swipt
