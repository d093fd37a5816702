#pragma once

#include <stdexcept>
#include <string>

namespace ska {

/// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Unrecoverable misuse of the runtime (bad SymRef, double ctx destroy,
/// clearing a lock held by someone else, mismatched collectives, ...).
class FatalError : public Error {
public:
  explicit FatalError(const std::string& what) : Error(what) {}
};

/// Problem with a benchmark script: syntax, unknown routine, bad arguments,
/// buffer constraint violations.  Carries a source position when known
/// (1-based; 0 means "not tied to a location").
class ScriptError : public Error {
public:
  ScriptError(const std::string& what, int line = 0, int col = 0)
      : Error(format(what, line, col)), line_(line), col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

private:
  static std::string format(const std::string& what, int line, int col) {
    if (line <= 0) return what;
    return std::to_string(line) + ":" + std::to_string(col) + ": " + what;
  }
  int line_;
  int col_;
};

}  // namespace ska
