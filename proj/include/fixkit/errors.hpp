#pragma once

#include <stdexcept>
#include <string>

namespace fixkit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reader failure with a 1-based source position.
struct ParseError : Error {
  int line;
  int column;
  ParseError(int line, int column, const std::string& reason)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + reason),
        line(line),
        column(column) {}
};

// Schema or definition rejected while loading.
struct ValidateError : Error {
  using Error::Error;
};

// Name (type, tag, field, function, visitor) not found, or misused.
struct LookupError : Error {
  using Error::Error;
};

// Runtime evaluation failure.
struct EvalError : Error {
  enum class Kind { Guard, Unbound, Arity, Depth, Overflow, Other };
  Kind kind;
  EvalError(Kind kind, const std::string& what) : Error(what), kind(kind) {}
};

inline EvalError guard_violation(const std::string& what) {
  return EvalError(EvalError::Kind::Guard, what);
}

}  // namespace fixkit
