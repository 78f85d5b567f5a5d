#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qrobust {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NotHermitianError : public Error {
 public:
  using Error::Error;
};

class UnknownVariableError : public Error {
 public:
  using Error::Error;
};

class UnknownGateError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Raised when elaboration finds diagnostics (non-unitary gate, incomplete measurement, ...).
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> diagnostics)
      : Error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  static std::string join(const std::vector<std::string>& d) {
    std::string out;
    for (const auto& s : d) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> diagnostics_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class SideConditionFailed : public Error {
 public:
  using Error::Error;
};

class Unconverged : public Error {
 public:
  using Error::Error;
};

}  // namespace qrobust
