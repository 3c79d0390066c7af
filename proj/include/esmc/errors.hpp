#pragma once

#include <stdexcept>
#include <string>

namespace esmc {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad caller input: shape mismatches, out-of-range parameters.
class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& msg) : Error(msg) {}
};

// Input is syntactically valid but mathematically unusable
// (all-identical points, all-zero label matrix, ...).
class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& msg) : Error(msg) {}
};

// A factorization or solve failed even after jitter escalation.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

// Text-format parse failure; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, long line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Model/file schema violation; message names the offending field.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Enumeration request beyond the supported budget.
class BudgetExceededError : public Error {
 public:
  explicit BudgetExceededError(const std::string& msg) : Error(msg) {}
};

}  // namespace esmc
