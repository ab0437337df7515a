#pragma once

#include <stdexcept>
#include <string>

namespace bellturb {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical evaluation produced a non-finite intermediate.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Covariance matrix is indefinite beyond the clamp tolerance.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Postselected sampling would stall (acceptance probability too small).
class FeasibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Correlation coefficient with p_same + p_different == 0.
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Fock-space truncation is too small for the requested squeezing.
class CutoffError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration text.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace bellturb
