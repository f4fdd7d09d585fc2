#pragma once

#include <stdexcept>
#include <string>

namespace dtrimer {

// Argument outside the mathematical domain of a formula (|x_n| >= g/2, 1/g^2 at g = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A ModelParams field violates its invariant. field() names the offending field.
class ParameterError : public DomainError {
 public:
  ParameterError(std::string field, const std::string& what)
      : DomainError(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Caller asked a solver for a branch outside its validity window.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

// Raised by the spectrum code when the fluctuation matrix is not positive semidefinite.
class UnstableBackground : public std::runtime_error {
 public:
  UnstableBackground(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

}  // namespace dtrimer
