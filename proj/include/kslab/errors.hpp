#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kslab {

/// Point outside the open disk, or too close to its boundary.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid numerical parameter (grid size, step policy, shape width, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Kernel evaluated at (or too close to) its singularity.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature or sampling budget insufficient for the requested tolerance.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form bound was requested outside the regime where it holds.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Time step exceeds the positivity-preserving drift bound.
class StepTooLargeError : public std::runtime_error {
 public:
  StepTooLargeError(const std::string& what, double bound)
      : std::runtime_error(what), bound_(bound) {}
  double bound() const noexcept { return bound_; }

 private:
  double bound_;
};

/// Initial profile loses too much mass to grid truncation.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration problems, aggregated.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> messages)
      : std::runtime_error(join(messages)), messages_(std::move(messages)) {}
  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  static std::string join(const std::vector<std::string>& m) {
    std::string out;
    for (const auto& s : m) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> messages_;
};

}  // namespace kslab
