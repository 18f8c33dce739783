#pragma once

#include <stdexcept>
#include <string>

namespace oscerr {

/// Invalid caller-supplied argument (bad range, unknown name, malformed text).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Query outside the range a coefficient map or integral set was built for.
class CoverageError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Evaluation point outside the domain of a problem or asymptotic formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The supplied B-series does not describe a consistent method (a(•) != 1).
class InconsistentMethodError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter value for which a construction has no (unique) solution.
class DegenerateParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical integration produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long long step, double time)
      : std::runtime_error("integration diverged at step " + std::to_string(step) +
                           " (t = " + std::to_string(time) + ")"),
        step_(step),
        time_(time) {}

  long long step() const noexcept { return step_; }
  double time() const noexcept { return time_; }

 private:
  long long step_;
  double time_;
};

/// Reference table could not be built to the requested accuracy.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit (action-angle, envelope) could not be performed on the given data.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace oscerr
