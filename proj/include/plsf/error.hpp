#ifndef PLSF_ERROR_HPP
#define PLSF_ERROR_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace plsf {

/// Argument outside the mathematical domain of an operation (q < 1, mu = 0
/// where mu > 0 is required, alpha >= pi/2, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// More basis modes requested than the grid can hold.
class CapacityError : public std::length_error {
 public:
  CapacityError(const std::string& what, std::size_t maximum)
      : std::length_error(what), maximum_(maximum) {}
  std::size_t maximum() const noexcept { return maximum_; }

 private:
  std::size_t maximum_;
};

/// Operands live on different grids or have incompatible shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration.  Carries every violation found, not only the first.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}
  explicit ConfigError(const std::string& violation)
      : ConfigError(std::vector<std::string>{violation}) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

/// Step size fell below dt_min.  Records where the integrator gave up.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(const std::string& what, double time, double step, double error_norm)
      : std::runtime_error(what), time_(time), step_(step), error_norm_(error_norm) {}
  double time() const noexcept { return time_; }
  double step() const noexcept { return step_; }
  double error_norm() const noexcept { return error_norm_; }

 private:
  double time_;
  double step_;
  double error_norm_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A diagnostic needing a family of trajectories received too few.
class InsufficientFamilyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace plsf

#endif  // PLSF_ERROR_HPP
