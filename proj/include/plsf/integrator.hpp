#ifndef PLSF_INTEGRATOR_HPP
#define PLSF_INTEGRATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "plsf/error.hpp"

namespace plsf {

struct StepControl {
  double rtol = 1e-8;
  double atol = 1e-12;
  double dt_min = 1e-12;
  double dt_max = std::numeric_limits<double>::infinity();
  double dt_initial = 0.0;  // 0: pick automatically
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

/// Dormand-Prince 5(4) with FSAL and a PI step-size controller.
///
/// Rhs is callable as rhs(t, y, dydt) with spans of length n.  The fifth-order
/// solution is propagated; the embedded fourth-order one only estimates error.
template <class Rhs>
class DormandPrince45 {
 public:
  DormandPrince45(Rhs rhs, StepControl control) : rhs_(std::move(rhs)), ctl_(control) {
    if (!(ctl_.rtol >= 0.0) || !(ctl_.atol >= 0.0) || (ctl_.rtol == 0.0 && ctl_.atol == 0.0))
      throw DomainError("DormandPrince45: tolerances must be nonnegative and not both zero");
    if (!(ctl_.dt_min > 0.0)) throw DomainError("DormandPrince45: dt_min must be positive");
  }

  void reset(double t, std::span<const double> y) {
    t_ = t;
    y_.assign(y.begin(), y.end());
    const std::size_t n = y_.size();
    for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_}) k->assign(n, 0.0);
    ynew_.assign(n, 0.0);
    tmp_.assign(n, 0.0);
    eval(t_, y_, k1_);
    h_ = ctl_.dt_initial > 0.0 ? ctl_.dt_initial : initial_step();
    err_old_ = 1e-4;
    last_rejected_ = false;
  }

  double time() const noexcept { return t_; }
  std::span<const double> state() const noexcept { return y_; }
  /// Derivative at the current state, valid after reset or any step.
  std::span<const double> derivative() const noexcept { return k1_; }
  double proposed_step() const noexcept { return h_; }
  const IntegratorStats& stats() const noexcept { return stats_; }
  const StepControl& control() const noexcept { return ctl_; }

  /// Takes one accepted adaptive step that does not pass t_limit.  Returns the
  /// accepted step length.  Throws StiffnessError below dt_min.
  double step(double t_limit) {
    for (;;) {
      double h = std::min(h_, ctl_.dt_max);
      const double remaining = t_limit - t_;
      bool clipped = false;
      bool lands = false;
      if (h >= remaining) {
        h = remaining;
        clipped = true;
        lands = true;
      } else if (h > 0.5 * remaining) {
        // Avoid leaving a sliver before t_limit.
        h = 0.5 * remaining;
        clipped = true;
      }
      if (h < ctl_.dt_min && !(clipped && remaining < ctl_.dt_min && remaining > 0.0)) {
        std::ostringstream os;
        os << "step size " << h << " fell below dt_min " << ctl_.dt_min << " at t = " << t_;
        throw StiffnessError(os.str(), t_, h, err_last_);
      }
      const double err = attempt(h);
      err_last_ = err;
      if (err <= 1.0) {
        accept(h, lands ? t_limit : t_ + h);
        double fac = kSafety * std::pow(err_ratio(err), kExpo) * std::pow(err_old_, kBeta);
        fac = std::clamp(fac, kMinFactor, kMaxFactor);
        if (last_rejected_) fac = std::min(fac, 1.0);
        err_old_ = std::max(err, 1e-4);
        last_rejected_ = false;
        // A step shortened to hit t_limit says nothing about the next one.
        if (!clipped || h * fac > h_) h_ = h * fac;
        return h;
      }
      ++stats_.rejected;
      last_rejected_ = true;
      h_ = h * std::max(kMinFactor, kSafety * std::pow(err_ratio(err), kExpo));
    }
  }

  /// Advances to exactly t_end with adaptive steps.
  void advance_to(double t_end) {
    while (t_ < t_end) step(t_end);
  }

  /// One step of length h with no error control (order studies).
  void step_fixed(double h) {
    attempt(h);
    accept(h, t_ + h);
  }

 private:
  static constexpr double kSafety = 0.9;
  static constexpr double kBeta = 0.04;
  static constexpr double kExpo = 0.2 - 0.75 * kBeta;
  static constexpr double kMinFactor = 0.2;
  static constexpr double kMaxFactor = 5.0;

  static double err_ratio(double err) { return 1.0 / std::max(err, 1e-10); }

  void eval(double t, std::span<const double> y, std::vector<double>& out) {
    rhs_(t, y, std::span<double>(out));
    ++stats_.rhs_evaluations;
  }

  double weighted_rms(std::span<const double> e) const {
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double sc = ctl_.atol + ctl_.rtol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
      const double r = e[i] / sc;
      s += r * r;
    }
    return e.empty() ? 0.0 : std::sqrt(s / static_cast<double>(e.size()));
  }

  double initial_step() {
    const std::size_t n = y_.size();
    if (n == 0) return 1e-3;
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = ctl_.atol + ctl_.rtol * std::abs(y_[i]);
      d0 += (y_[i] / sc) * (y_[i] / sc);
      d1 += (k1_[i] / sc) * (k1_[i] / sc);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, ctl_.dt_max);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y_[i] + h0 * k1_[i];
    eval(t_ + h0, tmp_, k2_);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = ctl_.atol + ctl_.rtol * std::abs(y_[i]);
      const double r = (k2_[i] - k1_[i]) / sc;
      d2 += r * r;
    }
    d2 = std::sqrt(d2 / n) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, 1e-3 * h0) : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, ctl_.dt_max});
  }

  // Fills ynew_ and k7_ = f(t+h, ynew_); returns the scaled error norm.
  double attempt(double h) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    const std::size_t n = y_.size();
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y_[i] + h * a21 * k1_[i];
    eval(t_ + c2 * h, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    eval(t_ + c3 * h, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    eval(t_ + c4 * h, tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    eval(t_ + c5 * h, tmp_, k5_);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                             a65 * k5_[i]);
    eval(t_ + h, tmp_, k6_);
    for (std::size_t i = 0; i < n; ++i)
      ynew_[i] = y_[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
    eval(t_ + h, ynew_, k7_);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                     e7 * k7_[i]);
    return weighted_rms(tmp_);
  }

  // t_new is passed explicitly so a step clipped to t_limit lands on it exactly.
  void accept(double, double t_new) {
    t_ = t_new;
    y_.swap(ynew_);
    k1_.swap(k7_);
    ++stats_.accepted;
  }

  Rhs rhs_;
  StepControl ctl_;
  IntegratorStats stats_;
  double t_ = 0.0;
  double h_ = 0.0;
  double err_old_ = 1e-4;
  double err_last_ = 0.0;
  bool last_rejected_ = false;
  std::vector<double> y_, ynew_, tmp_, k1_, k2_, k3_, k4_, k5_, k6_, k7_;
};

}  // namespace plsf

#endif  // PLSF_INTEGRATOR_HPP
