#ifndef PLSF_EXPONENTS_HPP
#define PLSF_EXPONENTS_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace plsf {

/// Two closed forms circulate for the exponent beta of the second-derivative
/// time integral; they differ only in one constant of the denominator.
enum class BetaVariant { k8pMinus9, k8pMinus6 };

inline const char* to_string(BetaVariant v) noexcept {
  return v == BetaVariant::k8pMinus9 ? "8p-9" : "8p-6";
}

/// beta = p (5p - 9) / (2 (-p^2 + 8p - 9))
inline double beta_8p_minus_9(double p) noexcept { return p * (5 * p - 9) / (2 * (-p * p + 8 * p - 9)); }
/// beta = p (5p - 9) / (2 (-p^2 + 8p - 6))
inline double beta_8p_minus_6(double p) noexcept { return p * (5 * p - 9) / (2 * (-p * p + 8 * p - 6)); }

/// Root in (0, 1) of the Hoelder balance 1/delta + 1/delta' = 1 with
///   1/delta  = ((2-p)/p + (5p-6) lambda / p^2) beta / (1 - beta),
///   1/delta' = lambda / (1 - beta) * 3 (2-p) / (2p),
/// found by bisection (the closed forms above are not used).  NaN when the
/// balance has no root in (0, 1).
inline double beta_from_balance(double p) {
  const double lambda = 2 * (3 - p) / (3 * p - 5);
  const double a = (2 - p) / p + (5 * p - 6) * lambda / (p * p);
  const double b = lambda * 3 * (2 - p) / (2 * p);
  // (1 - beta) * (1/delta + 1/delta' - 1) = a beta + b - (1 - beta), increasing in beta.
  auto g = [&](double beta) { return a * beta + b - (1 - beta); };
  double lo = 0.0, hi = 1.0;
  if (!(g(lo) < 0.0 && g(hi) > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct ExponentTable {
  double p = 0.0;
  double zeta = 0.0;      // 3(p-1)/(3p-5)
  double gamma = 0.0;     // zeta - 1 = 2/(3p-5)
  double lambda = 0.0;    // 2(3-p)/(3p-5)
  double b = 0.0;         // (3-p)/2
  double c_interp = 0.0;  // p/(3p-2)
  double d = 0.0;         // 2p/(7p-6)
  double beta_8p9 = 0.0;
  double beta_8p6 = 0.0;
  double beta_balance = 0.0;
  double beta = 0.0;  // the variant selected by the balance solve
  BetaVariant beta_variant = BetaVariant::k8pMinus9;
  bool beta_selected = false;  // exactly one variant matched the balance
  /// zeta, gamma, lambda admissible: p in (5/3, 2).
  bool partial_valid = false;
  /// Whole table admissible: p in (9/5, 2).
  bool valid = false;
  /// The formulas are three-dimensional; set when requested for dim != 3.
  bool dimension_flag = false;
  std::vector<std::string> violations;
};

/// Relative agreement required between a printed beta and the balance root.
inline constexpr double kBetaMatchTolerance = 1e-10;

inline ExponentTable exponents(double p, int dim = 3) {
  ExponentTable e;
  e.p = p;
  e.zeta = 3 * (p - 1) / (3 * p - 5);
  e.gamma = 2 / (3 * p - 5);
  e.lambda = 2 * (3 - p) / (3 * p - 5);
  e.b = (3 - p) / 2;
  e.c_interp = p / (3 * p - 2);
  e.d = 2 * p / (7 * p - 6);
  e.beta_8p9 = beta_8p_minus_9(p);
  e.beta_8p6 = beta_8p_minus_6(p);
  e.beta_balance = beta_from_balance(p);
  auto matches = [&](double v) {
    return std::isfinite(e.beta_balance) &&
           std::abs(v - e.beta_balance) <= kBetaMatchTolerance * std::abs(e.beta_balance);
  };
  const bool m9 = matches(e.beta_8p9);
  const bool m6 = matches(e.beta_8p6);
  e.beta_selected = m9 != m6;
  e.beta_variant = (m6 && !m9) ? BetaVariant::k8pMinus6 : BetaVariant::k8pMinus9;
  e.beta = e.beta_variant == BetaVariant::k8pMinus9 ? e.beta_8p9 : e.beta_8p6;
  e.partial_valid = p > 5.0 / 3.0 && p < 2.0;
  e.valid = p > 9.0 / 5.0 && p < 2.0;
  if (!(p > 9.0 / 5.0)) e.violations.push_back("p > 9/5 required (beta > 0)");
  if (!(p > 5.0 / 3.0)) e.violations.push_back("p > 5/3 required (zeta, gamma, lambda)");
  if (!(p < 2.0)) e.violations.push_back("p < 2 required");
  if (dim != 3) {
    e.dimension_flag = true;
    e.violations.push_back("exponents derived for dim = 3, requested dim = " + std::to_string(dim));
  }
  if (!e.beta_selected) e.violations.push_back("balance solve did not single out one beta variant");
  return e;
}

}  // namespace plsf

#endif  // PLSF_EXPONENTS_HPP
