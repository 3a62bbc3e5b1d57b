#ifndef PLSF_GAP_HPP
#define PLSF_GAP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "plsf/error.hpp"
#include "plsf/exponents.hpp"
#include "plsf/trajectory.hpp"

namespace plsf {

/// P(alpha, rho) = 1 if rho^gamma <= tan(alpha), else
/// (pi - 2 atan(rho^gamma)) / (pi - 2 alpha).
inline double weight_P(double alpha, double rho, double gamma) {
  if (!(alpha >= 0.0 && alpha < std::numbers::pi / 2))
    throw DomainError("weight_P: alpha must lie in [0, pi/2)");
  if (!(rho >= 0.0)) throw DomainError("weight_P: rho must be >= 0");
  const double rg = std::pow(rho, gamma);
  if (rg <= std::tan(alpha)) return 1.0;
  // pi - 2 atan(x) = 2 atan(1/x) for x > 0, without the cancellation.
  return 2.0 * std::atan(1.0 / rg) / (std::numbers::pi - 2.0 * alpha);
}

// ---------------------------------------------------------------------------
// Piecewise-linear view of a record restricted to [s, t].

namespace detail {

/// Linear interpolation of column y at time tau (tau inside the record span).
inline double interpolate(const std::vector<double>& t, const std::vector<double>& y, double tau) {
  if (tau <= t.front()) return y.front();
  if (tau >= t.back()) return y.back();
  const auto it = std::upper_bound(t.begin(), t.end(), tau);
  const std::size_t j = static_cast<std::size_t>(it - t.begin());
  const double w = (tau - t[j - 1]) / (t[j] - t[j - 1]);
  if (w == 0.0) return y[j - 1];
  return y[j - 1] + w * (y[j] - y[j - 1]);
}

inline void check_window(const TrajectoryRecord& rec, double s, double t, const char* where) {
  if (!(s < t)) throw DomainError(std::string(where) + ": requires s < t");
  if (rec.empty()) throw DomainError(std::string(where) + ": empty record");
  if (s < rec.t.front() || t > rec.t.back())
    throw DomainError(std::string(where) + ": [s, t] outside the record span");
}

/// Sample times strictly inside (s, t), framed by s and t.
inline std::vector<double> window_nodes(const TrajectoryRecord& rec, double s, double t) {
  std::vector<double> nodes{s};
  for (double x : rec.t)
    if (x > s && x < t) nodes.push_back(x);
  nodes.push_back(t);
  return nodes;
}

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

/// Integral of column y over [a, b] for the piecewise-linear interpolant.
inline double integrate(const TrajectoryRecord& rec, const std::vector<double>& y, double a, double b) {
  if (!(b > a)) return 0.0;
  const auto x = window_nodes(rec, a, b);
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = interpolate(rec.t, y, x[i]);
  return trapezoid(x, v);
}

/// Derivative of column y at every sample: centred three-point formula on the
/// nonuniform grid, one-sided at the ends.
inline std::vector<double> sample_derivative(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (y[1] - y[0]) / (t[1] - t[0]);
  d[n - 1] = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
    d[i] = (-h1 / (h0 * (h0 + h1))) * y[i - 1] + ((h1 - h0) / (h0 * h1)) * y[i] +
           (h0 / (h1 * (h0 + h1))) * y[i + 1];
  }
  return d;
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct ExceedanceInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool left_truncated = false;   // lo = s with rho^gamma(s) > tan(alpha)
  bool right_truncated = false;  // hi = t with rho^gamma(t) > tan(alpha)
};

/// J_N(alpha) = { tau in [s, t] : rho^gamma(tau) > tan(alpha) } for the
/// piecewise-linear interpolant of rho.
struct ExceedancePartition {
  double s = 0.0, t = 0.0;
  double alpha = 0.0;
  double threshold = 0.0;  // tan(alpha)
  double gamma = 0.0;
  std::vector<ExceedanceInterval> intervals;
  double total_measure = 0.0;
  /// rho^gamma(s), rho^gamma(t) < tan(alpha): endpoints all sit on the threshold.
  bool admissible = true;
  bool boundary_truncated = false;

  bool empty() const noexcept { return intervals.empty(); }
};

/// Crossings are bracketed by bisection until the bracket is 1e-10 of the
/// sample spacing.
inline constexpr double kRootTolerance = 1e-10;

inline ExceedancePartition exceedance_partition(const TrajectoryRecord& rec, double s, double t,
                                                double alpha, double gamma) {
  detail::check_window(rec, s, t, "exceedance_partition");
  if (!(alpha >= 0.0 && alpha < std::numbers::pi / 2))
    throw DomainError("exceedance_partition: alpha must lie in [0, pi/2)");
  ExceedancePartition part;
  part.s = s;
  part.t = t;
  part.alpha = alpha;
  part.gamma = gamma;
  part.threshold = std::tan(alpha);
  const double thr = part.threshold;
  const auto nodes = detail::window_nodes(rec, s, t);
  std::vector<double> rho(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) rho[i] = detail::interpolate(rec.t, rec.rho, nodes[i]);
  auto excess = [&](double r) { return std::pow(r, gamma) - thr; };

  auto crossing = [&](std::size_t i) {
    // Root of excess(rho(tau)) on [nodes[i], nodes[i+1]], rho linear there.
    double lo = nodes[i], hi = nodes[i + 1];
    const double r0 = rho[i], r1 = rho[i + 1], a = nodes[i], w = nodes[i + 1] - nodes[i];
    const bool rising = excess(r0) <= 0.0;
    const double tol = kRootTolerance * w;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const bool above = excess(r0 + (r1 - r0) * ((mid - a) / w)) > 0.0;
      ((above == rising) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  };

  bool inside = excess(rho.front()) > 0.0;
  double start = s;
  bool start_trunc = inside;
  part.admissible = !inside && !(excess(rho.back()) > 0.0);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const bool next = excess(rho[i + 1]) > 0.0;
    if (next == inside) continue;
    const double tau = crossing(i);
    if (inside) {
      part.intervals.push_back({start, tau, start_trunc, false});
    } else {
      start = tau;
      start_trunc = false;
    }
    inside = next;
  }
  if (inside) part.intervals.push_back({start, t, start_trunc, true});
  for (const auto& iv : part.intervals) {
    part.total_measure += iv.hi - iv.lo;
    part.boundary_truncated = part.boundary_truncated || iv.left_truncated || iv.right_truncated;
  }
  return part;
}

/// | E(t) + 2 int_s^t rho_tilde - E(s) |, trapezoid over the samples.
inline double energy_residual(const TrajectoryRecord& rec, double s, double t) {
  detail::check_window(rec, s, t, "energy_residual");
  const double es = detail::interpolate(rec.t, rec.energy, s);
  const double et = detail::interpolate(rec.t, rec.energy, t);
  return std::abs(et + 2.0 * detail::integrate(rec, rec.rho_tilde, s, t) - es);
}

/// Sum of energy residuals over the intervals of a partition.
inline double energy_residual_on(const TrajectoryRecord& rec, const ExceedancePartition& part) {
  double r = 0.0;
  for (const auto& iv : part.intervals)
    if (iv.hi > iv.lo) r += energy_residual(rec, iv.lo, iv.hi);
  return r;
}

/// | E(t) P(t) - E(s) P(s) + 2/(pi - 2 alpha) int_J E (rho^gamma)' / (1 + rho^(2 gamma))
///   + 2 int_s^t rho_tilde P |.
/// (rho^gamma)' comes from centred differences of the samples, interpolated
/// linearly onto the crossing points.
inline double weighted_energy_residual(const TrajectoryRecord& rec, double s, double t, double alpha,
                                       double gamma) {
  const auto part = exceedance_partition(rec, s, t, alpha, gamma);
  std::vector<double> rg(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) rg[i] = std::pow(rec.rho[i], gamma);
  const auto drg = detail::sample_derivative(rec.t, rg);

  // Nodes: window samples plus partition endpoints.
  auto nodes = detail::window_nodes(rec, s, t);
  for (const auto& iv : part.intervals) {
    nodes.push_back(iv.lo);
    nodes.push_back(iv.hi);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  const std::size_t n = nodes.size();
  std::vector<double> dissip(n), jterm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = nodes[i];
    const double rho = detail::interpolate(rec.t, rec.rho, tau);
    const double e = detail::interpolate(rec.t, rec.energy, tau);
    dissip[i] = detail::interpolate(rec.t, rec.rho_tilde, tau) * weight_P(alpha, rho, gamma);
    const double r = std::pow(rho, gamma);
    jterm[i] = e * detail::interpolate(rec.t, drg, tau) / (1.0 + r * r);
  }
  double jint = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double mid = 0.5 * (nodes[i] + nodes[i + 1]);
    const bool in_j = std::any_of(part.intervals.begin(), part.intervals.end(),
                                  [&](const ExceedanceInterval& iv) { return mid > iv.lo && mid < iv.hi; });
    if (in_j) jint += 0.5 * (nodes[i + 1] - nodes[i]) * (jterm[i] + jterm[i + 1]);
  }
  const double ps = weight_P(alpha, detail::interpolate(rec.t, rec.rho, s), gamma);
  const double pt = weight_P(alpha, detail::interpolate(rec.t, rec.rho, t), gamma);
  const double es = detail::interpolate(rec.t, rec.energy, s);
  const double et = detail::interpolate(rec.t, rec.energy, t);
  return std::abs(et * pt - es * ps + 2.0 / (std::numbers::pi - 2.0 * alpha) * jint +
                  2.0 * detail::trapezoid(nodes, dissip));
}

// ---------------------------------------------------------------------------
// Gap estimate over a family of records.

struct GapEntry {
  std::size_t n_modes = 0;
  double dissipation_form = 0.0;  // 2 int_J rho_tilde
  double jump_form = 0.0;         // -sum_h (E(t_h) - E(s_h))
  double residual_on_J = 0.0;     // energy residual restricted to J
  ExceedancePartition partition;
};

struct GapAlphaRow {
  double alpha = 0.0;
  std::vector<GapEntry> per_n;
  double limsup_dissipation = 0.0;  // max over the family
  bool stable = false;              // agrees with the previous alpha to kPlateauTolerance
};

struct GapEstimate {
  double s = 0.0, t = 0.0;
  double gamma = 0.0, zeta = 0.0, beta = 0.0;
  BetaVariant beta_variant = BetaVariant::k8pMinus9;
  std::vector<GapAlphaRow> rows;  // ascending alpha
  double m_estimate = 0.0;
  double m_alpha = 0.0;      // grid value the estimate was taken at
  bool m_stable = false;     // a plateau was found
  bool s_converged = false;  // s passes the convergence-time proxy
  bool t_converged = false;
  bool j_measure_monotone = true;  // |J_N(alpha)| nonincreasing in alpha for every N
  double final_j_measure = 0.0;    // max_N |J_N(alpha)| at the largest alpha
  double max_consistency_excess = 0.0;  // max(|diss - jump| - residual_on_J), <= 0 expected
};

/// Successive limsup values closer than this (relative) form a plateau.
inline constexpr double kPlateauTolerance = 1e-3;
/// Two largest N agreeing to this (relative) mark a convergence time.
inline constexpr double kConvergenceProxy = 1e-2;

inline bool converged_time(const TrajectoryRecord& a, const TrajectoryRecord& b, double tau) {
  auto rel = [](double x, double y) {
    const double m = std::max(std::abs(x), std::abs(y));
    return m == 0.0 ? 0.0 : std::abs(x - y) / m;
  };
  const double ga = std::sqrt(detail::interpolate(a.t, a.rho, tau));
  const double gb = std::sqrt(detail::interpolate(b.t, b.rho, tau));
  const double pa = detail::interpolate(a.t, a.grad_p_norm, tau);
  const double pb = detail::interpolate(b.t, b.grad_p_norm, tau);
  return rel(ga, gb) < kConvergenceProxy && rel(pa, pb) < kConvergenceProxy;
}

inline GapEstimate gap_estimate(std::vector<const TrajectoryRecord*> records, double s, double t,
                                std::vector<double> alphas, double gamma) {
  if (records.size() < 2)
    throw InsufficientFamilyError("gap_estimate: needs at least 2 trajectories, got " +
                                  std::to_string(records.size()));
  std::stable_sort(records.begin(), records.end(),
                   [](const TrajectoryRecord* a, const TrajectoryRecord* b) { return a->n_modes < b->n_modes; });
  std::sort(alphas.begin(), alphas.end());
  GapEstimate g;
  g.s = s;
  g.t = t;
  g.gamma = gamma;
  const auto ex = exponents(records.front()->p);
  g.zeta = gamma + 1.0;
  g.beta = ex.beta;
  g.beta_variant = ex.beta_variant;
  const auto& big = *records.back();
  const auto& next = *records[records.size() - 2];
  g.s_converged = converged_time(big, next, s);
  g.t_converged = converged_time(big, next, t);

  for (double alpha : alphas) {
    GapAlphaRow row;
    row.alpha = alpha;
    for (const auto* rec : records) {
      GapEntry e;
      e.n_modes = rec->n_modes;
      e.partition = exceedance_partition(*rec, s, t, alpha, gamma);
      for (const auto& iv : e.partition.intervals) {
        if (!(iv.hi > iv.lo)) continue;
        e.dissipation_form += 2.0 * detail::integrate(*rec, rec->rho_tilde, iv.lo, iv.hi);
        e.jump_form -= detail::interpolate(rec->t, rec->energy, iv.hi) -
                       detail::interpolate(rec->t, rec->energy, iv.lo);
      }
      e.residual_on_J = energy_residual_on(*rec, e.partition);
      g.max_consistency_excess =
          std::max(g.max_consistency_excess, std::abs(e.dissipation_form - e.jump_form) - e.residual_on_J);
      row.limsup_dissipation = std::max(row.limsup_dissipation, e.dissipation_form);
      row.per_n.push_back(std::move(e));
    }
    if (!g.rows.empty()) {
      const double prev = g.rows.back().limsup_dissipation;
      const double cur = row.limsup_dissipation;
      const double m = std::max(std::abs(prev), std::abs(cur));
      row.stable = m == 0.0 || std::abs(cur - prev) < kPlateauTolerance * m;
      for (std::size_t k = 0; k < row.per_n.size(); ++k)
        if (row.per_n[k].partition.total_measure > g.rows.back().per_n[k].partition.total_measure)
          g.j_measure_monotone = false;
    }
    g.rows.push_back(std::move(row));
  }
  // M: the largest alpha whose limsup sits on a plateau; else the last value.
  if (!g.rows.empty()) {
    g.m_estimate = g.rows.back().limsup_dissipation;
    g.m_alpha = g.rows.back().alpha;
    for (auto it = g.rows.rbegin(); it != g.rows.rend(); ++it)
      if (it->stable) {
        g.m_estimate = it->limsup_dissipation;
        g.m_alpha = it->alpha;
        g.m_stable = true;
        break;
      }
    for (const auto& e : g.rows.back().per_n)
      g.final_j_measure = std::max(g.final_j_measure, e.partition.total_measure);
  }
  return g;
}

inline nlohmann::ordered_json to_json(const GapEstimate& g) {
  nlohmann::ordered_json j;
  j["M_estimate"] = g.m_estimate;
  j["M_alpha"] = g.m_alpha;
  j["M_stable"] = g.m_stable;
  j["s"] = g.s;
  j["t"] = g.t;
  j["gamma"] = g.gamma;
  j["zeta"] = g.zeta;
  j["beta"] = g.beta;
  j["beta_variant_used"] = to_string(g.beta_variant);
  j["s_converged"] = g.s_converged;
  j["t_converged"] = g.t_converged;
  j["J_measure_monotone"] = g.j_measure_monotone;
  j["final_J_measure"] = g.final_j_measure;
  j["max_consistency_excess"] = g.max_consistency_excess;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : g.rows) {
    nlohmann::ordered_json jr;
    jr["alpha"] = r.alpha;
    auto per = nlohmann::ordered_json::array();
    for (const auto& e : r.per_n) {
      nlohmann::ordered_json je;
      je["N"] = e.n_modes;
      je["dissipation_form"] = e.dissipation_form;
      je["jump_form"] = e.jump_form;
      je["residual_on_J"] = e.residual_on_J;
      je["J_measure"] = e.partition.total_measure;
      je["admissible"] = e.partition.admissible;
      auto iv = nlohmann::ordered_json::array();
      for (const auto& x : e.partition.intervals) iv.push_back({x.lo, x.hi});
      je["intervals"] = std::move(iv);
      per.push_back(std::move(je));
    }
    jr["per_N"] = std::move(per);
    jr["limsup_dissipation"] = r.limsup_dissipation;
    jr["stable"] = r.stable;
    rows.push_back(std::move(jr));
  }
  j["alphas"] = std::move(rows);
  return j;
}

// ---------------------------------------------------------------------------
// Bounded-variation functional.

/// int (1 + rho)^(-zeta) |d rho / d tau| d tau over the whole record, with
/// centred-difference derivatives and the trapezoid rule.
inline double lemma5_functional(const TrajectoryRecord& rec, double zeta) {
  if (rec.size() < 2) return 0.0;
  const auto dr = detail::sample_derivative(rec.t, rec.rho);
  std::vector<double> f(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) f[i] = std::pow(1.0 + rec.rho[i], -zeta) * std::abs(dr[i]);
  return detail::trapezoid(rec.t, f);
}

/// Sum over maximal monotone runs of rho of the exact antiderivative
///   |(1+rho_a)^(1-zeta) - (1+rho_b)^(1-zeta)| / (zeta - 1).
inline double lemma5_monotone_bound(const TrajectoryRecord& rec, double zeta) {
  if (rec.size() < 2) return 0.0;
  auto F = [zeta](double r) { return std::pow(1.0 + r, 1.0 - zeta) / (zeta - 1.0); };
  double total = 0.0;
  std::size_t start = 0;
  int dir = 0;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    const double step = rec.rho[i] - rec.rho[i - 1];
    const int sd = step > 0 ? 1 : (step < 0 ? -1 : 0);
    if (sd != 0 && dir != 0 && sd != dir) {
      total += std::abs(F(rec.rho[start]) - F(rec.rho[i - 1]));
      start = i - 1;
    }
    if (sd != 0) dir = sd;
  }
  total += std::abs(F(rec.rho[start]) - F(rec.rho.back()));
  return total;
}

/// Quadrature error estimate of lemma5_functional: the difference between
/// the full-resolution value and the value from every other sample.
inline double lemma5_quadrature_slack(const TrajectoryRecord& rec, double zeta) {
  if (rec.size() < 5) return 0.0;
  TrajectoryRecord half;
  for (std::size_t i = 0; i < rec.size(); i += 2) {
    half.t.push_back(rec.t[i]);
    half.rho.push_back(rec.rho[i]);
  }
  if (half.t.back() != rec.t.back()) {
    half.t.push_back(rec.t.back());
    half.rho.push_back(rec.rho.back());
  }
  return std::abs(lemma5_functional(rec, zeta) - lemma5_functional(half, zeta));
}

// ---------------------------------------------------------------------------
// Measure of the exceedance set against the Chebyshev bound.

struct MeasureRow {
  double alpha = 0.0;
  std::size_t n_modes = 0;
  double measure = 0.0;
  double bound = 0.0;  // (tan alpha)^(-beta/(2 gamma)) * int_s^t rho^(beta/2)
  bool violated = false;
};

struct MeasureReport {
  std::vector<MeasureRow> rows;
  std::size_t violations = 0;
  double predicted_slope = 0.0;  // -beta / (2 gamma)
};

inline MeasureReport measure_bound_check(const std::vector<const TrajectoryRecord*>& records, double s,
                                         double t, const std::vector<double>& alphas, double beta,
                                         double gamma) {
  MeasureReport rep;
  rep.predicted_slope = -beta / (2.0 * gamma);
  for (const auto* rec : records) {
    detail::check_window(*rec, s, t, "measure_bound_check");
    std::vector<double> rb(rec->size());
    for (std::size_t i = 0; i < rec->size(); ++i) rb[i] = std::pow(rec->rho[i], 0.5 * beta);
    const double integral = detail::integrate(*rec, rb, s, t);
    for (double alpha : alphas) {
      MeasureRow row;
      row.alpha = alpha;
      row.n_modes = rec->n_modes;
      row.measure = exceedance_partition(*rec, s, t, alpha, gamma).total_measure;
      row.bound = std::pow(std::tan(alpha), rep.predicted_slope) * integral;
      // Trapezoid slack: rho^(beta/2) is concave along linear pieces of rho.
      row.violated = row.measure > row.bound * (1.0 + 1e-9) + 1e-300;
      if (row.violated) ++rep.violations;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

/// Least-squares slope of log(measure) against log(tan alpha) over the
/// points with positive measure; NaN with fewer than two such points.
inline double tail_slope(const std::vector<double>& alphas, const std::vector<double>& measures) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < alphas.size(); ++i)
    if (measures[i] > 0.0) {
      x.push_back(std::log(std::tan(alphas[i])));
      y.push_back(std::log(measures[i]));
    }
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace plsf

#endif  // PLSF_GAP_HPP
