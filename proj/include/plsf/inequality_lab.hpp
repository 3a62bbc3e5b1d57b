#ifndef PLSF_INEQUALITY_LAB_HPP
#define PLSF_INEQUALITY_LAB_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "plsf/basis.hpp"
#include "plsf/constitutive.hpp"
#include "plsf/exponents.hpp"
#include "plsf/galerkin.hpp"
#include "plsf/gap.hpp"
#include "plsf/initial_data.hpp"
#include "plsf/operators.hpp"
#include "plsf/trajectory.hpp"

namespace plsf {

struct EnsembleSpec {
  int dim = 2;
  int resolution = 16;
  double length = 1.0;
  double band = 4.0;
  double decay = 2.0;
  double amplitude = 1.0;
  std::uint64_t seed = 0;
  std::size_t count = 100;
};

/// Reproducible list of random divergence-free band-limited fields.
struct FieldEnsemble {
  EnsembleSpec spec;
  TorusGrid grid;
  std::vector<SpectralVelocity> samples;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Sample i uses seed splitmix64(seed + i), so ensembles with different
/// seeds do not share samples and a prefix of an ensemble is reproducible.
inline FieldEnsemble make_ensemble(const EnsembleSpec& spec) {
  FieldEnsemble e{spec, TorusGrid(spec.dim, spec.length, spec.resolution), {}};
  if (!(spec.band <= spec.resolution / 2))
    throw DomainError("make_ensemble: band must not exceed M/2");
  e.samples.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i)
    e.samples.push_back(random_band(e.grid, {spec.band, spec.decay, spec.amplitude, detail::splitmix64(spec.seed + i)}));
  return e;
}

struct InequalityReport {
  std::string id;
  double p = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> lhs, rhs;
  std::size_t skipped = 0;
  double worst_ratio = 0.0;   // max lhs / rhs
  double empirical_C = 0.0;   // constant needed to cover the ensemble
  double frozen_C = std::numeric_limits<double>::quiet_NaN();
  std::size_t violations = 0;  // samples with lhs > frozen_C * rhs (+ slack)
  std::vector<std::string> notes;

  std::size_t count() const noexcept { return lhs.size(); }
  bool pass() const noexcept { return violations == 0; }
};

inline nlohmann::ordered_json to_json(const InequalityReport& r) {
  auto num = [](double x) -> nlohmann::ordered_json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["p"] = num(r.p);
  j["mu"] = num(r.mu);
  j["count"] = r.count();
  j["worst_ratio"] = num(r.worst_ratio);
  j["empirical_C"] = num(r.empirical_C);
  j["violations"] = r.violations;
  j["frozen_C"] = num(r.frozen_C);
  j["skipped"] = r.skipped;
  j["notes"] = r.notes;
  return j;
}

namespace detail {

/// Records one sample; ratio statistics use lhs / rhs.
inline void add_sample(InequalityReport& r, double lhs, double rhs) {
  r.lhs.push_back(lhs);
  r.rhs.push_back(rhs);
  const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  r.worst_ratio = std::max(r.worst_ratio, ratio);
}

/// Counts violations of lhs <= C rhs + slack * scale.  A NaN constant means
/// "twice the ensemble's own empirical constant".
inline void finish(InequalityReport& r, double frozen, double slack = 0.0) {
  r.empirical_C = r.worst_ratio;
  r.frozen_C = std::isnan(frozen) ? 2.0 * r.empirical_C : frozen;
  r.violations = 0;
  for (std::size_t i = 0; i < r.lhs.size(); ++i)
    if (r.lhs[i] > r.frozen_C * r.rhs[i] + slack * std::max(std::abs(r.lhs[i]), std::abs(r.rhs[i])))
      ++r.violations;
}

/// (int (mu + |T|^2)^(q/2) dx)^(1/q).
template <int Rank>
double shifted_lp_norm(const PhysicalField<Rank>& f, double mu, double q) {
  double s = 0.0;
  for (std::size_t x = 0; x < f.points(); ++x) s += std::pow(mu + f.magnitude_squared(x), 0.5 * q);
  return std::pow(s * f.grid().cell_volume(), 1.0 / q);
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// ||u||_q + ||grad u||_q <= c ||D^2 u||_q.
inline InequalityReport check_lemma1(const FieldEnsemble& ens, double q,
                                     double frozen_C = std::numeric_limits<double>::quiet_NaN()) {
  if (!(q > 1.0)) throw DomainError("check_lemma1: requires q > 1");
  InequalityReport r;
  r.id = "lemma1";
  r.p = q;
  for (const auto& u : ens.samples) {
    const double d2 = lp_norm(second_derivatives(u.field()), q);
    if (d2 == 0.0) {
      ++r.skipped;
      continue;
    }
    detail::add_sample(r, lp_norm(to_physical(u.field()), q) + lp_norm(gradient(u.field()), q), d2);
  }
  if (r.skipped) r.notes.push_back(std::to_string(r.skipped) + " zero field(s) skipped");
  detail::finish(r, frozen_C);
  return r;
}

struct FriedrichsReport {
  InequalityReport report;
  double q = 0.0;
  double epsilon = 0.0;
  std::size_t kappa = 0;  // least number of projections covering the ensemble
  std::size_t band_size = 0;
};

/// Squared form  ||u||_2^2 <= (1 + eps) sum_{j<=kappa} (u, a^j)^2 + eps ||grad u||_q^2.
/// kappa is found by doubling, then bisection between the last two doublings.
inline FriedrichsReport check_friedrichs(const FieldEnsemble& ens, double q, double epsilon) {
  if (!(q > 1.2)) throw DomainError("check_friedrichs: requires q > 6/5");
  if (!(epsilon > 0.0)) throw DomainError("check_friedrichs: requires epsilon > 0");
  FriedrichsReport fr;
  fr.q = q;
  fr.epsilon = epsilon;
  const auto basis = make_basis(ens.grid, max_basis_size(ens.grid));
  fr.band_size = basis.size();
  struct Sample {
    double norm2, grad2;
    std::vector<double> partial;  // partial[k] = sum_{j<k} (u, a^j)^2
  };
  std::vector<Sample> samples;
  for (const auto& u : ens.samples) {
    Sample s;
    s.norm2 = u.energy();
    const double g = lp_norm(gradient(u.field()), q);
    s.grad2 = g * g;
    const auto c = basis.project(u.field());
    s.partial.assign(c.size() + 1, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) s.partial[j + 1] = s.partial[j] + c[j] * c[j];
    samples.push_back(std::move(s));
  }
  auto holds = [&](std::size_t kappa) {
    return std::all_of(samples.begin(), samples.end(), [&](const Sample& s) {
      return s.norm2 <= (1.0 + epsilon) * s.partial[kappa] + epsilon * s.grad2;
    });
  };
  if (holds(0)) {
    fr.kappa = 0;
  } else {
    // holds() is monotone in kappa; after doubling, hi passes and hi / 2 fails.
    std::size_t hi = 1;
    while (hi < fr.band_size && !holds(hi)) hi = std::min(2 * hi, fr.band_size);
    std::size_t lo = hi / 2;
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (holds(mid) ? hi : lo) = mid;
    }
    fr.kappa = hi;
  }

  auto& r = fr.report;
  r.id = "friedrichs";
  r.p = q;
  for (const auto& s : samples) detail::add_sample(r, s.norm2, (1.0 + epsilon) * s.partial[fr.kappa] + epsilon * s.grad2);
  detail::finish(r, 1.0, 1e-14);
  r.notes.push_back("squared form; kappa = " + std::to_string(fr.kappa) + " of " + std::to_string(fr.band_size));
  return fr;
}

struct Lemma3Reports {
  InequalityReport sd1, sd4, sd2;
};

/// The three second-derivative estimates, each with its empirical constant:
///   SD1  ||D^2 u||_p <= c I_p^(1/2) ||(mu+|Du|^2)^(1/2)||_p^((2-p)/2)
///   SD4  ||(mu+|Du|^2)^(1/2)||_p^(p/2) <= c (I_p^(1/2) + mu^(p/4))
///   SD2  ||grad u||_(3p) <= c (I_p^(1/p) + mu^(1/2))
inline Lemma3Reports check_lemma3(const FieldEnsemble& ens, const FluidParams& fp,
                                  double frozen_C = std::numeric_limits<double>::quiet_NaN()) {
  if (!(fp.mu > 0.0)) throw DomainError("check_lemma3: requires mu > 0");
  if (!(fp.p > 1.0 && fp.p < 2.0)) throw DomainError("check_lemma3: requires p in (1, 2)");
  const double p = fp.p, mu = fp.mu;
  Lemma3Reports out;
  for (auto* r : {&out.sd1, &out.sd4, &out.sd2}) {
    r->p = p;
    r->mu = mu;
  }
  out.sd1.id = "lemma3.SD1";
  out.sd4.id = "lemma3.SD4";
  out.sd2.id = "lemma3.SD2";
  for (const auto& u : ens.samples) {
    const double ip = ip_functional(u, fp);
    const auto d = sym_gradient(u);
    const double shifted = detail::shifted_lp_norm(d, mu, p);
    const double d2 = lp_norm(second_derivatives(u.field()), p);
    const double rhs1 = std::sqrt(ip) * std::pow(shifted, 0.5 * (2.0 - p));
    if (rhs1 > 0.0)
      detail::add_sample(out.sd1, d2, rhs1);
    else
      ++out.sd1.skipped;
    detail::add_sample(out.sd4, std::pow(shifted, 0.5 * p), std::sqrt(ip) + std::pow(mu, 0.25 * p));
    detail::add_sample(out.sd2, lp_norm(gradient(u.field()), 3.0 * p), std::pow(ip, 1.0 / p) + std::sqrt(mu));
  }
  if (out.sd1.skipped) out.sd1.notes.push_back(std::to_string(out.sd1.skipped) + " zero field(s) skipped");
  for (auto* r : {&out.sd1, &out.sd4, &out.sd2}) detail::finish(*r, frozen_C);
  return out;
}

/// Relative spread |a - b| / max(a, b) of two empirical constants.
inline double constant_spread(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

struct InterpolationReports {
  InequalityReport c1, c2, d;
};

/// Hoelder interpolation slack: |x|_3 <= |x|_r^t |x|_s^(1-t) holds exactly for
/// the trapezoid sums, so constant 1 plus rounding.
inline constexpr double kInterpolationSlack = 1e-10;

/// (c1) ||grad v||_3 <= ||grad v||_3p^b ||grad v||_p^(1-b),  b = (3-p)/2
/// (c2) ||grad v||_3 <= ||grad v||_3p^c ||grad v||_2^(1-c),  c = p/(3p-2)
/// (d)  ||grad u||_2 <= C ||D^2 u||_p^d ||u||_2^(1-d),       d = 2p/(7p-6)
inline InterpolationReports check_interpolations(const FieldEnsemble& ens, double p,
                                                 double frozen_d = std::numeric_limits<double>::quiet_NaN()) {
  InterpolationReports out;
  const double b = (3.0 - p) / 2.0, c = p / (3.0 * p - 2.0), dx = 2.0 * p / (7.0 * p - 6.0);
  out.c1.id = "interp.c1";
  out.c2.id = "interp.c2";
  out.d.id = "interp.d";
  for (auto* r : {&out.c1, &out.c2, &out.d}) r->p = p;
  if (!(p > 1.8 && p < 2.0))
    for (auto* r : {&out.c1, &out.c2, &out.d}) r->notes.push_back("p outside (9/5, 2): exponents not admissible");
  for (const auto& u : ens.samples) {
    const auto g = gradient(u.field());
    const double g3 = lp_norm(g, 3.0), g3p = lp_norm(g, 3.0 * p), gp = lp_norm(g, p), g2 = lp_norm(g, 2.0);
    detail::add_sample(out.c1, g3, std::pow(g3p, b) * std::pow(gp, 1.0 - b));
    detail::add_sample(out.c2, g3, std::pow(g3p, c) * std::pow(g2, 1.0 - c));
    const double d2 = lp_norm(second_derivatives(u.field()), p);
    detail::add_sample(out.d, g2, std::pow(d2, dx) * std::pow(std::sqrt(u.energy()), 1.0 - dx));
  }
  detail::finish(out.c1, 1.0, kInterpolationSlack);
  detail::finish(out.c2, 1.0, kInterpolationSlack);
  detail::finish(out.d, frozen_d);
  return out;
}

// ---------------------------------------------------------------------------

struct ClIReport {
  double p = 0.0;
  std::vector<std::size_t> n_modes;
  std::vector<double> integral_8p9, integral_8p6;  // int ||D^2 v^N||_p^(2 beta) dt
  BetaVariant selected = BetaVariant::k8pMinus9;
  double spread = 0.0;  // max / min over N of the selected variant
  bool pass = false;    // finite and spread <= kUniformityFactor
};

/// Family values within this factor count as bounded by a common constant.
inline constexpr double kUniformityFactor = 2.0;

/// Ratio max / min of a family, 1 when all values vanish.
inline double family_spread(const std::vector<double>& v) {
  if (v.empty()) return 1.0;
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  if (*mx == 0.0) return 1.0;
  if (*mn <= 0.0) return std::numeric_limits<double>::infinity();
  return *mx / *mn;
}

inline ClIReport check_cl_i(const std::vector<const TrajectoryRecord*>& records) {
  ClIReport rep;
  if (records.empty()) throw DomainError("check_cl_i: no trajectories");
  rep.p = records.front()->p;
  const auto ex = exponents(rep.p);
  rep.selected = ex.beta_variant;
  for (const auto* rec : records) {
    if (!rec->has_d2())
      throw ConfigError("check_cl_i: trajectory N = " + std::to_string(rec->n_modes) +
                        " lacks ||D^2 v||_p samples (enable record_d2)");
    std::vector<double> f9(rec->size()), f6(rec->size());
    for (std::size_t i = 0; i < rec->size(); ++i) {
      f9[i] = std::pow(rec->d2_p_norm[i], 2.0 * ex.beta_8p9);
      f6[i] = std::pow(rec->d2_p_norm[i], 2.0 * ex.beta_8p6);
    }
    rep.n_modes.push_back(rec->n_modes);
    rep.integral_8p9.push_back(detail::trapezoid(rec->t, f9));
    rep.integral_8p6.push_back(detail::trapezoid(rec->t, f6));
  }
  const auto& sel = rep.selected == BetaVariant::k8pMinus9 ? rep.integral_8p9 : rep.integral_8p6;
  rep.spread = family_spread(sel);
  const bool finite = std::all_of(sel.begin(), sel.end(), [](double x) { return std::isfinite(x); });
  rep.pass = finite && rep.spread <= kUniformityFactor;
  return rep;
}

inline nlohmann::ordered_json to_json(const ClIReport& r) {
  nlohmann::ordered_json j;
  j["id"] = "cl_i";
  j["p"] = r.p;
  j["N"] = r.n_modes;
  j["integral_8p-9"] = r.integral_8p9;
  j["integral_8p-6"] = r.integral_8p6;
  j["beta_variant_used"] = to_string(r.selected);
  j["spread"] = r.spread;
  j["pass"] = r.pass;
  return j;
}

/// Random states are projected random_band fields; the inequality
///   (1/2) d/dt ||grad v||_2^2 + (p-1) I_p(v) <= ||grad v||_3^3
/// is evaluated with d/dt ||grad v||_2^2 = 2 sum_r lambda_r c_r (dc_r/dt).
inline constexpr double kAp3Slack = 1e-8;

inline InequalityReport check_ap3(const FieldEnsemble& ens, const FluidParams& fp, std::size_t n_modes = 0) {
  if (!(fp.mu > 0.0)) throw DomainError("check_ap3: requires mu > 0");
  auto basis = std::make_shared<const StokesBasis>(
      make_basis(ens.grid, n_modes == 0 ? max_basis_size(ens.grid) : n_modes));
  GalerkinSystem sys(basis, fp);
  InequalityReport r;
  r.id = "ap3";
  r.p = fp.p;
  r.mu = fp.mu;
  std::vector<double> dc(basis->size());
  for (const auto& u : ens.samples) {
    const auto c = basis->project(u.field());
    sys.rhs(c, dc);
    double drho = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) drho += 2.0 * (*basis)[k].eigenvalue * c[k] * dc[k];
    const auto f = sys.functionals(c, false);
    const double g3 = sys.grad_lq_norm(c, 3.0);
    r.lhs.push_back(0.5 * drho + (fp.p - 1.0) * f.ip);
    r.rhs.push_back(g3 * g3 * g3);
    // Scale for the slack: the magnitudes of the individual terms.
    const double scale = std::abs(0.5 * drho) + (fp.p - 1.0) * f.ip + g3 * g3 * g3;
    if (r.lhs.back() > r.rhs.back() + kAp3Slack * scale) ++r.violations;
    const double ratio = r.rhs.back() > 0.0 ? r.lhs.back() / r.rhs.back() : 0.0;
    r.worst_ratio = std::max(r.worst_ratio, ratio);
  }
  r.empirical_C = r.worst_ratio;
  r.frozen_C = 1.0;
  return r;
}

/// The pointwise derivative identity for the stress on random tensors:
/// count samples, worst residual / tolerance, violations.
inline InequalityReport check_oo(std::size_t count, std::uint64_t seed,
                                 const std::vector<double>& ps = {1.81, 1.9, 1.99},
                                 const std::vector<double>& mus = {0.1, 1.0}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> lg(-2.0, 2.0);
  auto sym = [&](double magnitude) {
    PointTensor<double> a{3, {}};
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) a(i, j) = a(j, i) = n(rng);
    return (magnitude / std::sqrt(frobenius_squared(a))) * a;
  };
  InequalityReport r;
  r.id = "oo";
  for (std::size_t k = 0; k < count; ++k) {
    const FluidParams fp(ps[k % ps.size()], mus[(k / ps.size()) % mus.size()]);
    const auto d = sym(std::pow(10.0, lg(rng)));
    const auto dd = sym(std::pow(10.0, lg(rng)));
    detail::add_sample(r, oo_identity_residual(d, dd, fp), oo_identity_tolerance(d, dd, fp));
  }
  detail::finish(r, 1.0);
  r.notes.push_back("ratio = residual / (1e-10 (1 + |D|)^p |dD|^2)");
  return r;
}

}  // namespace plsf

#endif  // PLSF_INEQUALITY_LAB_HPP
