#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "plsf/exponents.hpp"
#include "plsf/gap.hpp"
#include "plsf/initial_data.hpp"
#include "plsf/trajectory.hpp"

using namespace plsf;

namespace {

constexpr double kPi = std::numbers::pi;

/// Record sampled from closed forms on a uniform grid over [0, T].
TrajectoryRecord synthetic(std::function<double(double)> rho, std::function<double(double)> energy,
                           std::function<double(double)> rho_tilde, double T, std::size_t samples,
                           std::size_t n_modes = 10) {
  TrajectoryRecord r;
  r.p = 1.9;
  r.n_modes = n_modes;
  for (std::size_t i = 0; i < samples; ++i) {
    const double tau = T * static_cast<double>(i) / static_cast<double>(samples - 1);
    r.t.push_back(tau);
    r.rho.push_back(rho(tau));
    r.energy.push_back(energy(tau));
    r.rho_tilde.push_back(rho_tilde(tau));
    r.grad_p_norm.push_back(std::sqrt(rho(tau)));
    r.ip.push_back(0.0);
  }
  return r;
}

TrajectoryRecord zero_record(std::size_t samples = 50) {
  auto z = [](double) { return 0.0; };
  return synthetic(z, z, z, 1.0, samples);
}

/// rho = A + B sin(w tau) together with an energy that satisfies the energy
/// identity exactly for rho_tilde = rho_tilde0 + rho_tilde1 * tau.
struct Sinusoid {
  double A, B, w;
  TrajectoryRecord record(double T, std::size_t samples) const {
    auto rho = [=, this](double t) { return A + B * std::sin(w * t); };
    auto rt = [](double t) { return 0.3 + 0.1 * t; };
    auto e = [](double t) { return 5.0 - 2.0 * (0.3 * t + 0.05 * t * t); };
    return synthetic(rho, e, rt, T, samples);
  }
  /// Crossing times of rho = level in [0, T], sorted.
  std::vector<double> crossings(double level, double T) const {
    std::vector<double> out;
    const double x = (level - A) / B;
    if (std::abs(x) >= 1.0) return out;
    const double a = std::asin(x);
    for (int k = -2; k < 100; ++k) {
      for (double base : {a, kPi - a}) {
        const double t = (base + 2 * kPi * k) / w;
        if (t > 0.0 && t < T) out.push_back(t);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

}  // namespace

// ---------------------------------------------------------------------------

TEST(Exponents, NewtonianBoundaryValues) {
  const auto e = exponents(2.0);
  EXPECT_DOUBLE_EQ(e.zeta, 3.0);
  EXPECT_DOUBLE_EQ(e.gamma, 2.0);
  EXPECT_DOUBLE_EQ(e.lambda, 2.0);
  EXPECT_DOUBLE_EQ(e.b, 0.5);
  EXPECT_DOUBLE_EQ(e.c_interp, 0.5);
  EXPECT_DOUBLE_EQ(e.d, 0.5);
  EXPECT_FALSE(e.valid);  // p < 2 is part of the admissible range
  EXPECT_NEAR(e.beta_balance, 1.0 / 3.0, 1e-14);
}

TEST(Exponents, LowerLimit) {
  const auto e = exponents(1.8 + 1e-9);
  EXPECT_NEAR(e.zeta, 6.0, 1e-6);
  EXPECT_NEAR(e.gamma, 5.0, 1e-6);
  EXPECT_TRUE(e.valid);
}

TEST(Exponents, OutOfRangeIsFlagged) {
  const auto e = exponents(1.7);
  EXPECT_FALSE(e.valid);
  EXPECT_TRUE(e.partial_valid);
  ASSERT_FALSE(e.violations.empty());
  EXPECT_NE(e.violations.front().find("p > 9/5"), std::string::npos);
  EXPECT_FALSE(exponents(1.6).partial_valid);
  EXPECT_TRUE(exponents(1.9, 2).dimension_flag);
}

TEST(Exponents, AlternativeAlgebraAgreesToRoundoff) {
  for (double p : {1.81, 1.9, 1.99}) {
    const auto e = exponents(p);
    const long double q = p;
    // Same quantities rearranged: partial fractions in long double.
    EXPECT_NEAR(e.zeta, static_cast<double>(1.0L + 2.0L / (3.0L * q - 5.0L)), 1e-12 * e.zeta);
    EXPECT_NEAR(e.gamma, static_cast<double>(2.0L / (3.0L * q - 5.0L)), 1e-12 * e.gamma);
    EXPECT_NEAR(e.lambda, static_cast<double>(-2.0L / 3.0L + (8.0L / 3.0L) / (3.0L * q - 5.0L)), 1e-12 * e.lambda);
    EXPECT_NEAR(e.b, static_cast<double>(1.5L - 0.5L * q), 1e-12);
    EXPECT_NEAR(e.c_interp, static_cast<double>(1.0L / 3.0L + (2.0L / 9.0L) / (q - 2.0L / 3.0L)), 1e-12);
    EXPECT_NEAR(e.d, static_cast<double>(2.0L / 7.0L + (12.0L / 49.0L) / (q - 6.0L / 7.0L)), 1e-12);
    EXPECT_TRUE(e.beta_selected) << p;
    EXPECT_EQ(e.beta_variant, BetaVariant::k8pMinus9) << p;
    EXPECT_NEAR(e.beta, e.beta_balance, 1e-10 * e.beta);
    EXPECT_GT(std::abs(e.beta_8p6 - e.beta_balance), 1e-3 * e.beta);
    EXPECT_TRUE(e.violations.empty());
  }
}

TEST(Exponents, InvariantsOnAdmissibleRange) {
  for (int i = 1; i < 200; ++i) {
    const double p = 1.8 + 0.2 * i / 200.0;
    const auto e = exponents(p);
    EXPECT_GT(e.zeta, 3.0);
    EXPECT_LT(e.zeta, 6.0);
    EXPECT_GT(e.gamma, 2.0);
    EXPECT_LT(e.gamma, 5.0);
    EXPECT_GT(e.lambda, 1.0);
    EXPECT_GT(e.b, 0.5);
    EXPECT_LT(e.b, 0.6);
    EXPECT_GT(e.c_interp, 0.5);
    EXPECT_LT(e.c_interp, 9.0 / 17.0);
    EXPECT_GT(e.d, 0.5);
    EXPECT_LT(e.d, 9.0 / 16.0);
    EXPECT_GT(e.beta, 0.0);
    EXPECT_TRUE(e.beta_selected);
  }
}

// ---------------------------------------------------------------------------

TEST(WeightP, Examples) {
  EXPECT_EQ(weight_P(kPi / 4, 0.5, 2.0), 1.0);
  EXPECT_EQ(weight_P(kPi / 4, 1.0, 2.0), 1.0);  // on the threshold
  EXPECT_NEAR(weight_P(kPi / 4, std::pow(std::tan(kPi / 3), 0.5), 2.0), 2.0 / 3.0, 1e-14);
  EXPECT_LT(weight_P(kPi / 4, 1e100, 3.0), 1e-250);
  EXPECT_THROW(weight_P(kPi / 2, 1.0, 2.0), DomainError);
  EXPECT_THROW(weight_P(2.0, 1.0, 2.0), DomainError);
  EXPECT_THROW(weight_P(0.3, -1.0, 2.0), DomainError);
}

TEST(WeightP, RangeContinuityMonotonicity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.0, kPi / 2 - 1e-6), ul(-6.0, 6.0), ug(2.0, 5.0);
  for (int i = 0; i < 20000; ++i) {
    const double a = ua(rng), g = ug(rng);
    const double r1 = std::pow(10.0, ul(rng)), r2 = std::pow(10.0, ul(rng));
    const double p1 = weight_P(a, r1, g), p2 = weight_P(a, r2, g);
    EXPECT_GT(p1, 0.0);
    EXPECT_LE(p1, 1.0);
    if (r1 <= r2) {
      EXPECT_GE(p1, p2);
    }
    EXPECT_EQ(p1 == 1.0, std::pow(r1, g) <= std::tan(a));
  }
  // Continuity across the threshold.
  const double a = 1.1, g = 2.5, r = std::pow(std::tan(a), 1.0 / g);
  EXPECT_NEAR(weight_P(a, r * (1 + 1e-12), g), 1.0, 1e-10);
}

// ---------------------------------------------------------------------------

TEST(ExceedancePartition, ConstantBelowThresholdIsEmpty) {
  auto c = [](double) { return 2.0; };
  const auto rec = synthetic(c, c, c, 1.0, 20);
  const auto part = exceedance_partition(rec, 0.0, 1.0, 1.4, 2.0);  // 4 < tan(1.4)
  EXPECT_TRUE(part.empty());
  EXPECT_EQ(part.total_measure, 0.0);
  EXPECT_TRUE(part.admissible);
  EXPECT_THROW(exceedance_partition(rec, 0.5, 0.5, 1.2, 2.0), DomainError);
  EXPECT_THROW(exceedance_partition(rec, 0.7, 0.2, 1.2, 2.0), DomainError);
}

TEST(ExceedancePartition, SaturatedThresholdGivesWholeWindow) {
  auto c = [](double t) { return 3.0 + t; };
  const auto rec = synthetic(c, c, c, 1.0, 20);
  const auto part = exceedance_partition(rec, 0.1, 0.9, 0.5, 2.0);
  ASSERT_EQ(part.intervals.size(), 1u);
  EXPECT_EQ(part.intervals[0].lo, 0.1);
  EXPECT_EQ(part.intervals[0].hi, 0.9);
  EXPECT_TRUE(part.intervals[0].left_truncated);
  EXPECT_TRUE(part.intervals[0].right_truncated);
  EXPECT_FALSE(part.admissible);
  EXPECT_NEAR(part.total_measure, 0.8, 1e-15);
}

TEST(ExceedancePartition, SinusoidCrossingsMatchArcsine) {
  const Sinusoid s{4.0, 1.5, 9.0};
  const double T = 3.0, gamma = 2.5;
  const auto rec = s.record(T, 200001);
  for (double level : {3.0, 4.3, 5.2}) {
    const double alpha = std::atan(std::pow(level, gamma));
    const auto part = exceedance_partition(rec, 0.0, T, alpha, gamma);
    const auto exact = s.crossings(level, T);
    std::vector<double> ends;
    for (const auto& iv : part.intervals) {
      if (!iv.left_truncated) ends.push_back(iv.lo);
      if (!iv.right_truncated) ends.push_back(iv.hi);
    }
    ASSERT_EQ(ends.size(), exact.size()) << level;
    for (std::size_t k = 0; k < ends.size(); ++k) EXPECT_NEAR(ends[k], exact[k], 1e-8);
    for (const auto& iv : part.intervals)  // sampled check inside each interval
      for (int j = 1; j < 10; ++j) {
        const double tau = iv.lo + (iv.hi - iv.lo) * j / 10.0;
        EXPECT_GT(std::pow(4.0 + 1.5 * std::sin(9.0 * tau), gamma), std::tan(alpha));
      }
  }
}

TEST(ExceedancePartition, AgreesWithDenseScanAndNestsInAlpha) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uA(1.0, 3.0), uB(0.2, 1.0), uw(1.0, 20.0), ul(-0.9, 0.9);
  for (int trial = 0; trial < 1000; ++trial) {
    const double A = uA(rng), B = uB(rng), w = uw(rng);
    const std::size_t n = 64;  // coarse: the piecewise-linear interpolant is the object
    Sinusoid s{A, B, w};
    const auto rec = s.record(2.0, n);
    const double gamma = 3.0;
    const double level = A + B * ul(rng);
    const double alpha = std::atan(std::pow(level, gamma));
    const auto part = exceedance_partition(rec, 0.0, 2.0, alpha, gamma);
    // Dense scan of each linear piece: exact root of the piece.
    std::vector<double> ends;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double r0 = rec.rho[i], r1 = rec.rho[i + 1];
      if ((r0 > level) != (r1 > level)) ends.push_back(rec.t[i] + (level - r0) / (r1 - r0) * (rec.t[i + 1] - rec.t[i]));
    }
    std::vector<double> got;
    for (const auto& iv : part.intervals) {
      if (!iv.left_truncated) got.push_back(iv.lo);
      if (!iv.right_truncated) got.push_back(iv.hi);
    }
    ASSERT_EQ(got.size(), ends.size()) << trial;
    for (std::size_t k = 0; k < got.size(); ++k)
      EXPECT_NEAR(got[k], ends[k], 10 * kRootTolerance * (rec.t[1] - rec.t[0]) + 1e-15);
    // A higher threshold carves a subset.
    const double alpha2 = std::atan(std::pow(level + 0.1 * B, gamma));
    const auto sub = exceedance_partition(rec, 0.0, 2.0, alpha2, gamma);
    EXPECT_LE(sub.total_measure, part.total_measure);
    for (const auto& iv : sub.intervals) {
      const bool inside = std::any_of(part.intervals.begin(), part.intervals.end(),
                                      [&](const ExceedanceInterval& o) { return o.lo <= iv.lo && iv.hi <= o.hi; });
      EXPECT_TRUE(inside) << trial;
    }
  }
}

// ---------------------------------------------------------------------------

TEST(EnergyResidual, ZeroAndExactIdentity) {
  const auto z = zero_record();
  EXPECT_EQ(energy_residual(z, 0.0, 1.0), 0.0);
  // Linear rho_tilde, quadratic energy: the trapezoid integrates exactly.
  const Sinusoid s{4.0, 1.0, 3.0};
  const auto rec = s.record(2.0, 401);
  EXPECT_LE(energy_residual(rec, 0.0, 2.0), 1e-13);
  EXPECT_LE(energy_residual(rec, 0.3, 1.7), 1e-13);  // off-sample endpoints
  EXPECT_THROW(energy_residual(rec, 0.0, 3.0), DomainError);
}

TEST(EnergyResidual, CorruptingOneSampleShiftsByDelta) {
  const Sinusoid s{4.0, 1.0, 3.0};
  auto rec = s.record(2.0, 401);
  const double before = energy_residual(rec, 0.0, 2.0);
  const double delta = 1e-3;
  rec.energy.back() += delta;
  EXPECT_NEAR(energy_residual(rec, 0.0, 2.0) - before, delta, 1e-15);
}

TEST(WeightedEnergyResidual, ReducesWhenPartitionEmpty) {
  const Sinusoid s{4.0, 1.0, 3.0};
  const auto rec = s.record(2.0, 401);
  const double alpha = std::atan(std::pow(6.0, 2.5));
  EXPECT_NEAR(weighted_energy_residual(rec, 0.0, 2.0, alpha, 2.5), energy_residual(rec, 0.0, 2.0), 1e-14);
  EXPECT_EQ(weighted_energy_residual(zero_record(), 0.0, 1.0, 1.0, 2.5), 0.0);
}

TEST(WeightedEnergyResidual, IdentityHoldsOnConsistentSyntheticData) {
  const Sinusoid s{4.0, 1.0, 3.0};
  for (std::size_t n : {2001u, 8001u}) {
    const auto rec = s.record(2.0, n);
    for (double level : {3.5, 4.5}) {
      const double alpha = std::atan(std::pow(level, 2.5));
      const double r = weighted_energy_residual(rec, 0.0, 2.0, alpha, 2.5);
      EXPECT_LE(r, 1e-5 * rec.energy.front()) << n << " " << level;
    }
  }
}

TEST(WeightedEnergyResidual, ResolvedGalerkinRun) {
  const TorusGrid g(2, 2 * kPi, 16);
  auto basis = std::make_shared<const StokesBasis>(make_basis(g, max_basis_size(g)));
  const auto init = project_initial_data(taylor_green(g, 1.0), basis);
  TimeSpec ts;
  ts.t_end = 1.0;
  ts.sample_dt = 1e-3;
  const auto run = run_trajectory(init, FluidParams(1.9, 1.0), ts);
  const double gamma = exponents(1.9).gamma;
  const double e0 = run.record.energy.front();
  EXPECT_LE(energy_residual(run.record, 0.0, 1.0), 1e-6 * e0);
  for (double alpha : {kPi / 3, kPi / 2 - 1e-3}) {
    EXPECT_LE(weighted_energy_residual(run.record, 0.0, 1.0, alpha, gamma), 1e-5 * e0) << alpha;
  }
}

// ---------------------------------------------------------------------------

TEST(GapEstimate, NeedsTwoRecords) {
  const auto z = zero_record();
  EXPECT_THROW(gap_estimate({&z}, 0.0, 1.0, {1.0}, 2.5), InsufficientFamilyError);
  EXPECT_THROW(gap_estimate({}, 0.0, 1.0, {1.0}, 2.5), InsufficientFamilyError);
}

TEST(GapEstimate, EmptyPartitionsGiveZero) {
  const Sinusoid s{4.0, 1.0, 3.0};
  const auto a = s.record(2.0, 401), b = s.record(2.0, 801);
  std::vector<double> alphas;
  for (double lvl : {6.0, 7.0, 8.0}) alphas.push_back(std::atan(lvl * lvl * lvl));
  const auto g = gap_estimate({&a, &b}, 0.0, 2.0, alphas, 3.0);
  EXPECT_EQ(g.m_estimate, 0.0);
  EXPECT_TRUE(g.m_stable);
  EXPECT_EQ(g.final_j_measure, 0.0);
}

TEST(GapEstimate, TwoFormsAndReport) {
  const Sinusoid s{4.0, 1.0, 3.0};
  auto a = s.record(2.0, 401), b = s.record(2.0, 801);
  a.n_modes = 10;
  b.n_modes = 20;
  b.energy[300] += 1e-4;  // a small genuine residual
  const double gamma = 2.5;
  std::vector<double> alphas;
  for (double lvl : {3.2, 3.8, 4.4, 4.9, 4.99, 5.5}) alphas.push_back(std::atan(std::pow(lvl, gamma)));
  const auto g = gap_estimate({&b, &a}, 0.0, 2.0, alphas, gamma);
  EXPECT_LE(g.max_consistency_excess, 1e-15);
  EXPECT_TRUE(g.j_measure_monotone);
  EXPECT_EQ(g.final_j_measure, 0.0);
  for (const auto& row : g.rows) {
    ASSERT_EQ(row.per_n.size(), 2u);
    EXPECT_EQ(row.per_n[0].n_modes, 10u);  // sorted by N
    for (const auto& e : row.per_n) {
      EXPECT_GE(e.dissipation_form, 0.0);
      EXPECT_LE(std::abs(e.dissipation_form - e.jump_form), e.residual_on_J + 1e-15);
    }
  }
  const auto j = to_json(g);
  for (const char* key : {"M_estimate", "s", "t", "gamma", "zeta", "beta_variant_used", "alphas"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["beta_variant_used"], "8p-9");
  const auto& row = j["alphas"][0];
  for (const char* key : {"alpha", "per_N", "limsup_dissipation"}) EXPECT_TRUE(row.contains(key)) << key;
  for (const char* key : {"N", "dissipation_form", "jump_form", "J_measure", "intervals"})
    EXPECT_TRUE(row["per_N"][0].contains(key)) << key;
}

// ---------------------------------------------------------------------------

TEST(Lemma5, ZeroAndMonotone) {
  EXPECT_EQ(lemma5_functional(zero_record(), 4.0), 0.0);
  const double zeta = exponents(1.9).zeta;
  auto rho = [](double t) { return 40.0 * std::exp(-3.0 * t); };
  auto z = [](double) { return 0.0; };
  const auto rec = synthetic(rho, z, z, 1.0, 2001);
  const double exact = (std::pow(1 + rho(1.0), 1 - zeta) - std::pow(1 + rho(0.0), 1 - zeta)) / (zeta - 1);
  const double bound = lemma5_monotone_bound(rec, zeta);
  EXPECT_NEAR(bound, exact, 1e-14);
  const double v = lemma5_functional(rec, zeta);
  EXPECT_LE(v, bound + lemma5_quadrature_slack(rec, zeta));
  EXPECT_NEAR(v, exact, 1e-4 * exact);
}

TEST(Lemma5, OscillatingRhoSplitsIntoMonotoneRuns) {
  const Sinusoid s{4.0, 1.0, 3.0};
  const auto rec = s.record(2 * kPi, 20001);
  const double zeta = 4.0;
  // 4 -> 5, five full swings between 5 and 3, then 3 -> 4.
  auto F = [zeta](double r) { return std::pow(1 + r, 1 - zeta) / (zeta - 1); };
  const double exact = (F(4.0) - F(5.0)) + 5 * (F(3.0) - F(5.0)) + (F(3.0) - F(4.0));
  const double bound = lemma5_monotone_bound(rec, zeta);
  EXPECT_NEAR(bound, exact, 1e-6 * exact);
  EXPECT_LE(lemma5_functional(rec, zeta), bound + lemma5_quadrature_slack(rec, zeta));
}

// ---------------------------------------------------------------------------

TEST(MeasureBound, TrivialAndExcursion) {
  const double gamma = 2.5, beta = exponents(1.9).beta;
  const Sinusoid s{4.0, 1.0, 3.0};
  const auto rec = s.record(2.0, 4001);
  const auto big = std::atan(std::pow(6.0, gamma));
  auto rep = measure_bound_check({&rec}, 0.0, 2.0, {big}, beta, gamma);
  EXPECT_EQ(rep.rows[0].measure, 0.0);
  EXPECT_EQ(rep.violations, 0u);
  std::vector<double> alphas;
  for (double lvl : {3.1, 3.5, 4.0, 4.5, 4.9}) alphas.push_back(std::atan(std::pow(lvl, gamma)));
  rep = measure_bound_check({&rec}, 0.0, 2.0, alphas, beta, gamma);
  EXPECT_EQ(rep.violations, 0u);
  for (const auto& r : rep.rows) {
    EXPECT_GT(r.measure, 0.0);
    EXPECT_LT(r.measure, r.bound);
  }
}

TEST(MeasureBound, PowerTailSlope) {
  const auto ex = exponents(1.9);
  const double beta = ex.beta, gamma = ex.gamma;
  // rho = tau^(-a), so |{rho^gamma > T}| = T^(-1/(a gamma)); a < 2/beta keeps
  // the tail at least as steep as predicted.
  const double a = 1.5 / beta;
  TrajectoryRecord rec;
  rec.n_modes = 1;
  for (int i = 0; i <= 12000; ++i) {
    const double tau = std::pow(10.0, -6.0 + 6.0 * i / 12000.0);
    rec.t.push_back(tau);
    rec.rho.push_back(std::pow(tau, -a));
    rec.energy.push_back(0.0);
    rec.rho_tilde.push_back(0.0);
    rec.grad_p_norm.push_back(0.0);
    rec.ip.push_back(0.0);
  }
  std::vector<double> alphas, measures;
  for (double lt = 4.0; lt <= 12.0; lt += 1.0) alphas.push_back(std::atan(std::pow(10.0, lt)));
  const auto rep = measure_bound_check({&rec}, rec.t.front(), 1.0, alphas, beta, gamma);
  EXPECT_EQ(rep.violations, 0u);
  for (const auto& r : rep.rows) measures.push_back(r.measure);
  const double slope = tail_slope(alphas, measures);
  EXPECT_NEAR(slope, -1.0 / (a * gamma), 1e-3);
  EXPECT_LE(slope, rep.predicted_slope);
}
