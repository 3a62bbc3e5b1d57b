#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "plsf/inequality_lab.hpp"
#include "plsf/initial_data.hpp"
#include "plsf/trajectory.hpp"

using namespace plsf;

namespace {

constexpr double kPi = std::numbers::pi;

FieldEnsemble ensemble(std::uint64_t seed, std::size_t count, int dim = 2, double length = 1.0) {
  EnsembleSpec s;
  s.dim = dim;
  s.resolution = dim == 2 ? 16 : 8;
  s.length = length;
  s.band = dim == 2 ? 6.0 : 3.0;
  s.seed = seed;
  s.count = count;
  return make_ensemble(s);
}

/// Ensemble holding the given fields instead of random ones.
FieldEnsemble custom(const TorusGrid& g, std::vector<SpectralVelocity> samples) {
  FieldEnsemble e;
  e.grid = g;
  e.samples = std::move(samples);
  e.spec.count = e.samples.size();
  return e;
}

}  // namespace

TEST(FieldEnsemble, ReproducibleAndSeedDependent) {
  const auto a = ensemble(3, 4), b = ensemble(3, 4), c = ensemble(4, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto ka = a.samples[i].field().component(0);
    const auto kb = b.samples[i].field().component(0);
    for (std::size_t j = 0; j < ka.size(); ++j) ASSERT_EQ(ka[j], kb[j]);
    EXPECT_LE(a.samples[i].field().divergence_defect(), 1e-12);
  }
  EXPECT_NE(inner_product(a.samples[1], a.samples[2]), inner_product(c.samples[1], c.samples[2]));
  EnsembleSpec bad;
  bad.band = 9.0;
  EXPECT_THROW(make_ensemble(bad), DomainError);
}

TEST(Lemma1, ZeroFieldSkippedAndSingleMode) {
  const TorusGrid g(2, 1.3, 16);
  const auto basis = make_basis(g, 1);
  const auto r = check_lemma1(custom(g, {SpectralVelocity(g), basis.field(0)}), 2.0);
  EXPECT_EQ(r.skipped, 1u);
  ASSERT_EQ(r.count(), 1u);
  const double k = 2 * kPi / 1.3;
  EXPECT_NEAR(r.lhs[0] / r.rhs[0], (1 + k) / (k * k), 1e-12);
}

TEST(Lemma1, FrozenConstantCoversFreshEnsemble) {
  const auto a = check_lemma1(ensemble(100, 1000), 1.9);
  const auto b = check_lemma1(ensemble(5000, 1000), 1.9, 2.0 * a.empirical_C);
  EXPECT_EQ(b.violations, 0u);
  EXPECT_LE(constant_spread(a.empirical_C, b.empirical_C), 0.2);
  EXPECT_GT(a.empirical_C, 0.0);
}

TEST(Friedrichs, SingleBasisField) {
  const TorusGrid g(2, 1.0, 16);
  const auto basis = make_basis(g, 1);
  const auto fr = check_friedrichs(custom(g, {basis.field(0)}), 1.5, 1e-3);
  EXPECT_EQ(fr.kappa, 1u);
  EXPECT_EQ(fr.report.violations, 0u);
}

TEST(Friedrichs, KappaGrowsAsEpsilonShrinks) {
  const auto ens = ensemble(7, 200);
  std::size_t prev = 0;
  for (double eps : {1.0, 0.5, 0.25, 0.125, 1e-2, 1e-3}) {
    const auto fr = check_friedrichs(ens, 1.6, eps);
    EXPECT_GE(fr.kappa, prev) << eps;
    EXPECT_EQ(fr.report.violations, 0u);
    prev = fr.kappa;
  }
  EXPECT_GT(prev, 1u);
}

TEST(Friedrichs, BoundaryExponentTerminates) {
  const auto fr = check_friedrichs(ensemble(9, 50), 1.2 + 1e-6, 1e-6);
  EXPECT_LE(fr.kappa, fr.band_size);
  EXPECT_EQ(fr.report.violations, 0u);
  EXPECT_THROW(check_friedrichs(ensemble(9, 1), 1.2, 0.1), DomainError);
  EXPECT_THROW(check_friedrichs(ensemble(9, 1), 1.5, 0.0), DomainError);
}

TEST(Lemma3, ZeroFieldValues) {
  for (double L : {1.0, 2.0}) {
    const TorusGrid g(2, L, 16);
    const auto r = check_lemma3(custom(g, {SpectralVelocity(g)}), FluidParams(1.85, 0.3));
    EXPECT_EQ(r.sd1.skipped, 1u);
    ASSERT_EQ(r.sd4.count(), 1u);
    EXPECT_NEAR(r.sd4.lhs[0] / r.sd4.rhs[0], std::pow(L, 1.0), 1e-12);  // L^(d/2), d = 2
    EXPECT_EQ(r.sd2.lhs[0], 0.0);
  }
  const TorusGrid g(2, 1.0, 16);
  EXPECT_THROW(check_lemma3(custom(g, {}), FluidParams(1.85, 0.0)), DomainError);
}

TEST(Lemma3, NewtonianLimitOfSD1) {
  // Divergence-free: ||grad D u||_2^2 = ||D^2 u||_2^2 / 2, so the ratio tends to sqrt(2).
  const auto ens = ensemble(12, 20);
  const auto r = check_lemma3(ens, FluidParams(2.0 - 1e-9, 1.0));
  for (std::size_t i = 0; i < r.sd1.count(); ++i) EXPECT_NEAR(r.sd1.lhs[i] / r.sd1.rhs[i], std::sqrt(2.0), 1e-6);
}

TEST(Lemma3, ConstantsStableAcrossEnsemblesAndMu) {
  std::vector<double> c1, c4, c2;
  for (double mu : {1e-2, 1.0, 1e2}) {
    const FluidParams fp(1.85, mu);
    const auto a = check_lemma3(ensemble(21, 1000), fp);
    const auto b = check_lemma3(ensemble(7021, 1000), fp);
    EXPECT_LE(constant_spread(a.sd1.empirical_C, b.sd1.empirical_C), 0.2) << mu;
    EXPECT_LE(constant_spread(a.sd4.empirical_C, b.sd4.empirical_C), 0.2) << mu;
    EXPECT_LE(constant_spread(a.sd2.empirical_C, b.sd2.empirical_C), 0.2) << mu;
    c1.push_back(a.sd1.empirical_C);
    c4.push_back(a.sd4.empirical_C);
    c2.push_back(a.sd2.empirical_C);
  }
  EXPECT_LT(family_spread(c1), 2.0);
  EXPECT_LT(family_spread(c4), 2.0);
  EXPECT_LT(family_spread(c2), 2.0);
}

TEST(Interpolation, SingleModeNewtonianExponents) {
  const TorusGrid g(2, 1.0, 16);
  const auto basis = make_basis(g, 5);
  const auto r = check_interpolations(custom(g, {basis.field(4)}), 2.0);
  EXPECT_LE(r.c1.lhs[0], r.c1.rhs[0] * (1 + 1e-12));  // b = 1/2 at p = 2: L3 <= L6^(1/2) L2^(1/2)
  EXPECT_LE(r.c2.lhs[0], r.c2.rhs[0] * (1 + 1e-12));
  EXPECT_FALSE(r.c1.notes.empty());
  const auto z = check_interpolations(custom(g, {SpectralVelocity(g)}), 1.9);
  EXPECT_EQ(z.c1.lhs[0], 0.0);
  EXPECT_EQ(z.c1.rhs[0], 0.0);
  EXPECT_EQ(z.c1.violations, 0u);
}

TEST(Interpolation, HoelderNeverViolated) {
  for (int dim : {2, 3}) {
    const auto r = check_interpolations(ensemble(40 + dim, dim == 2 ? 1000 : 200, dim), 1.9);
    EXPECT_EQ(r.c1.violations, 0u);
    EXPECT_EQ(r.c2.violations, 0u);
    EXPECT_LE(r.c1.worst_ratio, 1.0 + kInterpolationSlack);
    EXPECT_LE(r.c2.worst_ratio, 1.0 + kInterpolationSlack);
    EXPECT_TRUE(std::isfinite(r.d.empirical_C));
    EXPECT_EQ(r.d.violations, 0u);
  }
}

TEST(Ap3, ZeroStateAndNewtonianSingleMode) {
  const TorusGrid g(2, 1.0, 16);
  const auto z = check_ap3(custom(g, {SpectralVelocity(g)}), FluidParams(1.9, 1.0), 20);
  EXPECT_EQ(z.lhs[0], 0.0);
  EXPECT_EQ(z.rhs[0], 0.0);
  EXPECT_EQ(z.violations, 0u);
  // p = 2 single mode: (1/2) rho' = -lambda^2 c^2 / 2 and I_2 = lambda^2 c^2 / 2
  // cancel; the right side is (c A |k|)^3 L^d 4/(3 pi).
  const auto basis = make_basis(g, 1);
  const double c = 0.7;
  auto v = basis.field(0).field();
  v *= c;
  const auto r = check_ap3(custom(g, {SpectralVelocity(v)}), FluidParams(2.0, 1.0), 1);
  const double k = 2 * kPi;
  EXPECT_NEAR(r.lhs[0], 0.0, 1e-10 * k * k * k * k);
  const double amp = std::sqrt(2.0);
  // |cos|^3 is only C^2 at its zeros, so the trapezoid sum is accurate to O(h^4).
  EXPECT_NEAR(r.rhs[0], std::pow(c * amp * k, 3) * 4.0 / (3.0 * kPi), 1e-4 * r.rhs[0]);
  EXPECT_LT(r.lhs[0], r.rhs[0]);
}

TEST(Ap3, RandomStatesSatisfyInequality) {
  const auto r = check_ap3(ensemble(77, 1000), FluidParams(1.9, 1.0), 0);
  EXPECT_EQ(r.count(), 1000u);
  EXPECT_EQ(r.violations, 0u);
  const auto r3 = check_ap3(ensemble(78, 100, 3), FluidParams(1.9, 0.1), 0);
  EXPECT_EQ(r3.violations, 0u);
}

TEST(OoIdentity, RandomTensorsWithinTolerance) {
  const auto r = check_oo(10000, 1);
  EXPECT_EQ(r.count(), 10000u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_LE(r.worst_ratio, 1.0);
}

TEST(ClI, MissingChannelAndZeroData) {
  TrajectoryRecord rec;
  rec.t = {0.0, 1.0};
  rec.rho = rec.energy = rec.rho_tilde = rec.grad_p_norm = rec.ip = {0.0, 0.0};
  rec.p = 1.9;
  EXPECT_THROW(check_cl_i({&rec}), ConfigError);
  rec.d2_p_norm = {0.0, 0.0};
  const auto r = check_cl_i({&rec, &rec});
  EXPECT_EQ(r.integral_8p9[0], 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(ClI, UniformAcrossResolvedFamily) {
  const TorusGrid g(2, 2 * kPi, 16);
  const auto v0 = random_band(g, {3.0, 2.0, 1.0, 5});
  TimeSpec ts;
  ts.t_end = 0.5;
  ts.sample_dt = 0.01;
  ts.record_d2 = true;
  std::vector<TrajectoryRecord> recs;
  for (std::size_t n : {std::size_t{40}, std::size_t{80}, max_basis_size(g)}) {
    auto basis = std::make_shared<const StokesBasis>(make_basis(g, n));
    recs.push_back(run_trajectory(project_initial_data(v0, basis), FluidParams(1.9, 1.0), ts).record);
  }
  const auto r = check_cl_i({&recs[0], &recs[1], &recs[2]});
  EXPECT_TRUE(r.pass) << r.spread;
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(std::isfinite(r.integral_8p9[i]));
    EXPECT_TRUE(std::isfinite(r.integral_8p6[i]));
    EXPECT_GT(r.integral_8p9[i], 0.0);
  }
  EXPECT_EQ(to_json(r)["beta_variant_used"], "8p-9");
}
