#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "plsf/galerkin.hpp"
#include "plsf/initial_data.hpp"
#include "plsf/integrator.hpp"

using namespace plsf;

namespace {

std::shared_ptr<const StokesBasis> basis_of(const TorusGrid& g, std::size_t n) {
  return std::make_shared<const StokesBasis>(make_basis(g, n));
}

std::vector<double> random_coeffs(std::size_t n, unsigned seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> c(n);
  for (auto& x : c) x = d(rng);
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST(ProjectInitialData, BasisVectorAndOrthogonalData) {
  const TorusGrid g(2, 1.0, 16);
  auto b = basis_of(g, 12);
  const auto s = project_initial_data(b->field(0), b);
  EXPECT_NEAR(s.coeffs[0], 1.0, 1e-14);
  for (std::size_t r = 1; r < s.size(); ++r) EXPECT_NEAR(s.coeffs[r], 0.0, 1e-14);
  // A mode outside the first 12 projects to zero.
  auto big = basis_of(g, 40);
  const auto z = project_initial_data(big->field(39), b);
  for (double c : z.coeffs) EXPECT_NEAR(c, 0.0, 1e-14);
  const TorusGrid h(2, 1.0, 8);
  EXPECT_THROW(project_initial_data(SpectralVelocity(h), b), ShapeError);
}

TEST(ProjectInitialData, FullBandRoundTripAndBessel) {
  const TorusGrid g(2, 1.0, 16);
  const auto v0 = random_band(g, {8.0, 1.0, 1.0, 3});
  auto full = basis_of(g, max_basis_size(g));
  const auto s = project_initial_data(v0, full);
  const auto back = s.velocity();
  double err = 0.0;
  for (std::size_t i = 0; i < back.field().coefficients().size(); ++i)
    err = std::max(err, std::abs(back.field().coefficients()[i] - v0.field().coefficients()[i]));
  EXPECT_LE(err, 1e-10 * v0.field().max_abs());
  auto part = basis_of(g, 50);
  const auto sp = project_initial_data(v0, part);
  EXPECT_LE(dot(sp.coeffs, sp.coeffs), v0.energy() * (1 + 1e-14));
  // nesting: first 50 coefficients agree
  for (std::size_t r = 0; r < 50; ++r) EXPECT_EQ(sp.coeffs[r], s.coeffs[r]);
}

TEST(GalerkinRhs, ZeroState) {
  const TorusGrid g(3, 1.0, 8);
  auto b = basis_of(g, 30);
  GalerkinSystem sys(b, FluidParams(1.9, 1.0));
  for (double x : sys.rhs(std::vector<double>(30, 0.0))) EXPECT_EQ(x, 0.0);
  // mu = 0: the degenerate stress extension keeps the zero state at rest.
  GalerkinSystem sys0(b, FluidParams(1.5, 0.0));
  for (double x : sys0.rhs(std::vector<double>(30, 0.0))) EXPECT_EQ(x, 0.0);
}

TEST(GalerkinRhs, NewtonianSingleMode) {
  for (int dim : {2, 3}) {
    const TorusGrid g(dim, 1.7, 8);
    auto b = basis_of(g, 1);
    GalerkinSystem sys(b, FluidParams(2.0, 0.3));
    const std::vector<double> c{0.8};
    const double k2 = (*b)[0].eigenvalue;
    EXPECT_NEAR(sys.rhs(c)[0], -0.5 * k2 * 0.8, 1e-12 * k2);
  }
}

TEST(GalerkinRhs, NewtonianDiagonalForEveryMode) {
  const TorusGrid g(2, 1.0, 16);
  auto b = basis_of(g, 60);
  GalerkinSystem sys(b, FluidParams(2.0, 1.0));
  const auto c = random_coeffs(60, 2, 1e-9);  // tiny: convection negligible
  const auto r = sys.rhs(c, GalerkinSystem::Terms::kStressOnly);
  for (std::size_t i = 0; i < 60; ++i) EXPECT_NEAR(r[i], -0.5 * (*b)[i].eigenvalue * c[i], 1e-20);
}

TEST(GalerkinRhs, ConvectionIsEnergyNeutral) {
  for (int dim : {2, 3}) {
    const TorusGrid g(dim, 1.0, dim == 2 ? 16 : 8);
    auto b = basis_of(g, dim == 2 ? 120 : 200);
    GalerkinSystem sys(b, FluidParams(1.9, 1.0));
    const auto c = random_coeffs(b->size(), 5 + dim);
    const auto conv = sys.rhs(c, GalerkinSystem::Terms::kConvectionOnly);
    double scale = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) scale += std::abs(c[i] * conv[i]);
    EXPECT_LE(std::abs(dot(c, conv)), 1e-12 * scale);
  }
}

TEST(GalerkinRhs, SemiDiscreteEnergyLaw) {
  for (int dim : {2, 3}) {
    for (double p : {1.81, 1.9, 2.0}) {
      const TorusGrid g(dim, 1.3, dim == 2 ? 16 : 8);
      auto b = basis_of(g, dim == 2 ? 150 : 250);
      GalerkinSystem sys(b, FluidParams(p, 0.7));
      const auto c = random_coeffs(b->size(), 17);
      const auto r = sys.rhs(c);
      const double rt = sys.functionals(c, false).rho_tilde;
      EXPECT_NEAR(-2.0 * dot(c, r), 2.0 * rt, 1e-9 * rt) << "dim " << dim << " p " << p;
      // Cross-check the functional against the field-level definition.
      EXPECT_NEAR(rt, rho_tilde(b->synthesize(c), FluidParams(p, 0.7)), 1e-12 * rt);
    }
  }
}

TEST(GalerkinRhs, StressTermMatchesFieldLevelPairing) {
  // -(sigma(Dv), D a^r) computed directly with the field operators.
  const TorusGrid g(2, 1.0, 16);
  auto b = basis_of(g, 24);
  const FluidParams fp(1.85, 0.4);
  GalerkinSystem sys(b, fp);
  const auto c = random_coeffs(24, 31);
  const auto r = sys.rhs(c, GalerkinSystem::Terms::kStressOnly);
  const auto s = stress(sym_gradient(b->synthesize(c)), fp);
  for (std::size_t i = 0; i < 24; ++i) {
    const double direct = -inner_product(s, sym_gradient(b->field(i)));
    EXPECT_NEAR(r[i], direct, 1e-11 * std::max(1.0, std::abs(direct)));
  }
}

TEST(Functionals, MatchFieldLevelDefinitions) {
  const TorusGrid g(3, 1.0, 8);
  auto b = basis_of(g, 120);
  const FluidParams fp(1.9, 0.5);
  GalerkinSystem sys(b, fp);
  const auto c = random_coeffs(120, 4, 0.3);
  const auto v = b->synthesize(c);
  const auto f = sys.functionals(c, true);
  EXPECT_NEAR(f.energy, v.energy(), 1e-12 * f.energy);
  const double rho = std::pow(lp_norm(gradient(v.field()), 2.0), 2);
  EXPECT_NEAR(f.rho, rho, 1e-10 * rho);
  EXPECT_NEAR(f.grad_p_norm, lp_norm(gradient(v.field()), 1.9), 1e-12 * f.grad_p_norm);
  EXPECT_NEAR(f.ip, ip_functional(v, fp), 1e-11 * f.ip);
  EXPECT_NEAR(f.d2_p_norm, lp_norm(second_derivatives(v.field()), 1.9), 1e-12 * f.d2_p_norm);
  EXPECT_NEAR(sys.grad_lq_norm(c, 3.0), lp_norm(gradient(v.field()), 3.0), 1e-12 * f.grad_p_norm);
  EXPECT_TRUE(std::isnan(GalerkinSystem(b, FluidParams(1.9, 0.0)).functionals(c, false).ip));
}

TEST(DormandPrince, ZeroStateStaysZero) {
  auto rhs = [](double, std::span<const double> y, std::span<double> dy) {
    for (std::size_t i = 0; i < y.size(); ++i) dy[i] = -3.0 * y[i];
  };
  DormandPrince45 dp(rhs, StepControl{});
  dp.reset(0.0, std::vector<double>(4, 0.0));
  dp.advance_to(2.0);
  EXPECT_EQ(dp.time(), 2.0);
  for (double y : dp.state()) EXPECT_EQ(y, 0.0);
  dp.step_fixed(0.7);
  for (double y : dp.state()) EXPECT_EQ(y, 0.0);
}

TEST(DormandPrince, ExponentialDecayWithinTolerance) {
  const double lam = 7.3;
  auto rhs = [lam](double, std::span<const double> y, std::span<double> dy) { dy[0] = -lam * y[0]; };
  for (double rtol : {1e-6, 1e-8, 1e-10}) {
    StepControl ctl;
    ctl.rtol = rtol;
    DormandPrince45 dp(rhs, ctl);
    dp.reset(0.0, std::vector<double>{1.0});
    dp.advance_to(1.0);
    const double exact = std::exp(-lam);
    EXPECT_NEAR(dp.state()[0], exact, 10 * rtol * exact);
    EXPECT_GT(dp.stats().accepted, 0u);
  }
}

TEST(DormandPrince, FifthOrderConvergence) {
  auto rhs = [](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0] + 0.1 * std::cos(t);
  };
  auto solve = [&](int steps) {
    DormandPrince45 dp(rhs, StepControl{});
    dp.reset(0.0, std::vector<double>{1.0, 0.0});
    for (int i = 0; i < steps; ++i) dp.step_fixed(2.0 / steps);
    return std::vector<double>(dp.state().begin(), dp.state().end());
  };
  const auto ref = solve(4096);
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const auto y = solve(n);
    const double err = std::hypot(y[0] - ref[0], y[1] - ref[1]);
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 24.0);  // 2^5 = 32 in the asymptotic range
    }
    prev = err;
  }
}

TEST(DormandPrince, UnderflowRaisesStiffnessError) {
  auto rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = -1e12 * (y[0] - 1.0) * (y[0] - 1.0) * (y[0] - 1.0) + 1e9;
  };
  StepControl ctl;
  ctl.dt_min = 1e-3;
  ctl.dt_initial = 1e-2;
  DormandPrince45 dp(rhs, ctl);
  dp.reset(0.0, std::vector<double>{0.0});
  try {
    dp.advance_to(1.0);
    FAIL() << "expected StiffnessError";
  } catch (const StiffnessError& e) {
    EXPECT_LT(e.step(), 1e-3);
    EXPECT_GE(e.time(), 0.0);
  }
}
