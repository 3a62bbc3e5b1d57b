#ifndef PLSF_INITIAL_DATA_HPP
#define PLSF_INITIAL_DATA_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "plsf/basis.hpp"
#include "plsf/field.hpp"
#include "plsf/operators.hpp"

namespace plsf {

/// Taylor-Green vortex with unit wavenumber in each direction, x' = 2 pi x / L:
///   2D: A (sin x' cos y', -cos x' sin y')
///   3D: A (sin x' cos y' cos z', -cos x' sin y' cos z', 0)
inline SpectralVelocity taylor_green(const TorusGrid& g, double amplitude = 1.0) {
  const double u = g.wavenumber_unit();
  const bool three = g.dim() == 3;
  auto f = sample_vector_field(g, [&](const std::array<double, 3>& x) {
    const double cz = three ? std::cos(u * x[2]) : 1.0;
    return std::array<double, 3>{amplitude * std::sin(u * x[0]) * std::cos(u * x[1]) * cz,
                                 -amplitude * std::cos(u * x[0]) * std::sin(u * x[1]) * cz, 0.0};
  });
  return leray_project(f);
}

/// Parameters of the random band-limited generator.
struct RandomBandSpec {
  double band = 4.0;       // keep 0 < |n| <= band
  double decay = 2.0;      // coefficient std ~ |n|^(-decay)
  double amplitude = 1.0;  // target rms velocity sqrt(||v||^2 / |Omega|)
  std::uint64_t seed = 0;
};

/// Independent complex Gaussian coefficients with power-law decay, Leray
/// projected and rescaled to the requested rms amplitude.  Deterministic in
/// (grid, spec).
inline SpectralVelocity random_band(const TorusGrid& g, const RandomBandSpec& spec) {
  if (!(spec.band > 0.0)) throw DomainError("random_band: band must be positive");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralVectorField f(g);
  const double b2 = spec.band * spec.band;
  for (const auto& n : detail::ordered_representatives(g)) {
    const int nn = norm_squared(n);
    if (nn > b2 * (1.0 + 1e-12)) break;
    const double s = std::pow(static_cast<double>(nn), -0.5 * spec.decay);
    for (int c = 0; c < g.dim(); ++c) {
      const double re = normal(rng);
      const double im = normal(rng);
      const Complex z{s * re, s * im};
      f.at(c, n) = z;
      f.at(c, negate(n)) = std::conj(z);
    }
  }
  SpectralVelocity v = leray_project(f);
  const double e = v.energy();
  if (e == 0.0 || spec.amplitude == 0.0) return SpectralVelocity(g);
  SpectralVectorField scaled = v.field();
  scaled *= spec.amplitude * std::sqrt(g.volume() / e);
  return SpectralVelocity(std::move(scaled));
}

}  // namespace plsf

#endif  // PLSF_INITIAL_DATA_HPP
