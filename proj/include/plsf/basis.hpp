#ifndef PLSF_BASIS_HPP
#define PLSF_BASIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "plsf/field.hpp"
#include "plsf/operators.hpp"

namespace plsf {

/// One real Stokes eigenfunction on the torus:
///   a(x) = A e cos(k.x)   or   a(x) = A e sin(k.x),   A = sqrt(2 / L^d),
/// with e a unit polarization orthogonal to k.  -Laplace a = |k|^2 a.
struct BasisMode {
  WaveIndex wave{0, 0, 0};            // half-space representative n
  int polarization = 0;               // 0 .. d-2
  bool sine = false;                  // cosine first, then sine
  double eigenvalue = 0.0;            // |k|^2
  std::array<double, 3> direction{};  // unit polarization e
};

namespace detail {

inline std::array<double, 3> polarization(const WaveIndex& n, int dim, int which) {
  auto normalize = [](std::array<double, 3> v) {
    const double l = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return std::array<double, 3>{v[0] / l, v[1] / l, v[2] / l};
  };
  const std::array<double, 3> k{double(n[0]), double(n[1]), double(n[2])};
  if (dim == 2) return normalize({-k[1], k[0], 0.0});
  // e1 = k x z unless k is parallel to z, where e1 = k x x; e2 = khat x e1.
  std::array<double, 3> e1 = (n[0] != 0 || n[1] != 0) ? std::array<double, 3>{k[1], -k[0], 0.0}
                                                      : std::array<double, 3>{0.0, k[2], -k[1]};
  e1 = normalize(e1);
  if (which == 0) return e1;
  const auto kh = normalize(k);
  return normalize({kh[1] * e1[2] - kh[2] * e1[1], kh[2] * e1[0] - kh[0] * e1[2],
                    kh[0] * e1[1] - kh[1] * e1[0]});
}

// Half-space representatives ordered by |n|^2, then lexicographically.
inline std::vector<WaveIndex> ordered_representatives(const TorusGrid& g) {
  std::vector<WaveIndex> reps;
  for (std::size_t idx = 0; idx < g.retained_count(); ++idx) {
    const auto n = g.retained_wave(idx);
    if (is_half_space_representative(n)) reps.push_back(n);
  }
  std::sort(reps.begin(), reps.end(), [](const WaveIndex& a, const WaveIndex& b) {
    const int na = norm_squared(a), nb = norm_squared(b);
    if (na != nb) return na < nb;
    return a < b;
  });
  return reps;
}

}  // namespace detail

/// Number of real solenoidal modes the grid can represent: (d-1) polarizations
/// times {cos, sin} for each +-n pair.
inline std::size_t max_basis_size(const TorusGrid& g) {
  return (g.retained_count() - 1) * static_cast<std::size_t>(g.dim() - 1);
}

/// The first N Stokes eigenfunctions a^1..a^N in the deterministic order
/// (eigenvalue, wavevector, polarization, cos before sin).
class StokesBasis {
 public:
  StokesBasis(const TorusGrid& grid, std::vector<BasisMode> modes)
      : grid_(grid), modes_(std::move(modes)), amplitude_(std::sqrt(2.0 / grid.volume())) {}

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return modes_.size(); }
  bool empty() const noexcept { return modes_.empty(); }
  const BasisMode& operator[](std::size_t r) const noexcept { return modes_[r]; }
  std::span<const BasisMode> modes() const noexcept { return modes_; }
  /// Normalisation A with ||a^r||_2 = 1.
  double amplitude() const noexcept { return amplitude_; }

  /// Complex coefficient of a^r at its representative wavevector +n; the
  /// coefficient at -n is the conjugate.
  Complex coefficient(std::size_t r) const noexcept {
    return modes_[r].sine ? Complex{0.0, -0.5 * amplitude_} : Complex{0.5 * amplitude_, 0.0};
  }

  /// sum_r c_r a^r.
  SpectralVelocity synthesize(std::span<const double> c) const {
    if (c.size() > modes_.size()) throw ShapeError("StokesBasis::synthesize: too many coefficients");
    SpectralVectorField f(grid_);
    for (std::size_t r = 0; r < c.size(); ++r) {
      const auto& m = modes_[r];
      const Complex z = c[r] * coefficient(r);
      const auto ip = grid_.retained_index(m.wave);
      const auto im = grid_.retained_index(negate(m.wave));
      for (int i = 0; i < grid_.dim(); ++i) {
        f.at(i, ip) += z * m.direction[i];
        f.at(i, im) += std::conj(z) * m.direction[i];
      }
    }
    return SpectralVelocity(std::move(f));
  }

  SpectralVelocity field(std::size_t r) const {
    std::vector<double> c(r + 1, 0.0);
    c[r] = 1.0;
    return synthesize(c);
  }

  /// (f, a^r) for r = 1..N; f must be real.
  std::vector<double> project(const SpectralVectorField& f) const {
    require_same_grid(grid_, f.grid(), "StokesBasis::project");
    std::vector<double> out(modes_.size());
    const double scale = grid_.volume() * amplitude_;
    for (std::size_t r = 0; r < modes_.size(); ++r) {
      const auto& m = modes_[r];
      const auto ip = grid_.retained_index(m.wave);
      Complex dot = 0.0;
      for (int i = 0; i < grid_.dim(); ++i) dot += m.direction[i] * f.at(i, ip);
      out[r] = scale * (m.sine ? -dot.imag() : dot.real());
    }
    return out;
  }
  std::vector<double> project(const SpectralVelocity& v) const { return project(v.field()); }

 private:
  TorusGrid grid_;
  std::vector<BasisMode> modes_;
  double amplitude_;
};

/// The first N eigenfunctions.  Throws CapacityError (naming the maximum)
/// when N exceeds max_basis_size(grid).
inline StokesBasis make_basis(const TorusGrid& grid, std::size_t n_modes) {
  const std::size_t cap = max_basis_size(grid);
  if (n_modes > cap)
    throw CapacityError("make_basis: requested " + std::to_string(n_modes) +
                            " modes but the grid holds at most " + std::to_string(cap),
                        cap);
  std::vector<BasisMode> modes;
  modes.reserve(n_modes);
  const double u2 = grid.wavenumber_unit() * grid.wavenumber_unit();
  for (const auto& n : detail::ordered_representatives(grid)) {
    for (int pol = 0; pol < grid.dim() - 1; ++pol)
      for (bool sine : {false, true}) {
        if (modes.size() == n_modes) return StokesBasis(grid, std::move(modes));
        modes.push_back({n, pol, sine, u2 * norm_squared(n), detail::polarization(n, grid.dim(), pol)});
      }
  }
  return StokesBasis(grid, std::move(modes));
}

/// Number of basis modes with eigenvalue <= lambda_cut (a whole number of shells).
inline std::size_t count_modes_up_to(const TorusGrid& grid, double lambda_cut) {
  const double u2 = grid.wavenumber_unit() * grid.wavenumber_unit();
  std::size_t count = 0;
  for (const auto& n : detail::ordered_representatives(grid)) {
    if (u2 * norm_squared(n) > lambda_cut * (1.0 + 1e-14)) break;
    count += static_cast<std::size_t>(2 * (grid.dim() - 1));
  }
  return count;
}

}  // namespace plsf

#endif  // PLSF_BASIS_HPP
