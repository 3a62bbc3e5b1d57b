#ifndef PLSF_FIELD_HPP
#define PLSF_FIELD_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "plsf/error.hpp"
#include "plsf/grid.hpp"

namespace plsf {

using Complex = std::complex<double>;

/// A d-component vector field stored as Fourier coefficients on the retained
/// wavevectors: v(x) = sum_n vhat(n) exp(i k_n . x).  No structural invariants
/// beyond the shape; see SpectralVelocity for the constrained type.
class SpectralVectorField {
 public:
  SpectralVectorField() = default;
  explicit SpectralVectorField(const TorusGrid& grid)
      : grid_(grid), coeffs_(static_cast<std::size_t>(grid.dim()) * grid.retained_count()) {}

  const TorusGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return grid_.dim(); }

  Complex& at(int component, std::size_t idx) noexcept {
    return coeffs_[static_cast<std::size_t>(component) * grid_.retained_count() + idx];
  }
  const Complex& at(int component, std::size_t idx) const noexcept {
    return coeffs_[static_cast<std::size_t>(component) * grid_.retained_count() + idx];
  }
  Complex& at(int component, const WaveIndex& n) noexcept {
    return at(component, grid_.retained_index(n));
  }
  const Complex& at(int component, const WaveIndex& n) const noexcept {
    return at(component, grid_.retained_index(n));
  }

  std::span<const Complex> component(int c) const noexcept {
    return {coeffs_.data() + static_cast<std::size_t>(c) * grid_.retained_count(),
            grid_.retained_count()};
  }
  std::span<Complex> component(int c) noexcept {
    return {coeffs_.data() + static_cast<std::size_t>(c) * grid_.retained_count(),
            grid_.retained_count()};
  }
  std::span<const Complex> coefficients() const noexcept { return coeffs_; }

  SpectralVectorField& operator+=(const SpectralVectorField& o) {
    require_same_grid(grid_, o.grid_, "SpectralVectorField::operator+=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  SpectralVectorField& operator-=(const SpectralVectorField& o) {
    require_same_grid(grid_, o.grid_, "SpectralVectorField::operator-=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  SpectralVectorField& operator*=(double s) noexcept {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  friend SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b) {
    return a += b;
  }
  friend SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b) {
    return a -= b;
  }
  friend SpectralVectorField operator*(double s, SpectralVectorField a) { return a *= s; }

  /// Largest coefficient magnitude; used to scale invariant tolerances.
  double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  /// max_n |vhat(-n) - conj(vhat(n))|
  double hermitian_defect() const noexcept {
    double m = 0.0;
    for (std::size_t idx = 0; idx < grid_.retained_count(); ++idx) {
      const auto mirror = grid_.retained_index(negate(grid_.retained_wave(idx)));
      for (int c = 0; c < dim(); ++c)
        m = std::max(m, std::abs(at(c, mirror) - std::conj(at(c, idx))));
    }
    return m;
  }

  /// max_n |k_n . vhat(n)|
  double divergence_defect() const noexcept {
    double m = 0.0;
    for (std::size_t idx = 0; idx < grid_.retained_count(); ++idx) {
      const auto k = grid_.wavevector(grid_.retained_wave(idx));
      Complex s = 0.0;
      for (int c = 0; c < dim(); ++c) s += k[c] * at(c, idx);
      m = std::max(m, std::abs(s));
    }
    return m;
  }

  double mean_defect() const noexcept {
    const auto zero = grid_.retained_index({0, 0, 0});
    double m = 0.0;
    for (int c = 0; c < dim(); ++c) m = std::max(m, std::abs(at(c, zero)));
    return m;
  }

  /// Replace vhat(-n) by conj(vhat(n)) for half-space n, and force vhat(0) real.
  void symmetrize() noexcept {
    for (std::size_t idx = 0; idx < grid_.retained_count(); ++idx) {
      const auto n = grid_.retained_wave(idx);
      if (!is_half_space_representative(n)) continue;
      const auto mirror = grid_.retained_index(negate(n));
      for (int c = 0; c < dim(); ++c) at(c, mirror) = std::conj(at(c, idx));
    }
    const auto zero = grid_.retained_index({0, 0, 0});
    for (int c = 0; c < dim(); ++c) at(c, zero) = at(c, zero).real();
  }

 private:
  TorusGrid grid_;
  std::vector<Complex> coeffs_;
};

/// A real, divergence-free, zero-mean vector field: an element of the
/// truncated solenoidal space.  Construction checks the three invariants.
class SpectralVelocity {
 public:
  /// Relative tolerance used when validating invariants at construction.
  static constexpr double kInvariantTolerance = 1e-11;

  explicit SpectralVelocity(const TorusGrid& grid) : field_(grid) {}

  /// Throws DomainError if f is not (within tolerance) Hermitian, solenoidal
  /// and mean-free.  Tolerances are relative to the largest coefficient.
  explicit SpectralVelocity(SpectralVectorField f) : field_(std::move(f)) {
    const double scale = std::max(1.0, field_.max_abs());
    const double kmax = field_.grid().wavenumber_unit() * field_.grid().half_band() *
                        std::sqrt(static_cast<double>(field_.dim()));
    if (field_.hermitian_defect() > kInvariantTolerance * scale)
      throw DomainError("SpectralVelocity: coefficients are not Hermitian-symmetric");
    if (field_.divergence_defect() > kInvariantTolerance * scale * std::max(1.0, kmax))
      throw DomainError("SpectralVelocity: field is not divergence-free");
    if (field_.mean_defect() > kInvariantTolerance * scale)
      throw DomainError("SpectralVelocity: field has nonzero mean");
  }

  const SpectralVectorField& field() const noexcept { return field_; }
  const TorusGrid& grid() const noexcept { return field_.grid(); }
  int dim() const noexcept { return field_.dim(); }

  /// ||v||_2^2 from the coefficients (Parseval).
  double energy() const noexcept {
    double s = 0.0;
    for (const auto& c : field_.coefficients()) s += std::norm(c);
    return grid().volume() * s;
  }

 private:
  SpectralVectorField field_;
};

/// Samples on the padded physical grid of a rank-R tensor field, with d^R
/// components stored contiguously per component.
template <int Rank>
class PhysicalField {
 public:
  PhysicalField() = default;
  explicit PhysicalField(const TorusGrid& grid)
      : grid_(grid), values_(component_count(grid.dim()) * grid.padded_points(), 0.0) {}

  static constexpr std::size_t component_count(int dim) noexcept {
    std::size_t n = 1;
    for (int r = 0; r < Rank; ++r) n *= static_cast<std::size_t>(dim);
    return n;
  }

  const TorusGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return grid_.dim(); }
  std::size_t points() const noexcept { return grid_.padded_points(); }
  std::size_t components() const noexcept { return component_count(grid_.dim()); }

  std::span<double> component(std::size_t c) noexcept {
    return {values_.data() + c * points(), points()};
  }
  std::span<const double> component(std::size_t c) const noexcept {
    return {values_.data() + c * points(), points()};
  }

  /// Flattened component index for a multi-index (i0, i1, ...).
  template <class... I>
  std::size_t index(I... i) const noexcept {
    static_assert(sizeof...(I) == Rank);
    std::size_t idx = 0;
    ((idx = idx * static_cast<std::size_t>(dim()) + static_cast<std::size_t>(i)), ...);
    return idx;
  }

  /// Euclidean / Frobenius magnitude squared at point x.
  double magnitude_squared(std::size_t x) const noexcept {
    double s = 0.0;
    const std::size_t n = components();
    for (std::size_t c = 0; c < n; ++c) {
      const double v = values_[c * points() + x];
      s += v * v;
    }
    return s;
  }

  double at(std::size_t c, std::size_t x) const noexcept { return values_[c * points() + x]; }
  double& at(std::size_t c, std::size_t x) noexcept { return values_[c * points() + x]; }

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

using ScalarField = PhysicalField<0>;
using VectorField = PhysicalField<1>;
using TensorField = PhysicalField<2>;
using Rank3Field = PhysicalField<3>;

}  // namespace plsf

#endif  // PLSF_FIELD_HPP
