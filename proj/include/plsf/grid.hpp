#ifndef PLSF_GRID_HPP
#define PLSF_GRID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "plsf/error.hpp"

namespace plsf {

/// Integer wavevector n; the physical wavevector is (2*pi/L) * n.  The third
/// entry is always 0 in two dimensions.
using WaveIndex = std::array<int, 3>;

/// The periodic box (0, L)^d together with its spectral truncation.
///
/// Retained wavevectors are n with |n_i| <= M/2 in every direction, a set that
/// is closed under negation.  Nonlinear products are evaluated on a padded
/// physical grid of `padded_size()` points per direction, chosen so that
/// quadratic products of retained modes never alias back onto retained modes.
class TorusGrid {
 public:
  TorusGrid() = default;

  /// dealias is the oversampling factor (>= 1); 3/2 is the classical choice.
  TorusGrid(int dim, double length, int resolution, double dealias = 1.5)
      : dim_(dim), length_(length), resolution_(resolution), dealias_(dealias) {
    if (dim != 2 && dim != 3) throw DomainError("TorusGrid: dim must be 2 or 3");
    if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("TorusGrid: L must be > 0");
    if (resolution < 8 || resolution % 2 != 0)
      throw DomainError("TorusGrid: M must be an even integer >= 8");
    if (!(dealias >= 1.0)) throw DomainError("TorusGrid: dealias factor must be >= 1");
    padded_ = smooth_at_least(static_cast<int>(std::ceil(dealias * resolution - 1e-9)) + 1);
    padded_points_ = 1;
    retained_count_ = 1;
    for (int i = 0; i < dim; ++i) {
      padded_points_ *= static_cast<std::size_t>(padded_);
      retained_count_ *= static_cast<std::size_t>(resolution + 1);
    }
  }

  int dim() const noexcept { return dim_; }
  double length() const noexcept { return length_; }
  int resolution() const noexcept { return resolution_; }
  double dealias() const noexcept { return dealias_; }
  int half_band() const noexcept { return resolution_ / 2; }

  /// Points per direction of the padded physical grid.
  int padded_size() const noexcept { return padded_; }
  std::size_t padded_points() const noexcept { return padded_points_; }
  /// Number of retained wavevectors, (M+1)^d, including n = 0.
  std::size_t retained_count() const noexcept { return retained_count_; }

  double wavenumber_unit() const noexcept { return 2.0 * std::numbers::pi / length_; }
  double volume() const noexcept { return std::pow(length_, dim_); }
  /// Trapezoidal quadrature weight of one padded grid point.
  double cell_volume() const noexcept {
    return volume() / static_cast<double>(padded_points_);
  }

  bool contains(const WaveIndex& n) const noexcept {
    for (int i = 0; i < dim_; ++i)
      if (std::abs(n[i]) > half_band()) return false;
    for (int i = dim_; i < 3; ++i)
      if (n[i] != 0) return false;
    return true;
  }

  /// Position of n in the dense (M+1)^d coefficient layout (last index fastest).
  std::size_t retained_index(const WaveIndex& n) const noexcept {
    std::size_t idx = 0;
    const int h = half_band();
    for (int i = 0; i < dim_; ++i) idx = idx * static_cast<std::size_t>(resolution_ + 1) + (n[i] + h);
    return idx;
  }

  WaveIndex retained_wave(std::size_t idx) const noexcept {
    WaveIndex n{0, 0, 0};
    const int h = half_band();
    const auto ext = static_cast<std::size_t>(resolution_ + 1);
    for (int i = dim_ - 1; i >= 0; --i) {
      n[i] = static_cast<int>(idx % ext) - h;
      idx /= ext;
    }
    return n;
  }

  /// Position of n in the padded FFT layout (negative indices wrap).
  std::size_t padded_index(const WaveIndex& n) const noexcept {
    std::size_t idx = 0;
    for (int i = 0; i < dim_; ++i) {
      const int w = n[i] < 0 ? n[i] + padded_ : n[i];
      idx = idx * static_cast<std::size_t>(padded_) + static_cast<std::size_t>(w);
    }
    return idx;
  }

  /// Physical coordinate of padded grid point `idx`.
  std::array<double, 3> point(std::size_t idx) const noexcept {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    const double h = length_ / padded_;
    for (int i = dim_ - 1; i >= 0; --i) {
      x[i] = h * static_cast<double>(idx % static_cast<std::size_t>(padded_));
      idx /= static_cast<std::size_t>(padded_);
    }
    return x;
  }

  std::array<double, 3> wavevector(const WaveIndex& n) const noexcept {
    const double u = wavenumber_unit();
    return {u * n[0], u * n[1], u * n[2]};
  }

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) noexcept {
    return a.dim_ == b.dim_ && a.length_ == b.length_ && a.resolution_ == b.resolution_ &&
           a.padded_ == b.padded_;
  }

  std::string describe() const {
    return "dim=" + std::to_string(dim_) + " M=" + std::to_string(resolution_) +
           " L=" + std::to_string(length_) + " padded=" + std::to_string(padded_);
  }

 private:
  // Smallest 2^a 3^b 5^c >= n, so FFT sizes stay fast.
  static int smooth_at_least(int n) {
    for (int m = n;; ++m) {
      int r = m;
      for (int f : {2, 3, 5})
        while (r % f == 0) r /= f;
      if (r == 1) return m;
    }
  }

  int dim_ = 2;
  double length_ = 2.0 * std::numbers::pi;
  int resolution_ = 8;
  double dealias_ = 1.5;
  int padded_ = 15;
  std::size_t padded_points_ = 0;
  std::size_t retained_count_ = 0;
};

inline void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
  if (!(a == b))
    throw ShapeError(std::string(where) + ": grid mismatch (" + a.describe() + " vs " +
                     b.describe() + ")");
}

/// True when n lies in the half space used to pick one representative of each
/// +-n pair: the first nonzero component is positive.
inline bool is_half_space_representative(const WaveIndex& n) noexcept {
  for (int v : n) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return false;
}

inline int norm_squared(const WaveIndex& n) noexcept {
  return n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
}

inline WaveIndex negate(const WaveIndex& n) noexcept { return {-n[0], -n[1], -n[2]}; }

}  // namespace plsf

#endif  // PLSF_GRID_HPP
