#ifndef PLSF_OPERATORS_HPP
#define PLSF_OPERATORS_HPP

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "plsf/fft.hpp"
#include "plsf/field.hpp"

namespace plsf {

namespace detail {

// Writes mult(k) * coeffs(n) for every retained n into `out` (padded layout)
// and transforms to physical space.
template <class Mult>
void synthesize_component(const TorusGrid& g, std::span<const Complex> coeffs, Mult&& mult,
                          ComplexGrid& out) {
  out.clear();
  for (std::size_t idx = 0; idx < g.retained_count(); ++idx) {
    const Complex c = coeffs[idx];
    if (c == Complex{}) continue;
    const auto n = g.retained_wave(idx);
    out[g.padded_index(n)] = mult(g.wavevector(n)) * c;
  }
  FftPlan::get(g)->backward(out);
}

inline void copy_real(const ComplexGrid& src, std::span<double> dst) noexcept {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i].real();
}

template <int Rank>
double power_sum(const PhysicalField<Rank>& f, double q) {
  double s = 0.0;
  const double half_q = 0.5 * q;
  for (std::size_t x = 0; x < f.points(); ++x) {
    const double m2 = f.magnitude_squared(x);
    s += half_q == 1.0 ? m2 : std::pow(m2, half_q);
  }
  return s;
}

}  // namespace detail

/// Samples of the field on the padded grid.
inline VectorField to_physical(const SpectralVectorField& f) {
  const auto& g = f.grid();
  VectorField out(g);
  ComplexGrid buf(g.padded_points());
  for (int i = 0; i < g.dim(); ++i) {
    detail::synthesize_component(g, f.component(i), [](const auto&) { return Complex{1.0}; }, buf);
    detail::copy_real(buf, out.component(static_cast<std::size_t>(i)));
  }
  return out;
}

/// Velocity gradient, component (i, j) = d_j f_i, sampled exactly.
inline TensorField gradient(const SpectralVectorField& f) {
  const auto& g = f.grid();
  const int d = g.dim();
  TensorField out(g);
  ComplexGrid buf(g.padded_points());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      detail::synthesize_component(
          g, f.component(i), [j](const auto& k) { return Complex{0.0, k[j]}; }, buf);
      detail::copy_real(buf, out.component(out.index(i, j)));
    }
  return out;
}

/// Symmetric part of the gradient, (grad f + grad f^T)/2.  Built from the
/// symmetrised pair of samples so the result is exactly symmetric.
inline TensorField sym_gradient(const SpectralVectorField& f) {
  const TensorField grad = gradient(f);
  TensorField out(f.grid());
  const int d = f.dim();
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      auto gij = grad.component(grad.index(i, j));
      auto gji = grad.component(grad.index(j, i));
      auto oij = out.component(out.index(i, j));
      auto oji = out.component(out.index(j, i));
      for (std::size_t x = 0; x < oij.size(); ++x) {
        const double v = 0.5 * (gij[x] + gji[x]);
        oij[x] = v;
        oji[x] = v;
      }
    }
  return out;
}

inline TensorField sym_gradient(const SpectralVelocity& v) { return sym_gradient(v.field()); }

/// All second derivatives, component (i, j, s) = d_j d_s f_i.
inline Rank3Field second_derivatives(const SpectralVectorField& f) {
  const auto& g = f.grid();
  const int d = g.dim();
  Rank3Field out(g);
  ComplexGrid buf(g.padded_points());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int s = j; s < d; ++s) {
        detail::synthesize_component(
            g, f.component(i), [j, s](const auto& k) { return Complex{-k[j] * k[s], 0.0}; },
            buf);
        detail::copy_real(buf, out.component(out.index(i, j, s)));
        if (s != j) detail::copy_real(buf, out.component(out.index(i, s, j)));
      }
  return out;
}

/// Gradient of the symmetric gradient, component (i, j, s) = d_s D_ij.
inline Rank3Field grad_sym_gradient(const SpectralVectorField& f) {
  const Rank3Field h = second_derivatives(f);
  Rank3Field out(f.grid());
  const int d = f.dim();
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      for (int s = 0; s < d; ++s) {
        auto a = h.component(h.index(i, j, s));
        auto b = h.component(h.index(j, i, s));
        auto o1 = out.component(out.index(i, j, s));
        auto o2 = out.component(out.index(j, i, s));
        for (std::size_t x = 0; x < o1.size(); ++x) {
          const double v = 0.5 * (a[x] + b[x]);
          o1[x] = v;
          o2[x] = v;
        }
      }
  return out;
}

/// Orthogonal projection onto solenoidal, mean-free fields:
/// fhat(k) - k (k . fhat(k)) / |k|^2 per mode, with the mean removed.
/// The input must be real (Hermitian coefficients).
inline SpectralVelocity leray_project(const SpectralVectorField& f) {
  const auto& g = f.grid();
  const int d = g.dim();
  SpectralVectorField out(g);
  for (std::size_t idx = 0; idx < g.retained_count(); ++idx) {
    const auto n = g.retained_wave(idx);
    const int nn = norm_squared(n);
    if (nn == 0) continue;
    // Integer wavevectors make the projector exact up to one rounding.
    Complex dot = 0.0;
    for (int c = 0; c < d; ++c) dot += static_cast<double>(n[c]) * f.at(c, idx);
    const Complex coef = dot / static_cast<double>(nn);
    for (int c = 0; c < d; ++c) out.at(c, idx) = f.at(c, idx) - static_cast<double>(n[c]) * coef;
  }
  return SpectralVelocity(std::move(out));
}

/// (int_Omega |f|^q dx)^(1/q) by trapezoidal quadrature on the padded grid,
/// with |.| the Euclidean / Frobenius magnitude.
template <int Rank>
double lp_norm(const PhysicalField<Rank>& f, double q) {
  if (!(q >= 1.0)) throw DomainError("lp_norm: exponent q must be >= 1");
  const double s = detail::power_sum(f, q) * f.grid().cell_volume();
  return std::pow(s, 1.0 / q);
}

/// int_Omega f : g dx by trapezoidal quadrature.
template <int Rank>
double inner_product(const PhysicalField<Rank>& f, const PhysicalField<Rank>& g) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  double s = 0.0;
  for (std::size_t c = 0; c < f.components(); ++c) {
    auto a = f.component(c);
    auto b = g.component(c);
    for (std::size_t x = 0; x < a.size(); ++x) s += a[x] * b[x];
  }
  return s * f.grid().cell_volume();
}

/// L^2 inner product of two real band-limited fields from their coefficients.
/// Equal to trapezoidal quadrature on the padded grid (Parseval; the padded
/// grid resolves every retained wavevector).
inline double inner_product(const SpectralVectorField& f, const SpectralVectorField& g) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  double s = 0.0;
  for (int c = 0; c < f.dim(); ++c) {
    auto a = f.component(c);
    auto b = g.component(c);
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] * std::conj(b[i])).real();
  }
  return s * f.grid().volume();
}

inline double inner_product(const SpectralVelocity& f, const SpectralVelocity& g) {
  return inner_product(f.field(), g.field());
}

/// Fourier coefficients of physical samples, truncated to retained modes.
inline SpectralVectorField from_physical(const VectorField& f) {
  const auto& g = f.grid();
  SpectralVectorField out(g);
  ComplexGrid buf(g.padded_points());
  const auto plan = FftPlan::get(g);
  for (int c = 0; c < g.dim(); ++c) {
    auto src = f.component(static_cast<std::size_t>(c));
    for (std::size_t x = 0; x < src.size(); ++x) buf[x] = src[x];
    plan->forward(buf);
    for (std::size_t idx = 0; idx < g.retained_count(); ++idx)
      out.at(c, idx) = buf[g.padded_index(g.retained_wave(idx))];
  }
  out.symmetrize();
  return out;
}

/// Spectral coefficients of the vector function fn(x) -> std::array<double,3>.
template <class Fn>
SpectralVectorField sample_vector_field(const TorusGrid& g, Fn&& fn) {
  VectorField phys(g);
  for (std::size_t x = 0; x < g.padded_points(); ++x) {
    const std::array<double, 3> v = fn(g.point(x));
    for (int c = 0; c < g.dim(); ++c) phys.at(static_cast<std::size_t>(c), x) = v[c];
  }
  return from_physical(phys);
}

}  // namespace plsf

#endif  // PLSF_OPERATORS_HPP
