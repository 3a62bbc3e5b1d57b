#ifndef PLSF_POINT_TENSOR_HPP
#define PLSF_POINT_TENSOR_HPP

#include <array>
#include <cmath>

namespace plsf {

/// A d x d tensor at a single point (row-major, d <= 3).
template <class T = double>
struct PointTensor {
  int dim = 3;
  std::array<T, 9> a{};

  T& operator()(int i, int j) noexcept { return a[static_cast<std::size_t>(3 * i + j)]; }
  const T& operator()(int i, int j) const noexcept { return a[static_cast<std::size_t>(3 * i + j)]; }
};

template <class T>
T contract(const PointTensor<T>& x, const PointTensor<T>& y) {
  T s{};
  for (int i = 0; i < x.dim; ++i)
    for (int j = 0; j < x.dim; ++j) s = s + x(i, j) * y(i, j);
  return s;
}

template <class T>
T frobenius_squared(const PointTensor<T>& x) {
  return contract(x, x);
}

inline PointTensor<double> operator-(const PointTensor<double>& x, const PointTensor<double>& y) {
  PointTensor<double> r{x.dim, {}};
  for (std::size_t i = 0; i < 9; ++i) r.a[i] = x.a[i] - y.a[i];
  return r;
}

inline PointTensor<double> operator+(const PointTensor<double>& x, const PointTensor<double>& y) {
  PointTensor<double> r{x.dim, {}};
  for (std::size_t i = 0; i < 9; ++i) r.a[i] = x.a[i] + y.a[i];
  return r;
}

inline PointTensor<double> operator*(double s, const PointTensor<double>& x) {
  PointTensor<double> r{x.dim, {}};
  for (std::size_t i = 0; i < 9; ++i) r.a[i] = s * x.a[i];
  return r;
}

/// Q X Q^T
inline PointTensor<double> conjugate_by(const PointTensor<double>& q, const PointTensor<double>& x) {
  PointTensor<double> r{x.dim, {}};
  const int d = x.dim;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s += q(i, k) * x(k, l) * q(j, l);
      r(i, j) = s;
    }
  return r;
}

/// Forward-mode dual number: value plus one directional derivative.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  constexpr Dual(double value, double deriv = 0.0) : v(value), d(deriv) {}

  friend Dual operator+(Dual x, Dual y) { return {x.v + y.v, x.d + y.d}; }
  friend Dual operator-(Dual x, Dual y) { return {x.v - y.v, x.d - y.d}; }
  friend Dual operator*(Dual x, Dual y) { return {x.v * y.v, x.d * y.v + x.v * y.d}; }
  friend Dual operator/(Dual x, Dual y) {
    return {x.v / y.v, (x.d * y.v - x.v * y.d) / (y.v * y.v)};
  }
};

inline Dual pow(Dual x, double e) {
  const double pv = std::pow(x.v, e);
  return {pv, e == 0.0 ? 0.0 : e * std::pow(x.v, e - 1.0) * x.d};
}

inline double value_of(double x) { return x; }
inline double value_of(Dual x) { return x.v; }

}  // namespace plsf

#endif  // PLSF_POINT_TENSOR_HPP
