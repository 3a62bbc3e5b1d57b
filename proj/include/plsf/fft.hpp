#ifndef PLSF_FFT_HPP
#define PLSF_FFT_HPP

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <utility>
#include <vector>

#include "plsf/grid.hpp"

namespace plsf {

/// FFTW-aligned complex array holding one scalar field on the padded grid.
class ComplexGrid {
 public:
  ComplexGrid() = default;
  explicit ComplexGrid(std::size_t n) : size_(n), data_(fftw_alloc_complex(n)) {
    if (!data_) throw std::bad_alloc();
    clear();
  }
  ComplexGrid(const ComplexGrid& o) : ComplexGrid(o.size_) {
    std::memcpy(data_, o.data_, sizeof(fftw_complex) * size_);
  }
  ComplexGrid(ComplexGrid&& o) noexcept
      : size_(std::exchange(o.size_, 0)), data_(std::exchange(o.data_, nullptr)) {}
  ComplexGrid& operator=(ComplexGrid o) noexcept {
    std::swap(size_, o.size_);
    std::swap(data_, o.data_);
    return *this;
  }
  ~ComplexGrid() {
    if (data_) fftw_free(data_);
  }

  void clear() noexcept { std::memset(data_, 0, sizeof(fftw_complex) * size_); }
  std::size_t size() const noexcept { return size_; }
  fftw_complex* raw() noexcept { return data_; }

  std::complex<double>& operator[](std::size_t i) noexcept {
    return reinterpret_cast<std::complex<double>*>(data_)[i];
  }
  const std::complex<double>& operator[](std::size_t i) const noexcept {
    return reinterpret_cast<const std::complex<double>*>(data_)[i];
  }
  std::span<std::complex<double>> view() noexcept {
    return {reinterpret_cast<std::complex<double>*>(data_), size_};
  }

 private:
  std::size_t size_ = 0;
  fftw_complex* data_ = nullptr;
};

/// In-place forward/backward transforms for one padded grid shape.
///
/// Convention: a field is f(x) = sum_k fhat(k) exp(i k.x).  `forward` maps
/// samples to fhat (normalised by 1/points), `backward` maps fhat to samples.
/// Plans come from FFTW_ESTIMATE, so the same shape always gets the same plan
/// and results are bit-reproducible.
class FftPlan {
 public:
  static std::shared_ptr<const FftPlan> get(const TorusGrid& grid) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const FftPlan>> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_pair(grid.dim(), grid.padded_size());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto plan = std::shared_ptr<const FftPlan>(new FftPlan(grid.dim(), grid.padded_size()));
    cache.emplace(key, plan);
    return plan;
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  std::size_t points() const noexcept { return points_; }

  void forward(ComplexGrid& g) const {
    fftw_execute_dft(forward_, g.raw(), g.raw());
    const double scale = 1.0 / static_cast<double>(points_);
    for (std::size_t i = 0; i < points_; ++i) g[i] *= scale;
  }
  void backward(ComplexGrid& g) const { fftw_execute_dft(backward_, g.raw(), g.raw()); }

 private:
  FftPlan(int dim, int n) {
    std::vector<int> dims(static_cast<std::size_t>(dim), n);
    points_ = 1;
    for (int d : dims) points_ *= static_cast<std::size_t>(d);
    ComplexGrid scratch(points_);
    forward_ = fftw_plan_dft(dim, dims.data(), scratch.raw(), scratch.raw(), FFTW_FORWARD,
                             FFTW_ESTIMATE);
    backward_ = fftw_plan_dft(dim, dims.data(), scratch.raw(), scratch.raw(), FFTW_BACKWARD,
                              FFTW_ESTIMATE);
  }

  std::size_t points_ = 0;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// K real fields on one padded grid, stored two per complex buffer (field
/// 2j in the real part, 2j+1 in the imaginary part) so each transform
/// handles two fields.
class RealBatch {
 public:
  RealBatch() = default;
  RealBatch(std::shared_ptr<const FftPlan> plan, std::size_t fields)
      : plan_(std::move(plan)), fields_(fields) {
    for (std::size_t b = 0; b < (fields + 1) / 2; ++b) buffers_.emplace_back(plan_->points());
  }

  std::size_t fields() const noexcept { return fields_; }

  void clear() noexcept {
    for (auto& b : buffers_) b.clear();
  }

  /// Adds the coefficient pair (z at +n, conj z at -n) of field j.
  void add_mode(std::size_t j, std::size_t plus, std::size_t minus, std::complex<double> z) noexcept {
    auto& b = buffers_[j / 2];
    if (j % 2 == 0) {
      b[plus] += z;
      b[minus] += std::conj(z);
    } else {
      const std::complex<double> i{0.0, 1.0};
      b[plus] += i * z;
      b[minus] += i * std::conj(z);
    }
  }

  double value(std::size_t j, std::size_t x) const noexcept {
    const auto& v = buffers_[j / 2][x];
    return j % 2 == 0 ? v.real() : v.imag();
  }

  /// Sets physical sample x of field j (after clear()).
  void set_value(std::size_t j, std::size_t x, double v) noexcept {
    auto& c = buffers_[j / 2][x];
    if (j % 2 == 0)
      c.real(v);
    else
      c.imag(v);
  }

  void backward() const {
    for (auto& b : buffers_) plan_->backward(b);
  }
  void forward() const {
    for (auto& b : buffers_) plan_->forward(b);
  }

  /// Fourier coefficient of field j at +n after forward().
  std::complex<double> mode(std::size_t j, std::size_t plus, std::size_t minus) const noexcept {
    const auto& b = buffers_[j / 2];
    const std::complex<double> z = b[plus];
    const std::complex<double> w = std::conj(b[minus]);
    return j % 2 == 0 ? 0.5 * (z + w) : std::complex<double>{0.0, -0.5} * (z - w);
  }

 private:
  std::shared_ptr<const FftPlan> plan_;
  std::size_t fields_ = 0;
  mutable std::vector<ComplexGrid> buffers_;
};

}  // namespace plsf

#endif  // PLSF_FFT_HPP
