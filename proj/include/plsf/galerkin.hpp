#ifndef PLSF_GALERKIN_HPP
#define PLSF_GALERKIN_HPP

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "plsf/basis.hpp"
#include "plsf/constitutive.hpp"
#include "plsf/fft.hpp"

namespace plsf {

/// v^N = sum_r c_r a^r at time t.
struct GalerkinState {
  std::shared_ptr<const StokesBasis> basis;
  std::vector<double> coeffs;
  double time = 0.0;

  SpectralVelocity velocity() const { return basis->synthesize(coeffs); }
  std::size_t size() const noexcept { return coeffs.size(); }
};

/// c_r = (v0, a^r).
inline GalerkinState project_initial_data(const SpectralVelocity& v0,
                                          std::shared_ptr<const StokesBasis> basis) {
  require_same_grid(v0.grid(), basis->grid(), "project_initial_data");
  GalerkinState s{basis, basis->project(v0), 0.0};
  return s;
}

/// Scalars recorded along a trajectory.
struct Functionals {
  double energy = 0.0;       // ||v||_2^2
  double rho = 0.0;          // ||grad v||_2^2
  double rho_tilde = 0.0;    // int (mu+|Dv|^2)^((p-2)/2) |Dv|^2
  double grad_p_norm = 0.0;  // ||grad v||_p
  double ip = 0.0;           // I_p(v); NaN when mu = 0
  double d2_p_norm = std::numeric_limits<double>::quiet_NaN();  // ||D^2 v||_p when requested
};

/// Right-hand side of the Galerkin system
///   dc_r/dt = -(sigma(Dv), D a^r) - (conv(v), a^r),
///   conv(v) = [v.grad v + div(v (x) v)] / 2,
/// evaluated pseudo-spectrally on the padded grid.  Quadratic products are
/// alias-free there, so the convection term is exactly energy neutral.
///
/// Holds FFT workspaces: one instance per thread.
class GalerkinSystem {
 public:
  enum class Terms { kAll, kStressOnly, kConvectionOnly };

  GalerkinSystem(std::shared_ptr<const StokesBasis> basis, FluidParams params)
      : basis_(std::move(basis)), params_(params), grid_(basis_->grid()),
        plan_(FftPlan::get(grid_)) {
    const std::size_t d = static_cast<std::size_t>(grid_.dim());
    std::map<std::size_t, std::size_t> slot;  // retained index -> active wave
    for (std::size_t r = 0; r < basis_->size(); ++r) {
      const auto& m = (*basis_)[r];
      const auto ri = grid_.retained_index(m.wave);
      auto it = slot.find(ri);
      if (it == slot.end()) {
        it = slot.emplace(ri, waves_.size()).first;
        waves_.push_back({grid_.padded_index(m.wave), grid_.padded_index(negate(m.wave)),
                          grid_.wavevector(m.wave)});
      }
      mode_wave_.push_back(it->second);
    }
    // rhs: v_i then d_j v_i; functionals: d_j v_i alone.
    vg_ = RealBatch(plan_, d + d * d);
    g_ = RealBatch(plan_, d * d);
    q_ = RealBatch(plan_, d * (d + 1) / 2 + d);
    vhat_.resize(waves_.size() * d);
  }

  const StokesBasis& basis() const noexcept { return *basis_; }
  std::shared_ptr<const StokesBasis> basis_ptr() const noexcept { return basis_; }
  const FluidParams& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return basis_->size(); }

  void rhs(std::span<const double> c, std::span<double> out, Terms terms = Terms::kAll) {
    const int d = grid_.dim();
    const std::size_t pts = grid_.padded_points();
    const bool with_stress = terms != Terms::kConvectionOnly;
    const bool with_conv = terms != Terms::kStressOnly;
    load_coefficients(c);
    load_fields(vg_, d);

    // Q = -sigma + P/2 with P = v (x) v (packed upper triangle), w = v . grad v.
    const std::size_t nq = static_cast<std::size_t>(d * (d + 1) / 2);
    q_.clear();
    double vv[3], gg[9], dd[9];
    for (std::size_t x = 0; x < pts; ++x) {
      for (int i = 0; i < d; ++i) vv[i] = vg_.value(static_cast<std::size_t>(i), x);
      for (int k = 0; k < d * d; ++k) gg[k] = vg_.value(static_cast<std::size_t>(d + k), x);
      double m2 = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const double s = 0.5 * (gg[i * d + j] + gg[j * d + i]);
          dd[i * d + j] = s;
          m2 += s * s;
        }
      const double f = with_stress ? viscosity_factor(m2, params_) : 0.0;
      std::size_t slot = 0;
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j, ++slot) {
          double q = -f * dd[i * d + j];
          if (with_conv) q += 0.5 * vv[i] * vv[j];
          q_.set_value(slot, x, q);
        }
      if (with_conv)
        for (int i = 0; i < d; ++i) {
          double w = 0.0;
          for (int j = 0; j < d; ++j) w += vv[j] * gg[i * d + j];
          q_.set_value(nq + static_cast<std::size_t>(i), x, w);
        }
    }
    q_.forward();

    // G_i(k) = -i k_j Qhat_ij(k) - what_i(k)/2 = Fourier symbol of div sigma - conv.
    std::vector<Complex>& g = vhat_;
    for (std::size_t w = 0; w < waves_.size(); ++w) {
      const auto& wv = waves_[w];
      for (int i = 0; i < d; ++i) {
        Complex s = 0.0;
        for (int j = 0; j < d; ++j) s += wv.k[j] * q_.mode(packed(i, j, d), wv.plus, wv.minus);
        Complex gi = Complex{0.0, -1.0} * s;
        if (with_conv) gi -= 0.5 * q_.mode(nq + static_cast<std::size_t>(i), wv.plus, wv.minus);
        g[w * d + i] = gi;
      }
    }
    const double scale = grid_.volume() * basis_->amplitude();
    for (std::size_t r = 0; r < basis_->size(); ++r) {
      const auto& m = (*basis_)[r];
      const std::size_t w = mode_wave_[r];
      Complex dot = 0.0;
      for (int i = 0; i < d; ++i) dot += m.direction[i] * g[w * d + i];
      out[r] = scale * (m.sine ? -dot.imag() : dot.real());
    }
  }

  std::vector<double> rhs(std::span<const double> c, Terms terms = Terms::kAll) {
    std::vector<double> out(basis_->size());
    rhs(c, out, terms);
    return out;
  }

  /// Energy, enstrophy and the nonlinear functionals of v^N.  rho_tilde uses
  /// the same pointwise stress as rhs(), so sum_r c_r rhs_r = -rho_tilde up
  /// to rounding.
  Functionals functionals(std::span<const double> c, bool with_second_derivatives = true) {
    const int d = grid_.dim();
    const std::size_t pts = grid_.padded_points();
    Functionals out;
    for (std::size_t r = 0; r < c.size(); ++r) {
      out.energy += c[r] * c[r];
      out.rho += (*basis_)[r].eigenvalue * c[r] * c[r];
    }
    load_coefficients(c);
    load_fields(g_, 0);
    const bool want_ip = params_.mu > 0.0;
    const bool need_h = want_ip || with_second_derivatives;
    if (need_h) load_second_derivatives();
    double sig = 0.0, gp = 0.0, ip = 0.0, d2 = 0.0;
    const double half_p = 0.5 * params_.p;
    double gg[9], dd[9], hh[27];
    for (std::size_t x = 0; x < pts; ++x) {
      double g2 = 0.0, m2 = 0.0;
      for (int k = 0; k < d * d; ++k) {
        gg[k] = g_.value(static_cast<std::size_t>(k), x);
        g2 += gg[k] * gg[k];
      }
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          dd[i * d + j] = 0.5 * (gg[i * d + j] + gg[j * d + i]);
          m2 += dd[i * d + j] * dd[i * d + j];
        }
      const double f = viscosity_factor(m2, params_);
      for (int k = 0; k < d * d; ++k) sig += (f * dd[k]) * dd[k];
      gp += std::pow(g2, half_p);
      if (need_h) {
        double h2 = 0.0, gd2 = 0.0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            for (int s = 0; s < d; ++s) {
              const double v = h_.value(hess_slot(i, j, s, d), x);
              hh[(i * d + j) * d + s] = v;
              h2 += v * v;
            }
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            for (int s = 0; s < d; ++s) {
              const double v = 0.5 * (hh[(i * d + j) * d + s] + hh[(j * d + i) * d + s]);
              gd2 += v * v;
            }
        if (want_ip) ip += f * gd2;
        if (with_second_derivatives) d2 += std::pow(h2, half_p);
      }
    }
    const double cell = grid_.cell_volume();
    out.rho_tilde = sig * cell;
    out.grad_p_norm = std::pow(gp * cell, 1.0 / params_.p);
    out.ip = want_ip ? ip * cell : std::numeric_limits<double>::quiet_NaN();
    if (with_second_derivatives) out.d2_p_norm = std::pow(d2 * cell, 1.0 / params_.p);
    return out;
  }

  /// ||grad v||_q for any q >= 1.
  double grad_lq_norm(std::span<const double> c, double q) {
    if (!(q >= 1.0)) throw DomainError("grad_lq_norm: q must be >= 1");
    const int d = grid_.dim();
    load_coefficients(c);
    load_fields(g_, 0);
    double s = 0.0;
    for (std::size_t x = 0; x < grid_.padded_points(); ++x) {
      double g2 = 0.0;
      for (int k = 0; k < d * d; ++k) {
        const double v = g_.value(static_cast<std::size_t>(k), x);
        g2 += v * v;
      }
      s += std::pow(g2, 0.5 * q);
    }
    return std::pow(s * grid_.cell_volume(), 1.0 / q);
  }

 private:
  struct ActiveWave {
    std::size_t plus;
    std::size_t minus;
    std::array<double, 3> k;
  };

  static std::size_t packed(int i, int j, int d) noexcept {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(i * d - i * (i - 1) / 2 + (j - i));
  }
  static std::size_t hess_slot(int i, int j, int s, int d) noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(d * (d + 1) / 2) + packed(j, s, d);
  }

  // vhat_ = Fourier coefficients of v^N at the active wavevectors.
  void load_coefficients(std::span<const double> c) {
    const int d = grid_.dim();
    std::fill(vhat_.begin(), vhat_.end(), Complex{});
    for (std::size_t r = 0; r < c.size(); ++r) {
      if (c[r] == 0.0) continue;
      const auto& m = (*basis_)[r];
      const Complex z = c[r] * basis_->coefficient(r);
      const std::size_t w = mode_wave_[r];
      for (int i = 0; i < d; ++i) vhat_[w * d + i] += z * m.direction[i];
    }
  }

  // Samples v_i (fields 0..vel-1, when vel = d) and d_j v_i (next d*d fields).
  void load_fields(RealBatch& batch, int vel) {
    const int d = grid_.dim();
    batch.clear();
    for (std::size_t w = 0; w < waves_.size(); ++w) {
      const auto& wv = waves_[w];
      for (int i = 0; i < d; ++i) {
        const Complex v = vhat_[w * d + i];
        if (v == Complex{}) continue;
        if (vel) batch.add_mode(static_cast<std::size_t>(i), wv.plus, wv.minus, v);
        for (int j = 0; j < d; ++j)
          batch.add_mode(static_cast<std::size_t>(vel + i * d + j), wv.plus, wv.minus,
                         Complex{0.0, wv.k[j]} * v);
      }
    }
    batch.backward();
  }

  void load_second_derivatives() {
    const int d = grid_.dim();
    if (h_.fields() == 0) h_ = RealBatch(plan_, static_cast<std::size_t>(d * d * (d + 1) / 2));
    h_.clear();
    for (std::size_t w = 0; w < waves_.size(); ++w) {
      const auto& wv = waves_[w];
      for (int i = 0; i < d; ++i) {
        const Complex v = vhat_[w * d + i];
        if (v == Complex{}) continue;
        for (int j = 0; j < d; ++j)
          for (int s = j; s < d; ++s)
            h_.add_mode(hess_slot(i, j, s, d), wv.plus, wv.minus, -wv.k[j] * wv.k[s] * v);
      }
    }
    h_.backward();
  }

  std::shared_ptr<const StokesBasis> basis_;
  FluidParams params_;
  TorusGrid grid_;
  std::shared_ptr<const FftPlan> plan_;
  std::vector<ActiveWave> waves_;
  std::vector<std::size_t> mode_wave_;
  std::vector<Complex> vhat_;
  RealBatch vg_, g_, q_, h_;
};

/// dc/dt at the given state.
inline std::vector<double> galerkin_rhs(const GalerkinState& state, const FluidParams& params) {
  GalerkinSystem sys(state.basis, params);
  return sys.rhs(state.coeffs);
}

}  // namespace plsf

#endif  // PLSF_GALERKIN_HPP
