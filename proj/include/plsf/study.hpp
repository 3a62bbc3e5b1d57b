#ifndef PLSF_STUDY_HPP
#define PLSF_STUDY_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "plsf/exponents.hpp"
#include "plsf/gap.hpp"
#include "plsf/trajectory.hpp"

namespace plsf {

/// Workers allowed by PLSF_THREADS (a positive integer), otherwise the
/// hardware concurrency.
inline unsigned worker_limit() {
  if (const char* env = std::getenv("PLSF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(0..n-1) on up to `workers` threads.  Results must be written by
/// index; the exception of the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < n;) try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct ConvergenceSpec {
  std::vector<std::size_t> N_list;  // strictly increasing, >= 3 entries; the last is the reference
  std::vector<double> q_list{1.0};  // each in [1, p)
  TimeSpec time;
  unsigned workers = 1;
};

struct ConvergenceReport {
  double p = 0.0, mu = 0.0;
  std::vector<std::size_t> N_list;
  std::vector<double> q_list;
  std::vector<double> sample_times;
  /// e[qi][k] = (int_0^T ||grad(v^N_k - v^ref)||_p^q dt)^(1/q), k over the non-reference N.
  std::vector<std::vector<double>> e;
  std::vector<bool> e_decreasing;  // per q: strictly decreasing in N
  /// deviation[k][i] = | ||grad v^N_k(t_i)||_2 - ||grad v^ref(t_i)||_2 |.
  std::vector<std::vector<double>> deviation;
  double pointwise_decreasing_fraction = 0.0;
  /// histogram[k][b]: samples with log10(deviation) in [b - 16, b - 15); b = 0 also holds exact zeros.
  std::vector<std::vector<std::size_t>> histogram;
  double beta = 0.0;
  std::vector<double> beta_integral;  // int ||grad v^N||_2^beta dt, every N
  std::vector<TrajectoryRecord> records;
  bool pass = false;  // e decreasing for every q and the pointwise fraction >= kPointwiseFraction
};

/// Share of sample times at which the pointwise deviations must decrease in N.
inline constexpr double kPointwiseFraction = 0.9;
inline constexpr int kHistogramBins = 17;

inline void validate_convergence_spec(const ConvergenceSpec& spec, double p) {
  if (spec.N_list.size() < 3)
    throw DomainError("convergence study: N_list needs at least 3 entries, got " + std::to_string(spec.N_list.size()));
  for (std::size_t i = 1; i < spec.N_list.size(); ++i)
    if (!(spec.N_list[i] > spec.N_list[i - 1])) throw DomainError("convergence study: N_list must be strictly increasing");
  if (spec.q_list.empty()) throw DomainError("convergence study: q_list is empty");
  for (double q : spec.q_list)
    if (!(q >= 1.0 && q < p))
      throw DomainError("convergence study: q = " + std::to_string(q) +
                        " outside [1, p); strong convergence is only claimed for q < p");
}

inline ConvergenceReport run_convergence_study(const SpectralVelocity& v0, const FluidParams& params,
                                               const ConvergenceSpec& spec) {
  validate_convergence_spec(spec, params.p);
  const auto& grid = v0.field().grid();
  const std::size_t nn = spec.N_list.size();
  if (spec.N_list.back() > max_basis_size(grid))
    throw CapacityError("convergence study: reference N exceeds the grid capacity", max_basis_size(grid));
  auto ref_basis = std::make_shared<const StokesBasis>(make_basis(grid, spec.N_list.back()));

  ConvergenceReport rep;
  rep.p = params.p;
  rep.mu = params.mu;
  rep.N_list = spec.N_list;
  rep.q_list = spec.q_list;
  rep.records.resize(nn);
  std::vector<std::vector<std::vector<double>>> snaps(nn);  // [k][i] coefficients at cadence times
  std::vector<std::vector<double>> times(nn);

  parallel_for(nn, spec.workers, [&](std::size_t k) {
    auto basis = std::make_shared<const StokesBasis>(make_basis(grid, spec.N_list[k]));
    const auto init = project_initial_data(v0, basis);
    auto res = run_trajectory(init, params, spec.time, [&](double t, std::span<const double> c) {
      times[k].push_back(t);
      snaps[k].emplace_back(c.begin(), c.end());
    });
    rep.records[k] = std::move(res.record);
  });
  rep.sample_times = times.back();
  const std::size_t ns = rep.sample_times.size();

  // Spatial error norms against the reference, via the reference system.
  GalerkinSystem ref_sys(ref_basis, params);
  const std::size_t nref = spec.N_list.back();
  std::vector<std::vector<double>> err_p(nn - 1, std::vector<double>(ns));
  std::vector<double> diff(nref);
  for (std::size_t k = 0; k + 1 < nn; ++k)
    for (std::size_t i = 0; i < ns; ++i) {
      const auto& a = snaps[k][i];
      const auto& r = snaps.back()[i];
      for (std::size_t j = 0; j < nref; ++j) diff[j] = r[j] - (j < a.size() ? a[j] : 0.0);
      err_p[k][i] = ref_sys.grad_lq_norm(diff, params.p);
    }
  rep.e.assign(spec.q_list.size(), std::vector<double>(nn - 1));
  for (std::size_t qi = 0; qi < spec.q_list.size(); ++qi) {
    const double q = spec.q_list[qi];
    bool dec = true;
    for (std::size_t k = 0; k + 1 < nn; ++k) {
      std::vector<double> f(ns);
      for (std::size_t i = 0; i < ns; ++i) f[i] = std::pow(err_p[k][i], q);
      rep.e[qi][k] = std::pow(detail::trapezoid(rep.sample_times, f), 1.0 / q);
      if (k > 0 && !(rep.e[qi][k] < rep.e[qi][k - 1])) dec = false;
    }
    rep.e_decreasing.push_back(dec);
  }

  // Pointwise gradient-norm deviations.
  auto grad_norm = [&](const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) s += (*ref_basis)[j].eigenvalue * c[j] * c[j];
    return std::sqrt(s);
  };
  rep.deviation.assign(nn - 1, std::vector<double>(ns));
  rep.histogram.assign(nn - 1, std::vector<std::size_t>(kHistogramBins, 0));
  std::size_t decreasing = 0;
  for (std::size_t i = 0; i < ns; ++i) {
    const double ref = grad_norm(snaps.back()[i]);
    bool dec = true;
    for (std::size_t k = 0; k + 1 < nn; ++k) {
      const double d = std::abs(grad_norm(snaps[k][i]) - ref);
      rep.deviation[k][i] = d;
      const int b = d > 0.0 ? std::clamp(static_cast<int>(std::floor(std::log10(d))) + 16, 0, kHistogramBins - 1) : 0;
      ++rep.histogram[k][static_cast<std::size_t>(b)];
      if (k > 0 && !(d < rep.deviation[k - 1][i] || d == 0.0)) dec = false;
    }
    if (dec) ++decreasing;
  }
  rep.pointwise_decreasing_fraction = ns ? static_cast<double>(decreasing) / static_cast<double>(ns) : 0.0;

  rep.beta = exponents(params.p).beta;
  for (const auto& rec : rep.records) {
    std::vector<double> f(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) f[i] = std::pow(rec.rho[i], 0.5 * rep.beta);
    rep.beta_integral.push_back(detail::trapezoid(rec.t, f));
  }
  rep.pass = std::all_of(rep.e_decreasing.begin(), rep.e_decreasing.end(), [](bool b) { return b; }) &&
             rep.pointwise_decreasing_fraction >= kPointwiseFraction;
  return rep;
}

inline nlohmann::ordered_json to_json(const ConvergenceReport& r) {
  nlohmann::ordered_json j;
  j["p"] = r.p;
  j["mu"] = r.mu;
  j["N_list"] = r.N_list;
  j["reference_N"] = r.N_list.back();
  auto e = nlohmann::ordered_json::array();
  for (std::size_t qi = 0; qi < r.q_list.size(); ++qi) {
    nlohmann::ordered_json row;
    row["q"] = r.q_list[qi];
    row["e_N"] = r.e[qi];
    row["strictly_decreasing"] = static_cast<bool>(r.e_decreasing[qi]);
    e.push_back(std::move(row));
  }
  j["errors"] = std::move(e);
  j["pointwise_decreasing_fraction"] = r.pointwise_decreasing_fraction;
  j["pointwise_histogram_log10_from"] = -16;
  j["pointwise_histogram"] = r.histogram;
  j["beta"] = r.beta;
  j["beta_integral"] = r.beta_integral;
  j["pass"] = r.pass;
  return j;
}

}  // namespace plsf

#endif  // PLSF_STUDY_HPP
