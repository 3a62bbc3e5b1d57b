#ifndef PLSF_TRAJECTORY_HPP
#define PLSF_TRAJECTORY_HPP

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "plsf/galerkin.hpp"
#include "plsf/integrator.hpp"

namespace plsf {

/// Time series of the scalars a trajectory contributes to the diagnostics.
struct TrajectoryRecord {
  double p = 2.0;
  double mu = 1.0;
  std::size_t n_modes = 0;
  std::vector<double> t, energy, rho, rho_tilde, grad_p_norm, ip, d2_p_norm;
  IntegratorStats stats;

  std::size_t size() const noexcept { return t.size(); }
  bool empty() const noexcept { return t.empty(); }
  bool has_d2() const noexcept { return !d2_p_norm.empty(); }

  void push(double time, const Functionals& f, bool with_d2) {
    t.push_back(time);
    energy.push_back(f.energy);
    rho.push_back(f.rho);
    rho_tilde.push_back(f.rho_tilde);
    grad_p_norm.push_back(f.grad_p_norm);
    ip.push_back(f.ip);
    if (with_d2) d2_p_norm.push_back(f.d2_p_norm);
  }
};

struct TimeSpec {
  double t_end = 1.0;
  double sample_dt = 0.01;
  StepControl control;
  /// Record every accepted step in addition to the cadence samples.
  bool record_steps = true;
  /// Also record ||D^2 v||_p.
  bool record_d2 = false;
};

struct TrajectoryResult {
  TrajectoryRecord record;
  GalerkinState final_state;
};

/// Called with (time, coefficients) at t0 and at every cadence time.
using SampleObserver = std::function<void(double, std::span<const double>)>;

/// Integrates the Galerkin system from `initial` over [t0, t0 + T].  Cadence
/// samples land exactly on t0 + k * sample_dt (and on the end time).
inline TrajectoryResult run_trajectory(const GalerkinState& initial, const FluidParams& params,
                                       const TimeSpec& spec, const SampleObserver& observer = {}) {
  if (!(spec.t_end >= 0.0)) throw DomainError("run_trajectory: T must be >= 0");
  if (!(spec.sample_dt > 0.0)) throw DomainError("run_trajectory: sample_dt must be > 0");
  auto sys = std::make_shared<GalerkinSystem>(initial.basis, params);
  TrajectoryResult out;
  auto& rec = out.record;
  rec.p = params.p;
  rec.mu = params.mu;
  rec.n_modes = initial.size();
  const double t0 = initial.time;
  rec.push(t0, sys->functionals(initial.coeffs, spec.record_d2), spec.record_d2);
  if (observer) observer(t0, initial.coeffs);
  out.final_state = initial;
  if (spec.t_end == 0.0) return out;

  auto rhs = [sys](double, std::span<const double> y, std::span<double> dy) { sys->rhs(y, dy); };
  DormandPrince45 dp(rhs, spec.control);
  dp.reset(t0, initial.coeffs);
  const auto samples = static_cast<long>(std::ceil(spec.t_end / spec.sample_dt - 1e-9));
  for (long k = 1; k <= samples; ++k) {
    const double target = k == samples ? t0 + spec.t_end : t0 + static_cast<double>(k) * spec.sample_dt;
    while (dp.time() < target) {
      dp.step(target);
      if (spec.record_steps || dp.time() == target)
        rec.push(dp.time(), sys->functionals(dp.state(), spec.record_d2), spec.record_d2);
    }
    if (observer) observer(dp.time(), dp.state());
  }
  rec.stats = dp.stats();
  out.final_state.coeffs.assign(dp.state().begin(), dp.state().end());
  out.final_state.time = dp.time();
  return out;
}

// ---------------------------------------------------------------------------
// CSV:  t,energy,rho,rho_tilde,grad_p_norm,Ip[,d2_p_norm]
// Values use the shortest representation that round-trips a double.

namespace detail {

inline void append_double(std::string& out, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw IoError(where + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline std::string trajectory_csv(const TrajectoryRecord& rec) {
  std::string out = "t,energy,rho,rho_tilde,grad_p_norm,Ip";
  if (rec.has_d2()) out += ",d2_p_norm";
  out += '\n';
  for (std::size_t i = 0; i < rec.size(); ++i) {
    for (const auto* col : {&rec.t, &rec.energy, &rec.rho, &rec.rho_tilde, &rec.grad_p_norm, &rec.ip}) {
      if (col != &rec.t) out += ',';
      detail::append_double(out, (*col)[i]);
    }
    if (rec.has_d2()) {
      out += ',';
      detail::append_double(out, rec.d2_p_norm[i]);
    }
    out += '\n';
  }
  return out;
}

inline TrajectoryRecord parse_trajectory_csv(const std::string& text, const std::string& where = "csv") {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw IoError(where + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string base = "t,energy,rho,rho_tilde,grad_p_norm,Ip";
  bool with_d2 = false;
  if (line == base + ",d2_p_norm")
    with_d2 = true;
  else if (line != base)
    throw IoError(where + ": unexpected header '" + line + "'");
  const std::size_t cols = with_d2 ? 7 : 6;
  TrajectoryRecord rec;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != cols)
      throw IoError(where + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                    " columns, got " + std::to_string(f.size()));
    const std::string at = where + ":" + std::to_string(lineno);
    rec.t.push_back(detail::parse_double(f[0], at));
    rec.energy.push_back(detail::parse_double(f[1], at));
    rec.rho.push_back(detail::parse_double(f[2], at));
    rec.rho_tilde.push_back(detail::parse_double(f[3], at));
    rec.grad_p_norm.push_back(detail::parse_double(f[4], at));
    rec.ip.push_back(detail::parse_double(f[5], at));
    if (with_d2) rec.d2_p_norm.push_back(detail::parse_double(f[6], at));
    if (rec.t.size() > 1 && !(rec.t.back() > rec.t[rec.t.size() - 2]))
      throw IoError(at + ": sample times must be strictly increasing");
  }
  return rec;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw IoError("write failed for '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec) {
  write_text_file(path, trajectory_csv(rec));
}

inline TrajectoryRecord read_trajectory_csv(const std::string& path) {
  return parse_trajectory_csv(read_text_file(path), path);
}

// ---------------------------------------------------------------------------
// Manifest: one entry per line, '#' starts a comment.
//   p 1.9
//   mu 1
//   <N> <path>      (path relative to the manifest's directory)

struct ManifestEntry {
  std::size_t n_modes = 0;
  std::string path;
};

struct Manifest {
  double p = 2.0;
  double mu = 1.0;
  std::vector<ManifestEntry> entries;
};

inline std::string manifest_text(const Manifest& m) {
  std::string out = "p ";
  detail::append_double(out, m.p);
  out += "\nmu ";
  detail::append_double(out, m.mu);
  out += '\n';
  for (const auto& e : m.entries) out += std::to_string(e.n_modes) + ' ' + e.path + '\n';
  return out;
}

inline Manifest parse_manifest(const std::string& text, const std::string& where = "manifest") {
  Manifest m;
  bool have_p = false, have_mu = false;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key)) continue;
    const std::string at = where + ":" + std::to_string(lineno);
    if (!(ls >> value) || (ls >> extra)) throw IoError(at + ": expected '<key> <value>'");
    if (key == "p") {
      m.p = detail::parse_double(value, at);
      have_p = true;
    } else if (key == "mu") {
      m.mu = detail::parse_double(value, at);
      have_mu = true;
    } else {
      std::size_t n = 0;
      const auto r = std::from_chars(key.data(), key.data() + key.size(), n);
      if (r.ec != std::errc() || r.ptr != key.data() + key.size())
        throw IoError(at + ": unknown manifest key '" + key + "'");
      m.entries.push_back({n, value});
    }
  }
  if (!have_p || !have_mu) throw IoError(where + ": manifest must set both p and mu");
  return m;
}

/// Loads every trajectory listed in the manifest.  All files are read before
/// anything is returned, so a missing file yields an IoError and nothing else.
inline std::vector<TrajectoryRecord> load_manifest(const std::string& path, Manifest* out = nullptr) {
  const Manifest m = parse_manifest(read_text_file(path), path);
  const auto dir = std::filesystem::path(path).parent_path();
  std::vector<TrajectoryRecord> recs;
  for (const auto& e : m.entries) {
    auto rec = read_trajectory_csv((dir / e.path).string());
    rec.p = m.p;
    rec.mu = m.mu;
    rec.n_modes = e.n_modes;
    recs.push_back(std::move(rec));
  }
  if (out) *out = m;
  return recs;
}

}  // namespace plsf

#endif  // PLSF_TRAJECTORY_HPP
