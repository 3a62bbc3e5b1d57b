#ifndef PLSF_CLI_HPP
#define PLSF_CLI_HPP

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plsf/checkpoint.hpp"
#include "plsf/config.hpp"
#include "plsf/gap.hpp"
#include "plsf/inequality_lab.hpp"
#include "plsf/initial_data.hpp"
#include "plsf/study.hpp"
#include "plsf/trajectory.hpp"

namespace plsf {

/// Process exit codes.
enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitRuntime = 3 };

using Json = nlohmann::ordered_json;

inline std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

inline SpectralVelocity make_initial_data(const RunConfig& cfg, const TorusGrid& grid) {
  if (cfg.init.kind == "taylor_green") return taylor_green(grid, cfg.init.amplitude);
  if (cfg.init.kind == "random_band")
    return random_band(grid, {cfg.init.band, cfg.init.decay, cfg.init.amplitude, cfg.init.seed});
  auto v = read_checkpoint(cfg.init.path, grid.dealias());
  if (!(v.field().grid() == grid))
    throw ConfigError("init.path: checkpoint grid " + v.field().grid().describe() + " differs from [grid] " +
                      grid.describe());
  return v;
}

inline TimeSpec make_time_spec(const RunConfig& cfg) {
  TimeSpec ts;
  ts.t_end = cfg.time.T;
  ts.sample_dt = cfg.time.sample_dt;
  ts.record_steps = cfg.time.record_steps;
  ts.record_d2 = cfg.galerkin.record_d2;
  ts.control.rtol = cfg.time.rtol;
  ts.control.atol = cfg.time.atol;
  ts.control.dt_min = cfg.time.dt_min;
  ts.control.dt_max = cfg.time.dt_max;
  ts.control.dt_initial = cfg.time.dt_initial;
  return ts;
}

inline bool wants(const RunConfig& cfg, const std::string& format) {
  return std::find(cfg.output.formats.begin(), cfg.output.formats.end(), format) != cfg.output.formats.end();
}

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& suffix) {
  std::filesystem::create_directories(cfg.output.directory);
  return std::filesystem::path(cfg.output.directory) / (cfg.output.prefix + suffix);
}

inline Json stats_json(const IntegratorStats& s) {
  Json j;
  j["accepted"] = s.accepted;
  j["rejected"] = s.rejected;
  j["rhs_evaluations"] = s.rhs_evaluations;
  return j;
}

// ---------------------------------------------------------------------------
// run

struct RunOutcome {
  TrajectoryResult result;
  Json summary;
  bool pass = true;
};

/// Integrates the configured trajectory; the summary lists the energy
/// checks.  Energy monotonicity is allowed 10 rtol E(0) of slack per sample.
inline RunOutcome execute_run(const RunConfig& cfg) {
  const TorusGrid grid = cfg.torus();
  auto basis = std::make_shared<const StokesBasis>(make_basis(grid, cfg.basis_size(grid)));
  const FluidParams fp(cfg.fluid.p, cfg.fluid.mu);
  RunOutcome out;
  out.result = run_trajectory(project_initial_data(make_initial_data(cfg, grid), basis), fp, make_time_spec(cfg));
  const auto& rec = out.result.record;
  Json s;
  s["grid"] = grid.describe();
  s["N"] = rec.n_modes;
  s["p"] = fp.p;
  s["mu"] = fp.mu;
  s["T"] = cfg.time.T;
  s["samples"] = rec.size();
  s["stats"] = stats_json(rec.stats);
  s["energy_initial"] = rec.energy.front();
  s["energy_final"] = rec.energy.back();
  auto failures = Json::array();
  if (rec.size() > 1) {
    const double residual = energy_residual(rec, rec.t.front(), rec.t.back());
    s["energy_residual"] = residual;
    s["energy_residual_relative"] = rec.energy.front() > 0 ? residual / rec.energy.front() : 0.0;
    const double slack = 10.0 * cfg.time.rtol * rec.energy.front();
    std::size_t increases = 0;
    for (std::size_t i = 1; i < rec.size(); ++i)
      if (rec.energy[i] > rec.energy[i - 1] + slack) ++increases;
    s["energy_increases"] = increases;
    if (increases) {
      failures.push_back({{"check", "energy_monotone"}, {"samples", increases}, {"slack", slack}});
      out.pass = false;
    }
  }
  s["failures"] = failures;
  s["pass"] = out.pass;
  out.summary = std::move(s);
  return out;
}

inline int cmd_run(const RunConfig& cfg, std::ostream& log) {
  auto out = execute_run(cfg);
  if (wants(cfg, "csv")) write_trajectory_csv(output_path(cfg, ".csv").string(), out.result.record);
  if (wants(cfg, "checkpoint"))
    write_checkpoint(output_path(cfg, ".ckpt").string(), out.result.final_state.velocity());
  if (wants(cfg, "json")) write_text_file(output_path(cfg, ".json").string(), json_text(out.summary));
  log << "run: N = " << out.result.record.n_modes << ", " << out.result.record.size() << " samples, "
      << out.result.record.stats.accepted << " steps";
  if (out.summary.contains("energy_residual_relative"))
    log << ", energy residual " << out.summary["energy_residual_relative"].get<double>() << " (relative)";
  log << (out.pass ? "" : ", CHECK FAILED") << "\n";
  return out.pass ? kExitPass : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// gap

/// Comma-separated angles; "pi/2-x" stands for pi/2 - x.
inline std::vector<double> parse_alpha_list(const std::string& text) {
  std::vector<double> out;
  std::vector<std::string> errors;
  for (auto tok : detail::split(text, ',')) {
    std::string s = detail::trim(tok);
    double offset = 0.0, sign = 1.0;
    if (s.rfind("pi/2-", 0) == 0) {
      offset = std::numbers::pi / 2;
      sign = -1.0;
      s = s.substr(5);
    }
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
      errors.push_back("--alphas: cannot parse '" + std::string(tok) + "'");
      continue;
    }
    const double a = offset + sign * v;
    if (!(a >= 0.0 && a < std::numbers::pi / 2)) errors.push_back("--alphas: " + std::string(tok) + " outside [0, pi/2)");
    out.push_back(a);
  }
  if (out.empty() && errors.empty()) errors.push_back("--alphas: empty list");
  if (!errors.empty()) throw ConfigError(errors);
  return out;
}

/// Two-form mismatch beyond the energy residual tolerated by the gap check,
/// relative to the largest initial energy of the family.
inline constexpr double kConsistencyTolerance = 1e-12;

inline Json gap_report(const std::vector<TrajectoryRecord>& recs, double s, double t, const std::vector<double>& alphas,
                       bool* pass) {
  if (recs.empty()) throw InsufficientFamilyError("gap: manifest lists no trajectories");
  const double p = recs.front().p;
  const auto ex = exponents(p);
  if (!(ex.gamma > 0.0)) throw DomainError("gap: gamma = 2/(3p-5) must be positive, needs p > 5/3");
  std::vector<const TrajectoryRecord*> ptrs;
  for (const auto& r : recs) ptrs.push_back(&r);
  const auto g = gap_estimate(ptrs, s, t, alphas, ex.gamma);
  Json j = to_json(g);
  double scale = 0.0;
  for (const auto& r : recs) scale = std::max(scale, r.energy.front());
  const bool consistent = g.max_consistency_excess <= kConsistencyTolerance * std::max(1.0, scale);
  const auto mb = measure_bound_check(ptrs, s, t, alphas, ex.beta, ex.gamma);
  Json m;
  m["predicted_slope"] = mb.predicted_slope;
  m["violations"] = mb.violations;
  auto rows = Json::array();
  for (const auto& r : mb.rows)
    rows.push_back({{"alpha", r.alpha}, {"N", r.n_modes}, {"J_measure", r.measure}, {"bound", r.bound}});
  m["rows"] = std::move(rows);
  j["measure_bound"] = std::move(m);
  auto l5 = Json::array();
  for (const auto& r : recs)
    l5.push_back({{"N", r.n_modes},
                  {"value", lemma5_functional(r, ex.zeta)},
                  {"monotone_bound", lemma5_monotone_bound(r, ex.zeta)},
                  {"quadrature_slack", lemma5_quadrature_slack(r, ex.zeta)}});
  j["lemma5"] = std::move(l5);
  auto failures = Json::array();
  if (!consistent) failures.push_back({{"check", "two_form_consistency"}, {"excess", g.max_consistency_excess}});
  if (mb.violations) failures.push_back({{"check", "measure_bound"}, {"violations", mb.violations}});
  j["failures"] = failures;
  *pass = failures.empty();
  j["pass"] = *pass;
  return j;
}

/// Loads every listed trajectory before anything is written.
inline int cmd_gap(const std::string& manifest, double s, double t, const std::vector<double>& alphas,
                   const std::string& out_path, std::ostream& out, std::ostream& log) {
  const auto recs = load_manifest(manifest);
  bool pass = false;
  const Json j = gap_report(recs, s, t, alphas, &pass);
  if (out_path.empty())
    out << json_text(j);
  else
    write_text_file(out_path, json_text(j));
  log << "gap: M_estimate = " << j["M_estimate"].get<double>() << " at alpha = " << j["M_alpha"].get<double>()
      << (pass ? "" : ", CHECK FAILED") << "\n";
  return pass ? kExitPass : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// verify

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s{"lemma1", "friedrichs", "lemma3", "interp", "oo", "ap3"};
  return s;
}

inline std::vector<std::string> parse_suite_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto tok : detail::split(text, ',')) {
    const std::string s = detail::trim(tok);
    if (s.empty()) continue;
    if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
      throw ConfigError("--suites: unknown suite '" + s + "'");
    out.push_back(s);
  }
  return out;
}

inline EnsembleSpec ensemble_spec(const RunConfig& cfg, std::uint64_t seed_offset) {
  EnsembleSpec e;
  e.dim = cfg.grid.dim;
  e.resolution = cfg.grid.M;
  e.length = cfg.grid.L;
  e.band = cfg.verify.band;
  e.decay = cfg.verify.decay;
  e.amplitude = cfg.verify.amplitude;
  e.seed = cfg.verify.seed + seed_offset;
  e.count = cfg.verify.count;
  return e;
}

/// Seed offset of the second, disjoint ensemble used for stability checks.
inline constexpr std::uint64_t kRefreshSeedOffset = 1000003;
/// Allowed relative change of an empirical constant under ensemble refresh.
inline constexpr double kStabilityBand = 0.2;
/// Allowed ratio of empirical constants across mu.
inline constexpr double kMuSpread = 2.0;

inline Json run_suite(const std::string& suite, const RunConfig& cfg, bool* pass) {
  const double p = cfg.fluid.p;
  Json j;
  j["suite"] = suite;
  auto reports = Json::array();
  auto notes = Json::array();
  bool ok = true;
  if (suite == "oo") {
    const auto r = check_oo(10 * cfg.verify.count, cfg.verify.seed);
    reports.push_back(to_json(r));
    ok = r.pass();
  } else {
    const auto a = make_ensemble(ensemble_spec(cfg, 0));
    if (suite == "lemma1") {
      const auto ra = check_lemma1(a, p);
      const auto rb = check_lemma1(make_ensemble(ensemble_spec(cfg, kRefreshSeedOffset)), p, 2.0 * ra.empirical_C);
      reports.push_back(to_json(ra));
      reports.push_back(to_json(rb));
      const double spread = constant_spread(ra.empirical_C, rb.empirical_C);
      j["constant_spread"] = spread;
      ok = rb.pass() && spread <= kStabilityBand;
    } else if (suite == "friedrichs") {
      const double eps = cfg.verify.epsilon;
      const auto f1 = check_friedrichs(a, p, eps);
      const auto f2 = check_friedrichs(a, p, eps / 2);
      for (const auto* f : {&f1, &f2}) {
        Json r = to_json(f->report);
        r["epsilon"] = f->epsilon;
        r["kappa"] = f->kappa;
        r["band_size"] = f->band_size;
        reports.push_back(std::move(r));
      }
      ok = f1.report.pass() && f2.report.pass() && f2.kappa >= f1.kappa;
    } else if (suite == "lemma3") {
      if (!(p > 1.0 && p < 2.0)) {
        notes.push_back("skipped: requires p in (1, 2)");
      } else {
        const auto b = make_ensemble(ensemble_spec(cfg, kRefreshSeedOffset));
        std::vector<double> c1, c4, c2;
        double worst = 0.0;
        for (double mu : {1e-2, 1.0, 1e2}) {
          const auto ra = check_lemma3(a, FluidParams(p, mu));
          const auto rb = check_lemma3(b, FluidParams(p, mu));
          for (const auto* r : {&ra.sd1, &ra.sd4, &ra.sd2}) reports.push_back(to_json(*r));
          c1.push_back(ra.sd1.empirical_C);
          c4.push_back(ra.sd4.empirical_C);
          c2.push_back(ra.sd2.empirical_C);
          worst = std::max({worst, constant_spread(ra.sd1.empirical_C, rb.sd1.empirical_C),
                            constant_spread(ra.sd4.empirical_C, rb.sd4.empirical_C),
                            constant_spread(ra.sd2.empirical_C, rb.sd2.empirical_C)});
        }
        j["constant_spread"] = worst;
        j["mu_spread"] = {family_spread(c1), family_spread(c4), family_spread(c2)};
        ok = worst <= kStabilityBand && family_spread(c1) < kMuSpread && family_spread(c4) < kMuSpread &&
             family_spread(c2) < kMuSpread;
      }
    } else if (suite == "interp") {
      const auto r = check_interpolations(a, p);
      for (const auto* x : {&r.c1, &r.c2, &r.d}) reports.push_back(to_json(*x));
      ok = r.c1.pass() && r.c2.pass() && std::isfinite(r.d.empirical_C);
    } else if (suite == "ap3") {
      if (!(cfg.fluid.mu > 0.0)) {
        notes.push_back("skipped: requires mu > 0");
      } else {
        const auto r = check_ap3(a, FluidParams(p, cfg.fluid.mu));
        reports.push_back(to_json(r));
        ok = r.pass();
      }
    }
  }
  j["reports"] = std::move(reports);
  j["notes"] = std::move(notes);
  j["pass"] = ok;
  *pass = ok;
  return j;
}

inline int cmd_verify(const RunConfig& cfg, const std::vector<std::string>& suites, std::ostream& log) {
  Json j;
  auto arr = Json::array();
  bool all = true;
  if (!suites.empty()) log << std::left << std::setw(12) << "suite" << std::setw(8) << "pass" << "reports\n";
  for (const auto& s : suites) {
    bool ok = false;
    auto r = run_suite(s, cfg, &ok);
    all = all && ok;
    log << std::left << std::setw(12) << s << std::setw(8) << (ok ? "yes" : "NO");
    for (const auto& rep : r["reports"])
      log << rep["id"].get<std::string>() << "(C=" << rep["empirical_C"] << ", viol=" << rep["violations"] << ") ";
    log << "\n";
    arr.push_back(std::move(r));
  }
  j["suites"] = std::move(arr);
  j["pass"] = all;
  if (wants(cfg, "json")) write_text_file(output_path(cfg, "_verify.json").string(), json_text(j));
  return all ? kExitPass : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// converge

inline int cmd_converge(const RunConfig& cfg, std::ostream& log) {
  const TorusGrid grid = cfg.torus();
  ConvergenceSpec spec;
  spec.N_list = cfg.study.N_list;
  spec.q_list = cfg.study.q_list;
  spec.time = make_time_spec(cfg);
  spec.workers = worker_limit();
  const FluidParams fp(cfg.fluid.p, cfg.fluid.mu);
  validate_convergence_spec(spec, fp.p);
  const auto rep = run_convergence_study(make_initial_data(cfg, grid), fp, spec);
  Manifest m;
  m.p = fp.p;
  m.mu = fp.mu;
  for (std::size_t k = 0; k < rep.records.size(); ++k) {
    const std::string name = cfg.output.prefix + "_N" + std::to_string(rep.N_list[k]) + ".csv";
    if (wants(cfg, "csv")) write_trajectory_csv(output_path(cfg, "_N" + std::to_string(rep.N_list[k]) + ".csv").string(),
                                                rep.records[k]);
    m.entries.push_back({rep.N_list[k], name});
  }
  if (wants(cfg, "csv")) write_text_file(output_path(cfg, ".manifest").string(), manifest_text(m));
  if (wants(cfg, "json")) write_text_file(output_path(cfg, "_convergence.json").string(), json_text(to_json(rep)));
  log << "converge: N =";
  for (auto n : rep.N_list) log << ' ' << n;
  log << "; pointwise decreasing at " << rep.pointwise_decreasing_fraction * 100 << "% of samples";
  log << (rep.pass ? "" : ", CHECK FAILED") << "\n";
  return rep.pass ? kExitPass : kExitCheckFailed;
}

}  // namespace plsf

#endif  // PLSF_CLI_HPP
