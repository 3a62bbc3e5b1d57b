#ifndef PLSF_CONFIG_HPP
#define PLSF_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "plsf/basis.hpp"
#include "plsf/error.hpp"
#include "plsf/grid.hpp"

namespace plsf {

struct GridConfig {
  int dim = 2;
  int M = 0;  // required
  double L = 2.0 * std::numbers::pi;
  double dealias = 1.5;
  bool operator==(const GridConfig&) const = default;
};

struct FluidConfig {
  double p = 0.0;  // required
  double mu = 1.0;
  bool operator==(const FluidConfig&) const = default;
};

struct GalerkinConfig {
  /// At most one of N and lambda_cut; neither means the full band.
  std::optional<std::size_t> N;
  std::optional<double> lambda_cut;
  bool record_d2 = false;
  bool operator==(const GalerkinConfig&) const = default;
};

struct TimeConfig {
  double T = 1.0;
  double rtol = 1e-8;
  double atol = 1e-12;
  double dt_min = 1e-12;
  double dt_max = std::numeric_limits<double>::infinity();
  double dt_initial = 0.0;  // 0: automatic
  double sample_dt = 1e-2;
  bool record_steps = true;
  bool operator==(const TimeConfig&) const = default;
};

struct InitConfig {
  std::string kind = "taylor_green";  // taylor_green | random_band | checkpoint
  std::uint64_t seed = 0;
  double band = 4.0;
  double decay = 2.0;
  double amplitude = 1.0;
  std::string path;
  bool operator==(const InitConfig&) const = default;
};

struct OutputConfig {
  std::string directory = ".";
  std::string prefix = "trajectory";
  std::vector<std::string> formats{"csv", "json"};  // csv | json | checkpoint
  bool operator==(const OutputConfig&) const = default;
};

struct StudyConfig {
  std::vector<std::size_t> N_list;
  std::vector<double> q_list{1.0};
  bool operator==(const StudyConfig&) const = default;
};

/// Random-ensemble settings for the verify suites (fields live on [grid]).
struct VerifyConfig {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  double band = 4.0;
  double decay = 2.0;
  double amplitude = 1.0;
  double epsilon = 1e-2;
  bool operator==(const VerifyConfig&) const = default;
};

struct RunConfig {
  GridConfig grid;
  FluidConfig fluid;
  GalerkinConfig galerkin;
  TimeConfig time;
  InitConfig init;
  OutputConfig output;
  StudyConfig study;
  VerifyConfig verify;
  bool operator==(const RunConfig&) const = default;

  TorusGrid torus() const { return TorusGrid(grid.dim, grid.L, grid.M, grid.dealias); }
  /// Basis size selected by [galerkin].
  std::size_t basis_size(const TorusGrid& g) const {
    if (galerkin.N) return *galerkin.N;
    if (galerkin.lambda_cut) return count_modes_up_to(g, *galerkin.lambda_cut);
    return max_basis_size(g);
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Collects conversion and range problems while walking the document.
class ConfigReader {
 public:
  std::vector<std::string> errors;

  bool read(const std::string& at, const std::string& text, double& out) {
    const std::string s = trim(text);
    if (s == "inf") {
      out = std::numeric_limits<double>::infinity();
      return true;
    }
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty()) {
      errors.push_back(at + ": expected a number, got '" + s + "'");
      return false;
    }
    out = v;
    return true;
  }
  template <class I>
    requires std::is_integral_v<I>
  bool read(const std::string& at, const std::string& text, I& out) {
    const std::string s = trim(text);
    I v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty()) {
      errors.push_back(at + ": expected an integer, got '" + s + "'");
      return false;
    }
    out = v;
    return true;
  }
  bool read(const std::string&, const std::string& text, std::string& out) {
    out = trim(text);
    return true;
  }
  bool read(const std::string& at, const std::string& text, bool& out) {
    const std::string s = trim(text);
    if (s == "true" || s == "1") {
      out = true;
    } else if (s == "false" || s == "0") {
      out = false;
    } else {
      errors.push_back(at + ": expected true or false, got '" + s + "'");
      return false;
    }
    return true;
  }
  template <class T>
  bool read(const std::string& at, const std::string& text, std::optional<T>& out) {
    T v{};
    if (!read(at, text, v)) return false;
    out = v;
    return true;
  }
  template <class T>
  bool read(const std::string& at, const std::string& text, std::vector<T>& out) {
    out.clear();
    const std::string s = trim(text);
    if (s.empty()) return true;
    std::size_t start = 0;
    bool ok = true;
    for (;;) {
      const auto comma = s.find(',', start);
      T v{};
      ok = read(at, s.substr(start, comma == std::string::npos ? std::string::npos : comma - start), v) && ok;
      out.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return ok;
  }
};

template <class T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, double>) {
    return format_double(v);
  } else if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else {
    return std::to_string(v);
  }
}

template <class T>
std::string format_value(const std::vector<T>& v) {
  std::string out;
  for (const auto& x : v) {
    if (!out.empty()) out += ',';
    out += format_value(x);
  }
  return out;
}

/// Visits every (section, key, field) of the schema.  One table drives
/// parsing, unknown-key detection and serialization.
template <class Cfg, class Fn>
void visit_schema(Cfg& c, Fn&& fn) {
  fn("grid", "dim", c.grid.dim);
  fn("grid", "M", c.grid.M);
  fn("grid", "L", c.grid.L);
  fn("grid", "dealias", c.grid.dealias);
  fn("fluid", "p", c.fluid.p);
  fn("fluid", "mu", c.fluid.mu);
  fn("galerkin", "N", c.galerkin.N);
  fn("galerkin", "lambda_cut", c.galerkin.lambda_cut);
  fn("galerkin", "record_d2", c.galerkin.record_d2);
  fn("time", "T", c.time.T);
  fn("time", "rtol", c.time.rtol);
  fn("time", "atol", c.time.atol);
  fn("time", "dt_min", c.time.dt_min);
  fn("time", "dt_max", c.time.dt_max);
  fn("time", "dt_initial", c.time.dt_initial);
  fn("time", "sample_dt", c.time.sample_dt);
  fn("time", "record_steps", c.time.record_steps);
  fn("init", "kind", c.init.kind);
  fn("init", "seed", c.init.seed);
  fn("init", "band", c.init.band);
  fn("init", "decay", c.init.decay);
  fn("init", "amplitude", c.init.amplitude);
  fn("init", "path", c.init.path);
  fn("output", "directory", c.output.directory);
  fn("output", "prefix", c.output.prefix);
  fn("output", "formats", c.output.formats);
  fn("study", "N_list", c.study.N_list);
  fn("study", "q_list", c.study.q_list);
  fn("verify", "count", c.verify.count);
  fn("verify", "seed", c.verify.seed);
  fn("verify", "band", c.verify.band);
  fn("verify", "decay", c.verify.decay);
  fn("verify", "amplitude", c.verify.amplitude);
  fn("verify", "epsilon", c.verify.epsilon);
}

inline std::vector<std::string> validate(const RunConfig& c, const std::set<std::string>& present) {
  std::vector<std::string> e;
  auto req = [&](const char* key) {
    if (!present.count(key)) e.push_back(std::string(key) + ": required");
  };
  req("grid.M");
  req("fluid.p");
  if (c.grid.dim != 2 && c.grid.dim != 3) e.push_back("grid.dim: must be 2 or 3");
  if (present.count("grid.M") && (c.grid.M < 8 || c.grid.M % 2 != 0))
    e.push_back("grid.M: must be an even integer >= 8");
  if (!(c.grid.L > 0.0) || !std::isfinite(c.grid.L)) e.push_back("grid.L: must be > 0");
  if (!(c.grid.dealias >= 1.0) || !std::isfinite(c.grid.dealias)) e.push_back("grid.dealias: must be >= 1");
  if (present.count("fluid.p") && !(c.fluid.p > 1.0 && c.fluid.p <= 2.0))
    e.push_back("fluid.p: must lie in (1, 2]");
  if (!(c.fluid.mu >= 0.0) || !std::isfinite(c.fluid.mu)) e.push_back("fluid.mu: must be >= 0");
  if (c.galerkin.N && c.galerkin.lambda_cut) e.push_back("galerkin: set N or lambda_cut, not both");
  if (c.galerkin.N && *c.galerkin.N < 1) e.push_back("galerkin.N: must be >= 1");
  if (c.galerkin.lambda_cut && !(*c.galerkin.lambda_cut > 0.0)) e.push_back("galerkin.lambda_cut: must be > 0");
  const bool grid_ok = (c.grid.dim == 2 || c.grid.dim == 3) && c.grid.M >= 8 && c.grid.M % 2 == 0 &&
                       c.grid.L > 0.0 && std::isfinite(c.grid.L) && c.grid.dealias >= 1.0;
  if (grid_ok && c.galerkin.N) {
    const auto cap = max_basis_size(TorusGrid(c.grid.dim, c.grid.L, c.grid.M, c.grid.dealias));
    if (*c.galerkin.N > cap) e.push_back("galerkin.N: exceeds the grid capacity " + std::to_string(cap));
  }
  if (!(c.time.T >= 0.0) || !std::isfinite(c.time.T)) e.push_back("time.T: must be >= 0");
  if (!(c.time.rtol > 0.0)) e.push_back("time.rtol: must be > 0");
  if (!(c.time.atol >= 0.0)) e.push_back("time.atol: must be >= 0");
  if (!(c.time.dt_min > 0.0)) e.push_back("time.dt_min: must be > 0");
  if (!(c.time.dt_max > c.time.dt_min)) e.push_back("time.dt_max: must exceed dt_min");
  if (!(c.time.dt_initial >= 0.0)) e.push_back("time.dt_initial: must be >= 0");
  if (!(c.time.sample_dt > 0.0) || !std::isfinite(c.time.sample_dt)) e.push_back("time.sample_dt: must be > 0");
  if (c.init.kind != "taylor_green" && c.init.kind != "random_band" && c.init.kind != "checkpoint")
    e.push_back("init.kind: must be taylor_green, random_band or checkpoint");
  if (c.init.kind == "checkpoint" && c.init.path.empty()) e.push_back("init.path: required for kind = checkpoint");
  if (!(c.init.band > 0.0)) e.push_back("init.band: must be > 0");
  if (grid_ok && c.init.band > c.grid.M / 2) e.push_back("init.band: must not exceed M/2");
  if (!std::isfinite(c.init.decay)) e.push_back("init.decay: must be finite");
  if (!(c.init.amplitude >= 0.0) || !std::isfinite(c.init.amplitude)) e.push_back("init.amplitude: must be >= 0");
  for (const auto& f : c.output.formats)
    if (f != "csv" && f != "json" && f != "checkpoint")
      e.push_back("output.formats: unknown format '" + f + "' (csv, json, checkpoint)");
  for (std::size_t i = 1; i < c.study.N_list.size(); ++i)
    if (!(c.study.N_list[i] > c.study.N_list[i - 1])) {
      e.push_back("study.N_list: must be strictly increasing");
      break;
    }
  for (double q : c.study.q_list)
    if (!(q >= 1.0 && q < c.fluid.p)) {
      e.push_back("study.q_list: every q must lie in [1, p), got " + format_double(q));
      break;
    }
  if (c.verify.count < 1) e.push_back("verify.count: must be >= 1");
  if (!(c.verify.band > 0.0)) e.push_back("verify.band: must be > 0");
  if (grid_ok && c.verify.band > c.grid.M / 2) e.push_back("verify.band: must not exceed M/2");
  if (!(c.verify.amplitude > 0.0)) e.push_back("verify.amplitude: must be > 0");
  if (!(c.verify.epsilon > 0.0)) e.push_back("verify.epsilon: must be > 0");
  return e;
}

}  // namespace detail

/// Parses and validates an INI document.  Every problem is collected and
/// reported together in one ConfigError.
inline RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("syntax: line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  detail::ConfigReader reader;
  std::map<std::string, std::set<std::string>> known;
  detail::visit_schema(c, [&](const char* sec, const char* key, auto&) { known[sec].insert(key); });
  std::set<std::string> present;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty() && body.empty()) {
      reader.errors.push_back(section + ": key outside any section");
      continue;
    }
    const auto ks = known.find(section);
    if (ks == known.end()) {
      reader.errors.push_back("[" + section + "]: unknown section");
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!ks->second.count(key)) reader.errors.push_back(section + "." + key + ": unknown key");
      present.insert(section + "." + key);
    }
  }
  detail::visit_schema(c, [&](const char* sec, const char* key, auto& field) {
    const std::string path = std::string(sec) + "." + key;
    if (!present.count(path)) return;
    reader.read(path, tree.get_child(pt::ptree::path_type(path, '.')).data(), field);
  });
  auto errors = std::move(reader.errors);
  for (auto& v : detail::validate(c, present)) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

/// INI text with every key written out; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
  std::string out, current;
  detail::visit_schema(const_cast<RunConfig&>(c), [&](const char* sec, const char* key, auto& field) {
    using T = std::decay_t<decltype(field)>;
    std::string value;
    if constexpr (requires { field.has_value(); }) {
      if (!field) return;
      value = detail::format_value(*field);
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      if (field.empty()) return;
      value = detail::format_value(field);
    } else {
      value = detail::format_value(field);
    }
    if (current != sec) {
      if (!out.empty()) out += '\n';
      out += '[' + std::string(sec) + "]\n";
      current = sec;
    }
    out += std::string(key) + " = " + value + '\n';
  });
  return out;
}

}  // namespace plsf

#endif  // PLSF_CONFIG_HPP
