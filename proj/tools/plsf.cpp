#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "plsf/cli.hpp"

namespace {

int report_error(const char* kind, const std::exception& e, int code,
                 const std::vector<std::string>& violations = {}) {
  plsf::Json j;
  j["error"] = kind;
  j["message"] = e.what();
  if (!violations.empty()) j["violations"] = violations;
  std::cerr << j.dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galerkin experiments for power-law fluids on the periodic box"};
  app.require_subcommand(1);

  std::string config_path, manifest_path, out_path, alphas_text, suites_text;
  double s = 0.0, t = 0.0;

  auto* run = app.add_subcommand("run", "integrate one trajectory and write its artifacts");
  run->add_option("config", config_path, "INI config")->required();

  auto* gap = app.add_subcommand("gap", "gap diagnostics over a manifest of trajectories");
  gap->add_option("manifest", manifest_path, "manifest listing '<N> <csv>' lines")->required();
  gap->add_option("--s", s, "window start")->required();
  gap->add_option("--t", t, "window end")->required();
  gap->add_option("--alphas", alphas_text, "comma-separated angles in [0, pi/2); 'pi/2-x' allowed")->required();
  gap->add_option("--out", out_path, "write the JSON report here instead of stdout");

  auto* verify = app.add_subcommand("verify", "randomized inequality suites");
  verify->add_option("config", config_path, "INI config")->required();
  verify->add_option("--suites", suites_text, "comma-separated subset of lemma1,friedrichs,lemma3,interp,oo,ap3");

  auto* converge = app.add_subcommand("converge", "convergence study over [study] N_list");
  converge->add_option("config", config_path, "INI config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? plsf::kExitPass : plsf::kExitUsage;
  }

  try {
    if (*gap)
      return plsf::cmd_gap(manifest_path, s, t, plsf::parse_alpha_list(alphas_text), out_path, std::cout, std::cerr);
    const auto cfg = plsf::parse_config(plsf::read_text_file(config_path));
    if (*run) return plsf::cmd_run(cfg, std::cout);
    if (*verify) return plsf::cmd_verify(cfg, plsf::parse_suite_list(suites_text), std::cout);
    return plsf::cmd_converge(cfg, std::cout);
  } catch (const plsf::ConfigError& e) {
    return report_error("config", e, plsf::kExitUsage, e.violations());
  } catch (const plsf::DomainError& e) {
    return report_error("precondition", e, plsf::kExitUsage);
  } catch (const plsf::CapacityError& e) {
    return report_error("capacity", e, plsf::kExitUsage);
  } catch (const plsf::ShapeError& e) {
    return report_error("shape", e, plsf::kExitUsage);
  } catch (const plsf::InsufficientFamilyError& e) {
    return report_error("family", e, plsf::kExitUsage);
  } catch (const plsf::StiffnessError& e) {
    return report_error("stiffness", e, plsf::kExitRuntime);
  } catch (const plsf::IoError& e) {
    return report_error("io", e, plsf::kExitRuntime);
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("io", e, plsf::kExitRuntime);
  } catch (const std::exception& e) {
    return report_error("runtime", e, plsf::kExitRuntime);
  }
}
