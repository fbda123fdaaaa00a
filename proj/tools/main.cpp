#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "fe2dyn/runner.hpp"
#include "fe2dyn/verification.hpp"

namespace {

void print_warnings(const fe2dyn::ScenarioConfig& config) {
  for (const std::string& w : config.warnings) std::cerr << "warning: " << w << '\n';
}

int run_command(const std::string& command, const std::string& config_path,
                const fe2dyn::RunOptions& options) {
  const fe2dyn::ScenarioConfig config = fe2dyn::load_config(config_path);
  print_warnings(config);
  const fe2dyn::RunArtifacts artifacts = command == "fe2"
                                             ? fe2dyn::run_fe2(config, options)
                                             : fe2dyn::run_dns_scenario(config, options);
  std::cout << command << ": completed " << artifacts.steps_completed << "/"
            << artifacts.steps_requested << " steps";
  if (!options.out_dir.empty()) std::cout << ", outputs in " << options.out_dir.string();
  std::cout << '\n';
  if (artifacts.crashed) {
    std::cerr << "run failed at step " << artifacts.steps_completed + 1 << ": "
              << artifacts.crash_reason << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fe2dyn: implicit dynamic FE2 homogenization of 1D layered bars"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 1;

  auto add_common = [&](CLI::App* cmd, bool config_required = true) {
    cmd->add_option("--config", config_path, "scenario config (json)")
        ->required(config_required);
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--threads", threads, "worker threads for per-GP micro solves");
  };

  CLI::App* fe2 = app.add_subcommand("fe2", "two-scale FE2 simulation");
  add_common(fe2);
  CLI::App* dns = app.add_subcommand("dns", "single-scale reference simulation");
  add_common(dns);

  CLI::App* compare = app.add_subcommand("compare", "displacement error between two runs");
  std::string run_a, run_b;
  compare->add_option("run_a", run_a, "first run directory (defines the node grid)")
      ->required();
  compare->add_option("run_b", run_b, "second run directory")->required();
  compare->add_option("--out", out_dir, "output directory");

  CLI::App* check = app.add_subcommand("check-tangents", "finite-difference tangent audit");
  add_common(check);
  int at_step = 0;
  int n_gps = 8;
  check->add_option("--step", at_step, "audit after this time step (default: n_steps/2)");
  check->add_option("--gps", n_gps, "number of Gauss points to audit");

  CLI::App* sweep = app.add_subcommand("sweep-rve", "unit-cell and constraint study");
  add_common(sweep);
  std::vector<int> cells = {1, 3, 5, 7};
  std::vector<std::string> constraint_names = {"volume", "fixed_corners"};
  bool with_dns = false;
  sweep->add_option("--cells", cells, "unit cells per RVE to sweep");
  sweep->add_option("--constraints", constraint_names, "constraint modes to sweep");
  sweep->add_flag("--with-dns", with_dns, "also compare each run against a DNS reference");

  CLI::App* accept = app.add_subcommand("acceptance", "run the acceptance criteria suite");
  accept->add_option("--out", out_dir, "output directory");
  accept->add_option("--threads", threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  fe2dyn::RunOptions options;
  options.out_dir = out_dir;
  options.threads = threads;

  try {
    if (fe2->parsed()) return run_command("fe2", config_path, options);
    if (dns->parsed()) return run_command("dns", config_path, options);

    if (compare->parsed()) {
      const fe2dyn::FieldSeries a =
          fe2dyn::read_series_csv(std::filesystem::path(run_a) / "series.csv");
      const fe2dyn::FieldSeries b =
          fe2dyn::read_series_csv(std::filesystem::path(run_b) / "series.csv");
      const fe2dyn::CompareResult result = fe2dyn::compare_series(a, b);
      std::cout << "eps_time = " << fe2dyn::fmt_g17(result.eps_time) << " mm\n";
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        fe2dyn::write_epsilon_csv(std::filesystem::path(out_dir) / "epsilon.csv",
                                  result.times, result.eps);
        fe2dyn::write_text(std::filesystem::path(out_dir) / "summary.md",
                           "# Run comparison\n\n| quantity | value |\n|---|---|\n| "
                           "eps_time (mm) | " +
                               fe2dyn::fmt_g17(result.eps_time) + " |\n");
        fe2dyn::write_text(std::filesystem::path(out_dir) / "summary.csv",
                           "quantity,value\neps_time_mm," +
                               fe2dyn::fmt_g17(result.eps_time) + "\n");
      }
      return 0;
    }

    if (check->parsed()) {
      const fe2dyn::ScenarioConfig config = fe2dyn::load_config(config_path);
      print_warnings(config);
      if (at_step <= 0) at_step = std::max(1, config.time.n_steps / 2);
      const fe2dyn::TangentCheckResult result =
          fe2dyn::check_tangents(config, at_step, n_gps, options);
      std::cout << "audited " << result.rows.size() << " gauss points at step " << at_step
                << ", max rel err = " << fe2dyn::fmt_g17(result.max_rel_err) << '\n';
      return result.max_rel_err < 1e-5 ? 0 : 2;
    }

    if (sweep->parsed()) {
      const fe2dyn::ScenarioConfig config = fe2dyn::load_config(config_path);
      print_warnings(config);
      std::vector<fe2dyn::ConstraintMode> constraints;
      for (const std::string& name : constraint_names) {
        if (name == "volume")
          constraints.push_back(fe2dyn::ConstraintMode::VolumeConstraint);
        else if (name == "fixed_corners")
          constraints.push_back(fe2dyn::ConstraintMode::FixedCorners);
        else
          throw fe2dyn::ConfigError("unknown constraint '" + name + "'");
      }
      const fe2dyn::SweepResult result =
          fe2dyn::sweep_rve(config, cells, constraints, with_dns, options);
      std::cout << fe2dyn::sweep_summary_markdown(result);
      return 0;
    }

    if (accept->parsed()) {
      fe2dyn::VerificationOptions vo;
      vo.threads = threads;
      vo.log = &std::cout;
      const std::vector<fe2dyn::OracleReport> reports = fe2dyn::run_acceptance(vo);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        fe2dyn::write_text(std::filesystem::path(out_dir) / "acceptance.csv",
                           fe2dyn::reports_csv(reports));
        fe2dyn::write_text(std::filesystem::path(out_dir) / "acceptance.md",
                           fe2dyn::reports_markdown(reports));
      }
      for (const fe2dyn::OracleReport& r : reports)
        if (!r.pass) return 2;
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
