#include "fe2dyn/runner.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fe2dyn {

namespace {

MacroOptions macro_options(const RunOptions& options) {
  MacroOptions mo;
  mo.tol = options.macro_tol;
  mo.max_iterations = options.macro_max_iterations;
  mo.micro = options.micro;
  mo.threads = options.threads;
  return mo;
}

std::string dump_filename(std::string pattern, int gp, int step) {
  auto replace = [&](const std::string& tag, int value) {
    const size_t pos = pattern.find(tag);
    if (pos != std::string::npos) pattern.replace(pos, tag.size(), std::to_string(value));
  };
  replace("{gp}", gp);
  replace("{step}", step);
  return pattern;
}

/// Per-RVE field dump: total displacement, fluctuation and acceleration of
/// every micro node at the current converged state of one Gauss point.
void write_rve_dump(const std::filesystem::path& path, const MacroModel& model,
                    const MacroState& state, int gp_id) {
  const RveModel& rve = *model.rve_template;
  const GpState& gp = state.gps[gp_id];
  const int e = gp_id / 2;
  const int g = gp_id % 2;
  const ElementBasis basis = element_basis(model.mesh, e);
  const Element& el = model.mesh.elements[e];
  const double u_bar = basis.shape_values[g][0] * state.D(el.node_a) +
                       basis.shape_values[g][1] * state.D(el.node_b);
  const double H_bar = gp.rve.last_inputs.F_bar - 1.0;

  const Eigen::VectorXd fluct = nodal_fluctuations(rve, gp.rve.fluct);
  const Eigen::VectorXd accel = nodal_accelerations(rve, gp.rve, gp.rve.last_inputs);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "node_X_mm,u_total_mm,u_fluct_mm,accel_mm_s2\n";
  for (int n = 0; n < rve.mesh().n_nodes(); ++n) {
    const double X = rve.mesh().node_x[n];
    out << fmt_g17(X) << ',' << fmt_g17(u_bar + H_bar * X + fluct(n)) << ','
        << fmt_g17(fluct(n)) << ',' << fmt_g17(accel(n)) << '\n';
  }
}

void write_common_outputs(const std::filesystem::path& dir, const std::string& command,
                          const ScenarioConfig& config, const RunOptions& options,
                          const RunArtifacts& artifacts) {
  std::filesystem::create_directories(dir);
  write_manifest(dir / "manifest.json", command, config, options.macro_tol,
                 options.micro.tol_rel);
  if (config.outputs.write_series) write_series_csv(dir / "series.csv", artifacts.series);
  if (!config.outputs.snapshot_times.empty())
    write_field_snapshots(dir / "fields.csv", artifacts.series,
                          config.outputs.snapshot_times);
  write_convergence_csv(dir / "convergence.csv", artifacts.reports, config.time.dt);
  write_steps_csv(dir / "steps.csv", artifacts.reports, config.time.dt);
  if (artifacts.crashed)
    write_text(dir / "crash.txt",
               "step " + std::to_string(artifacts.steps_completed + 1) + ": " +
                   artifacts.crash_reason + "\n");
}

}  // namespace

RunArtifacts run_fe2(const ScenarioConfig& config, const RunOptions& options) {
  const MacroModel model = config.make_macro_model();
  MacroState state = make_macro_state(model);
  const MacroOptions mo = macro_options(options);

  RunArtifacts artifacts;
  artifacts.steps_requested = config.time.n_steps;
  artifacts.series.node_x = model.mesh.node_x;
  artifacts.series.source = "fe2";
  artifacts.series.times.push_back(0.0);
  artifacts.series.values.push_back(state.D);

  const bool dumps = !options.out_dir.empty() && !config.outputs.rve_dump_gps.empty();
  if (dumps) std::filesystem::create_directories(options.out_dir);

  for (int step_idx = 1; step_idx <= config.time.n_steps; ++step_idx) {
    const double t = step_idx * config.time.dt;
    try {
      artifacts.reports.push_back(step(model, state, t, mo));
    } catch (const std::runtime_error& err) {
      artifacts.crashed = true;
      artifacts.crash_reason = err.what();
      break;
    }
    artifacts.steps_completed = step_idx;
    artifacts.series.times.push_back(t);
    artifacts.series.values.push_back(state.D);

    if (dumps &&
        std::count(config.outputs.rve_dump_steps.begin(),
                   config.outputs.rve_dump_steps.end(), step_idx) > 0) {
      for (int gp : config.outputs.rve_dump_gps) {
        if (gp < 0 || gp >= static_cast<int>(state.gps.size()))
          throw ConfigError("rve_dump_gps entry out of range");
        write_rve_dump(
            options.out_dir / dump_filename(config.outputs.rve_dump_pattern, gp, step_idx),
            model, state, gp);
      }
    }
  }

  if (!options.out_dir.empty())
    write_common_outputs(options.out_dir, "fe2", config, options, artifacts);
  return artifacts;
}

RunArtifacts run_dns_scenario(const ScenarioConfig& config, const RunOptions& options) {
  const DnsModel model = config.make_dns_model();
  DnsOptions dns_options;
  dns_options.tol = options.macro_tol;
  dns_options.max_iterations = options.macro_max_iterations;

  RunArtifacts artifacts;
  artifacts.steps_requested = config.time.n_steps;
  try {
    DnsResult result = run_dns(model, config.time.n_steps, dns_options);
    artifacts.series = std::move(result.series);
    artifacts.reports = std::move(result.reports);
    artifacts.steps_completed = result.steps_completed;
  } catch (const std::runtime_error& err) {
    artifacts.crashed = true;
    artifacts.crash_reason = err.what();
  }

  if (!options.out_dir.empty())
    write_common_outputs(options.out_dir, "dns", config, options, artifacts);
  return artifacts;
}

CompareResult compare_series(const FieldSeries& a, const FieldSeries& b) {
  CompareResult result;
  result.times = a.times;
  result.eps.reserve(a.n_times());
  for (int j = 0; j < a.n_times(); ++j) result.eps.push_back(epsilon(a, b, j));
  result.eps_time = 0.0;
  for (double e : result.eps) result.eps_time += e;
  result.eps_time /= static_cast<double>(result.eps.size());
  return result;
}

TangentCheckResult check_tangents(const ScenarioConfig& config, int at_step, int n_gps,
                                  const RunOptions& options) {
  if (at_step < 1 || at_step > config.time.n_steps)
    throw ConfigError("check-tangents step outside the scenario range");

  const MacroModel model = config.make_macro_model();
  MacroState state = make_macro_state(model);
  MacroOptions mo = macro_options(options);
  for (int step_idx = 1; step_idx < at_step; ++step_idx)
    step(model, state, step_idx * config.time.dt, mo);
  mo.commit = false;  // leave the audited step's micro states uncommitted
  step(model, state, at_step * config.time.dt, mo);

  // Audit the most dynamically loaded Gauss points (largest |F_bar_ddot|).
  std::vector<int> order(state.gps.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(state.gps[a].rve.last_inputs.F_bar_ddot) >
           std::abs(state.gps[b].rve.last_inputs.F_bar_ddot);
  });
  n_gps = std::min<int>(n_gps, static_cast<int>(order.size()));

  TangentCheckResult result;
  for (int i = 0; i < n_gps; ++i) {
    const int gp = order[i];
    AuditRow row;
    row.time = at_step * config.time.dt;
    row.gp = gp;
    row.audit = audit_tangents(*model.rve_template, state.gps[gp].rve, model.params);
    result.max_rel_err = std::max(result.max_rel_err, row.audit.max_rel_err());
    result.rows.push_back(std::move(row));
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const AuditRow& a, const AuditRow& b) { return a.gp < b.gp; });

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    std::ofstream out(options.out_dir / "tangent_audit.csv");
    out << "time_s,gp_id,A_PF,A_Pu,A_fF,A_fu,fd_A_PF,fd_A_Pu,fd_A_fF,fd_A_fu,"
           "rel_err_PF,rel_err_Pu,rel_err_fF,rel_err_fu\n";
    for (const AuditRow& row : result.rows) {
      const TangentAudit& a = row.audit;
      out << fmt_g17(row.time) << ',' << row.gp << ',' << fmt_g17(a.closed.A_PF) << ','
          << fmt_g17(a.closed.A_Pu) << ',' << fmt_g17(a.closed.A_fF) << ','
          << fmt_g17(a.closed.A_fu) << ',' << fmt_g17(a.fd_A_PF) << ','
          << fmt_g17(a.fd_A_Pu) << ',' << fmt_g17(a.fd_A_fF) << ',' << fmt_g17(a.fd_A_fu)
          << ',' << fmt_g17(a.rel_err_PF) << ',' << fmt_g17(a.rel_err_Pu) << ','
          << fmt_g17(a.rel_err_fF) << ',' << fmt_g17(a.rel_err_fu) << '\n';
    }
    write_manifest(options.out_dir / "manifest.json", "check-tangents", config,
                   options.macro_tol, options.micro.tol_rel);
  }
  return result;
}

SweepResult sweep_rve(const ScenarioConfig& base, const std::vector<int>& cells,
                      const std::vector<ConstraintMode>& constraints, bool with_dns,
                      const RunOptions& options) {
  SweepResult result;
  RunOptions quiet = options;
  quiet.out_dir.clear();

  std::optional<FieldSeries> dns_series;
  if (with_dns) dns_series = run_dns_scenario(base, quiet).series;

  for (ConstraintMode constraint : constraints) {
    for (int n_cells : cells) {
      std::array<std::optional<FieldSeries>, 2> completed;  // [A, B]
      for (UnitCell cell : {UnitCell::A, UnitCell::B}) {
        ScenarioConfig config = base;
        config.rve.unit_cell = cell;
        config.rve.n_cells = n_cells;
        config.rve.constraint = constraint;
        config.validate();

        const RunArtifacts artifacts = run_fe2(config, quiet);
        RunOutcome outcome;
        outcome.unit_cell = to_string(cell);
        outcome.constraint = to_string(constraint);
        outcome.n_cells = n_cells;
        outcome.steps_completed = artifacts.steps_completed;
        outcome.steps_requested = artifacts.steps_requested;
        outcome.crashed = artifacts.crashed;
        result.outcomes.push_back(outcome);

        const bool full = !artifacts.crashed &&
                          artifacts.steps_completed == artifacts.steps_requested;
        if (full) completed[cell == UnitCell::A ? 0 : 1] = artifacts.series;
        if (full && dns_series) {
          SweepEpsRow row;
          row.constraint = to_string(cell) + "_vs_dns_" + to_string(constraint);
          row.n_cells = n_cells;
          row.eps_time_ab = compare_series(artifacts.series, *dns_series).eps_time;
          row.valid = true;
          result.eps_vs_dns_rows.push_back(row);
        }
      }
      SweepEpsRow row;
      row.constraint = to_string(constraint);
      row.n_cells = n_cells;
      if (completed[0] && completed[1]) {
        row.eps_time_ab = compare_series(*completed[0], *completed[1]).eps_time;
        row.valid = true;
      }
      result.eps_rows.push_back(row);
    }
  }

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    write_robustness_csv(options.out_dir / "robustness.csv", result.outcomes);
    std::ofstream out(options.out_dir / "sweep_epsilon.csv");
    out << "constraint,n_cells,eps_time_AB_mm,valid\n";
    for (const SweepEpsRow& row : result.eps_rows)
      out << row.constraint << ',' << row.n_cells << ','
          << (row.valid ? fmt_g17(row.eps_time_ab) : std::string("")) << ','
          << (row.valid ? 1 : 0) << '\n';
    if (!result.eps_vs_dns_rows.empty()) {
      std::ofstream dns_out(options.out_dir / "sweep_epsilon_vs_dns.csv");
      dns_out << "run,n_cells,eps_time_mm\n";
      for (const SweepEpsRow& row : result.eps_vs_dns_rows)
        dns_out << row.constraint << ',' << row.n_cells << ',' << fmt_g17(row.eps_time_ab)
                << '\n';
    }
    write_text(options.out_dir / "summary.md", sweep_summary_markdown(result));
    write_manifest(options.out_dir / "manifest.json", "sweep-rve", base,
                   options.macro_tol, options.micro.tol_rel);
  }
  return result;
}

std::string sweep_summary_markdown(const SweepResult& result) {
  std::ostringstream md;
  md << "# RVE sweep\n\n## Displacement error between unit cells A and B\n\n";
  md << "| constraint | n_cells | eps_time (mm) |\n|---|---|---|\n";
  for (const SweepEpsRow& row : result.eps_rows)
    md << "| " << row.constraint << " | " << row.n_cells << " | "
       << (row.valid ? fmt_g17(row.eps_time_ab) : std::string("n/a (run crashed)"))
       << " |\n";
  if (!result.eps_vs_dns_rows.empty()) {
    md << "\n## Displacement error against DNS\n\n| run | n_cells | eps_time (mm) "
          "|\n|---|---|---|\n";
    for (const SweepEpsRow& row : result.eps_vs_dns_rows)
      md << "| " << row.constraint << " | " << row.n_cells << " | "
         << fmt_g17(row.eps_time_ab) << " |\n";
  }
  md << "\n## Completed steps\n\n| unit cell | constraint | n_cells | steps |\n"
        "|---|---|---|---|\n";
  for (const RunOutcome& o : result.outcomes)
    md << "| " << o.unit_cell << " | " << o.constraint << " | " << o.n_cells << " | "
       << o.steps_completed << "/" << o.steps_requested << (o.crashed ? " (crashed)" : "")
       << " |\n";
  return md.str();
}

}  // namespace fe2dyn
