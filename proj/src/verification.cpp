#include "fe2dyn/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "fe2dyn/runner.hpp"

namespace fe2dyn {

namespace {

constexpr ToleranceEntry kTolerances[] = {
    {"tangent_audit_rel_err", 1e-5, "max"},
    {"quadratic_order_fraction", 0.95, "min"},
    {"constraint_avg_fluct_rel", 1e-10, "max"},
    {"homogeneous_equiv_rel_umax", 1e-8, "max"},
    {"reuss_static_rel_err", 1e-8, "max"},
    {"unit_cell_trend_decrease", 1.0, "min"},
    {"fe2_vs_dns_eps_rel_umax", 0.05, "max"},
    {"robustness_ordering", 1.0, "min"},
    {"hill_mandel_gap", 1e-8, "max"},
    {"dns_wave_speed_rel_err", 0.05, "max"},
};

double tol(const char* name) {
  for (const ToleranceEntry& e : kTolerances)
    if (std::string(name) == e.name) return e.value;
  throw std::logic_error(std::string("unknown tolerance ") + name);
}

OracleReport make_report(const std::string& name, double measured, double oracle,
                         const char* tol_name, std::string note = "") {
  OracleReport r;
  r.name = name;
  r.measured = measured;
  r.oracle = oracle;
  r.tolerance = tol(tol_name);
  for (const ToleranceEntry& e : kTolerances)
    if (std::string(tol_name) == e.name) r.kind = e.kind;
  r.pass = r.kind == "min" ? measured >= r.tolerance : measured <= r.tolerance;
  r.note = std::move(note);
  return r;
}

// Desk-scale variant of the consistency experiment: 1 m bar, 30 macro
// elements, two-phase laminate with 10 mm layers, 100 implicit steps.
ScenarioConfig desk_fig4() {
  ScenarioConfig c;
  c.geometry = {1000.0, 10.0, 0.5, 30};
  c.phases = {2e3, 2e5, 1e3 * kDensityKgM3ToTonneMm3, 1e5 * kDensityKgM3ToTonneMm3,
              MaterialLaw::StVenantKirchhoff};
  c.load = {10.0, 2e-3};
  c.time = {5e-5, 100};
  c.rve = {UnitCell::A, 1, ConstraintMode::VolumeConstraint, FLinkMode::PeriodicBC};
  c.validate();
  return c;
}

// Smaller bar for the unit-cell sweep: 2 m, 2.5 mm layers, 20 mm macro
// elements.
ScenarioConfig desk_sweep() {
  ScenarioConfig c;
  c.geometry = {2000.0, 2.5, 0.25, 100};
  c.phases = {2e3, 2e5, 1e3 * kDensityKgM3ToTonneMm3, 1e5 * kDensityKgM3ToTonneMm3,
              MaterialLaw::StVenantKirchhoff};
  c.load = {10.0, 1e-3};
  c.time = {2e-5, 100};
  c.rve = {UnitCell::A, 1, ConstraintMode::VolumeConstraint, FLinkMode::PeriodicBC};
  c.validate();
  return c;
}

struct InstrumentedRun {
  FieldSeries series;
  std::vector<StepReport> reports;
  double max_avg_fluct_rel = 0.0;  // max over steps/GPs of |<u~>|/V
};

InstrumentedRun instrumented_fe2(const ScenarioConfig& config, int threads) {
  const MacroModel model = config.make_macro_model();
  MacroState state = make_macro_state(model);
  MacroOptions mo;
  mo.threads = threads;

  InstrumentedRun run;
  run.series.node_x = model.mesh.node_x;
  run.series.source = "fe2";
  run.series.times.push_back(0.0);
  run.series.values.push_back(state.D);

  const double volume = model.rve_template->volume();
  for (int s = 1; s <= config.time.n_steps; ++s) {
    run.reports.push_back(step(model, state, s * config.time.dt, mo));
    run.series.times.push_back(s * config.time.dt);
    run.series.values.push_back(state.D);
    for (const GpState& gp : state.gps)
      run.max_avg_fluct_rel =
          std::max(run.max_avg_fluct_rel,
                   std::abs(fluctuation_average(*model.rve_template, gp.rve)) / volume);
  }
  return run;
}

struct UncommittedState {
  MacroModel model;
  MacroState state;
};

UncommittedState uncommitted_at_step(const ScenarioConfig& config, int at_step,
                                     int threads) {
  UncommittedState u{config.make_macro_model(), {}};
  u.state = make_macro_state(u.model);
  MacroOptions mo;
  mo.threads = threads;
  for (int s = 1; s < at_step; ++s) step(u.model, u.state, s * config.time.dt, mo);
  mo.commit = false;
  step(u.model, u.state, at_step * config.time.dt, mo);
  return u;
}

std::vector<int> most_dynamic_gps(const MacroState& state, int count) {
  std::vector<int> order(state.gps.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(state.gps[a].rve.last_inputs.F_bar_ddot) >
           std::abs(state.gps[b].rve.last_inputs.F_bar_ddot);
  });
  order.resize(std::min<size_t>(order.size(), count));
  return order;
}

OracleReport criterion_tangent_audit(const UncommittedState& u) {
  const std::vector<int> gps = most_dynamic_gps(u.state, 6);
  double max_err = 0.0;
  for (int gp : gps) {
    const TangentAudit audit =
        audit_tangents(*u.model.rve_template, u.state.gps[gp].rve, u.model.params);
    max_err = std::max(max_err, audit.max_rel_err());
  }
  return make_report("1 consistent-tangent audit (4 moduli vs FD, " +
                         std::to_string(gps.size()) + " states)",
                     max_err, 0.0, "tangent_audit_rel_err");
}

OracleReport criterion_quadratic_order(const InstrumentedRun& run) {
  int eligible = 0;
  int quadratic = 0;
  for (const StepReport& report : run.reports) {
    const OrderEstimate est = convergence_order(report.update_norms);
    if (!est.defined) continue;
    ++eligible;
    if (est.p >= 1.7) ++quadratic;
  }
  const double fraction = eligible > 0 ? static_cast<double>(quadratic) / eligible : 0.0;
  std::ostringstream note;
  note << quadratic << "/" << eligible << " fit-eligible steps with p >= 1.7 ("
       << run.reports.size() << " steps total)";
  return make_report("2 quadratic macro convergence", fraction, 1.0,
                     "quadratic_order_fraction", note.str());
}

OracleReport criterion_constraint(const InstrumentedRun& run) {
  return make_report("3 volume-constraint satisfaction |<u~>|/V", run.max_avg_fluct_rel,
                     0.0, "constraint_avg_fluct_rel");
}

OracleReport criterion_homogeneous_equivalence(int threads) {
  // Single-phase micro structure on a tiny RVE; the FE2 trajectory must
  // reproduce a single-scale solve on the same macro mesh.
  const double u_max = 10.0;
  const NewmarkParams params{0.25, 0.5, 5e-5};
  const ImpactLoad load{u_max, 2e-3};
  const MaterialPhase phase{2e3, 1e3 * kDensityKgM3ToTonneMm3,
                            MaterialLaw::StVenantKirchhoff};

  MacroModel model;
  model.mesh = build_uniform_mesh(0.0, 1000.0, 30);
  model.params = params;
  model.load = load;
  model.rve_template = std::make_shared<RveModel>(
      build_rve_mesh(UnitCell::A, 1, 0.01, 0.0025), std::vector<MaterialPhase>{phase, phase},
      ConstraintMode::VolumeConstraint, FLinkMode::PeriodicBC, params);

  DnsModel reference;
  reference.mesh = build_uniform_mesh(0.0, 1000.0, 30);
  reference.phases = {phase, phase};
  reference.params = params;
  reference.load = load;

  const int n_steps = 200;
  MacroOptions mo;
  mo.tol = 1e-11;
  mo.threads = threads;
  DnsOptions dns_options;
  dns_options.tol = 1e-11;

  MacroState state = make_macro_state(model);
  const DnsResult oracle = run_dns(reference, n_steps, dns_options);

  double max_diff = 0.0;
  for (int s = 1; s <= n_steps; ++s) {
    step(model, state, s * params.dt, mo);
    max_diff = std::max(max_diff, (state.D - oracle.series.values[s]).cwiseAbs().maxCoeff());
  }
  return make_report("4 homogeneous FE2 = single-scale trajectory", max_diff / u_max, 0.0,
                     "homogeneous_equiv_rel_umax", "max |du|/u_max over 200 steps");
}

OracleReport criterion_reuss(int /*threads*/) {
  const double expected = 2.0 / (1.0 / 2e3 + 1.0 / 2e5);
  const NewmarkParams params{0.25, 0.5, 1.0};
  double worst = 0.0;
  for (double l_e : {2.0, 1.0, 0.5}) {
    const std::vector<MaterialPhase> phases = {{2e3, 0.0, MaterialLaw::StVenantKirchhoff},
                                               {2e5, 0.0, MaterialLaw::StVenantKirchhoff}};
    const RveModel model(build_rve_mesh(UnitCell::A, 1, 10.0, l_e), phases,
                         ConstraintMode::VolumeConstraint, FLinkMode::PeriodicBC, params);
    RveState state = make_state(model);
    solve_micro(model, state, MicroLoad{});
    const TangentSet t = homogenize(model, state, params);
    worst = std::max(worst, std::abs(t.A_PF - expected) / expected);
  }
  return make_report("5 static Reuss modulus, l_E in {l_M/5, l_M/10, l_M/20}", worst, 0.0,
                     "reuss_static_rel_err");
}

OracleReport criterion_unit_cell_trend(const SweepResult& sweep) {
  double eps1 = -1.0, eps3 = -1.0;
  for (const SweepEpsRow& row : sweep.eps_rows) {
    if (row.constraint != "volume" || !row.valid) continue;
    if (row.n_cells == 1) eps1 = row.eps_time_ab;
    if (row.n_cells == 3) eps3 = row.eps_time_ab;
  }
  const bool ok = eps1 > 0.0 && eps3 >= 0.0 && eps3 < eps1;
  std::ostringstream note;
  note << "eps_time(A,B): n_cells=1 -> " << eps1 << " mm, n_cells=3 -> " << eps3 << " mm";
  return make_report("6 unit-cell difference decreases with RVE size", ok ? 1.0 : 0.0, 1.0,
                     "unit_cell_trend_decrease", note.str());
}

OracleReport criterion_fe2_vs_dns(const ScenarioConfig& config, const InstrumentedRun& fe2,
                                  int threads) {
  RunOptions options;
  options.threads = threads;
  const RunArtifacts dns = run_dns_scenario(config, options);
  const CompareResult cmp = compare_series(fe2.series, dns.series);
  return make_report("7 FE2 vs DNS displacement error", cmp.eps_time / config.load.u_max,
                     0.0, "fe2_vs_dns_eps_rel_umax",
                     "eps_time = " + std::to_string(cmp.eps_time) + " mm");
}

OracleReport criterion_robustness(const SweepResult& sweep) {
  bool ordered = true;
  std::ostringstream note;
  for (const RunOutcome& volume : sweep.outcomes) {
    if (volume.unit_cell != "B" || volume.constraint != "volume") continue;
    for (const RunOutcome& fixed : sweep.outcomes) {
      if (fixed.unit_cell != "B" || fixed.constraint != "fixed_corners" ||
          fixed.n_cells != volume.n_cells)
        continue;
      note << "B x" << volume.n_cells << ": volume " << volume.steps_completed << ", fixed "
           << fixed.steps_completed << "; ";
      if (volume.steps_completed < fixed.steps_completed) ordered = false;
    }
  }
  return make_report("8 volume constraint at least as robust as fixed corners",
                     ordered ? 1.0 : 0.0, 1.0, "robustness_ordering", note.str());
}

OracleReport criterion_hill_mandel(const UncommittedState& u) {
  const std::vector<int> gps = most_dynamic_gps(u.state, 6);
  double max_gap = 0.0;
  for (int gp : gps) {
    const RveState& state = u.state.gps[gp].rve;
    const RveModel& rve = *u.model.rve_template;
    max_gap = std::max(max_gap, hill_mandel_gap(rve, state, 0.0, 1.0, {}));
    max_gap = std::max(max_gap, hill_mandel_gap(rve, state, 1.0, 0.0, {}));
    max_gap = std::max(max_gap, hill_mandel_gap(rve, state, 0.0, 0.0, state.last_increment));
  }
  return make_report("9 multiscale virtual-power gap (3 probes)", max_gap, 0.0,
                     "hill_mandel_gap");
}

OracleReport criterion_wave_speed() {
  // Long-wavelength pulse through the laminate; compare the front speed
  // between the quarter and half point against sqrt(E_reuss / <rho>).
  ScenarioConfig c;
  c.geometry = {1000.0, 10.0, 0.5, 50};
  c.phases = {2e3, 2e5, 1e3 * kDensityKgM3ToTonneMm3, 1e5 * kDensityKgM3ToTonneMm3,
              MaterialLaw::StVenantKirchhoff};
  c.load = {5.0, 2e-3};
  c.time = {2e-5, 200};
  c.validate();

  const DnsModel model = c.make_dns_model();
  const DnsResult result = run_dns(model, c.time.n_steps);

  const double e_reuss = 2.0 / (1.0 / c.phases.E1 + 1.0 / c.phases.E2);
  const double rho_mean = 0.5 * (c.phases.rho1 + c.phases.rho2);
  const double c_expected = std::sqrt(e_reuss / rho_mean);

  // The wave starts at the right end (driven); stations at 3L/4 and L/2.
  const double threshold = 0.02 * c.load.u_max;
  auto arrival = [&](double station_x) {
    Eigen::Index node = 0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(model.mesh.node_x.size()); ++i)
      if (std::abs(model.mesh.node_x[i] - station_x) <
          std::abs(model.mesh.node_x[node] - station_x))
        node = i;
    for (int j = 1; j < result.series.n_times(); ++j) {
      const double prev = std::abs(result.series.values[j - 1](node));
      const double curr = std::abs(result.series.values[j](node));
      if (curr >= threshold) {
        const double f = (threshold - prev) / (curr - prev);
        return result.series.times[j - 1] +
               f * (result.series.times[j] - result.series.times[j - 1]);
      }
    }
    return -1.0;
  };
  const double t1 = arrival(750.0);
  const double t2 = arrival(500.0);
  double measured_err = 1.0;
  std::ostringstream note;
  if (t1 > 0.0 && t2 > t1) {
    const double c_measured = 250.0 / (t2 - t1);
    measured_err = std::abs(c_measured - c_expected) / c_expected;
    note << "c_measured = " << c_measured << " mm/s, c_expected = " << c_expected
         << " mm/s";
  } else {
    note << "front did not reach both stations";
  }
  return make_report("10 DNS laminate wave speed", measured_err, 0.0,
                     "dns_wave_speed_rel_err", note.str());
}

}  // namespace

std::span<const ToleranceEntry> acceptance_tolerances() { return kTolerances; }

std::vector<OracleReport> run_acceptance(const VerificationOptions& options) {
  std::vector<OracleReport> reports;
  auto log = [&](const OracleReport& r) {
    if (options.log)
      *options.log << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": measured "
                   << r.measured << " vs " << (r.kind == "min" ? ">= " : "<= ")
                   << r.tolerance << (r.note.empty() ? "" : "  (" + r.note + ")")
                   << std::endl;
  };
  auto guarded = [&](const char* name, const char* tol_name, auto&& fn) {
    try {
      reports.push_back(fn());
    } catch (const std::exception& err) {
      OracleReport r = make_report(name, std::numeric_limits<double>::infinity(), 0.0,
                                   tol_name, std::string("exception: ") + err.what());
      if (r.kind == "min") r.measured = 0.0;
      r.pass = false;
      reports.push_back(std::move(r));
    }
    log(reports.back());
  };

  const ScenarioConfig fig4 = desk_fig4();

  std::optional<UncommittedState> mid;
  try {
    mid = uncommitted_at_step(fig4, 50, options.threads);
  } catch (const std::exception&) {
  }
  guarded("1 consistent-tangent audit", "tangent_audit_rel_err", [&] {
    if (!mid) throw std::runtime_error("mid-run state unavailable (solver failed)");
    return criterion_tangent_audit(*mid);
  });

  std::optional<InstrumentedRun> fe2;
  guarded("2 quadratic macro convergence", "quadratic_order_fraction", [&] {
    fe2 = instrumented_fe2(fig4, options.threads);
    return criterion_quadratic_order(*fe2);
  });
  guarded("3 volume-constraint satisfaction", "constraint_avg_fluct_rel", [&] {
    if (!fe2) throw std::runtime_error("fe2 run unavailable (solver failed)");
    return criterion_constraint(*fe2);
  });

  guarded("4 homogeneous FE2 = single-scale trajectory", "homogeneous_equiv_rel_umax",
          [&] { return criterion_homogeneous_equivalence(options.threads); });
  guarded("5 static Reuss modulus", "reuss_static_rel_err",
          [&] { return criterion_reuss(options.threads); });

  std::optional<SweepResult> sweep;
  guarded("6 unit-cell difference decreases with RVE size", "unit_cell_trend_decrease",
          [&] {
            RunOptions sweep_options;
            sweep_options.threads = options.threads;
            sweep = sweep_rve(
                desk_sweep(), {1, 3},
                {ConstraintMode::VolumeConstraint, ConstraintMode::FixedCorners}, false,
                sweep_options);
            return criterion_unit_cell_trend(*sweep);
          });

  guarded("7 FE2 vs DNS displacement error", "fe2_vs_dns_eps_rel_umax", [&] {
    if (!fe2) throw std::runtime_error("fe2 run unavailable (solver failed)");
    return criterion_fe2_vs_dns(fig4, *fe2, options.threads);
  });

  guarded("8 volume constraint at least as robust as fixed corners", "robustness_ordering",
          [&] {
            if (!sweep) throw std::runtime_error("sweep unavailable (solver failed)");
            return criterion_robustness(*sweep);
          });

  guarded("9 multiscale virtual-power gap", "hill_mandel_gap", [&] {
    if (!mid) throw std::runtime_error("mid-run state unavailable (solver failed)");
    return criterion_hill_mandel(*mid);
  });

  guarded("10 DNS laminate wave speed", "dns_wave_speed_rel_err",
          [&] { return criterion_wave_speed(); });

  return reports;
}

std::string reports_csv(const std::vector<OracleReport>& reports) {
  std::ostringstream out;
  out << "name,measured,oracle,tolerance,kind,pass,note\n";
  for (const OracleReport& r : reports)
    out << '"' << r.name << "\"," << r.measured << ',' << r.oracle << ',' << r.tolerance
        << ',' << r.kind << ',' << (r.pass ? 1 : 0) << ",\"" << r.note << "\"\n";
  return out.str();
}

std::string reports_markdown(const std::vector<OracleReport>& reports) {
  std::ostringstream out;
  out << "| criterion | measured | tolerance | result |\n|---|---|---|---|\n";
  for (const OracleReport& r : reports)
    out << "| " << r.name << " | " << r.measured << " | " << (r.kind == "min" ? ">= " : "<= ")
        << r.tolerance << " | " << (r.pass ? "pass" : "FAIL") << " |\n";
  return out.str();
}

}  // namespace fe2dyn
