#include "fe2dyn/runio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fe2dyn {

std::string fmt_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

void write_series_csv(const std::filesystem::path& path, const FieldSeries& series) {
  std::ofstream out = open_out(path);
  out << "time_s";
  for (double x : series.node_x) out << ',' << fmt_g17(x);
  out << '\n';
  for (int j = 0; j < series.n_times(); ++j) {
    out << fmt_g17(series.times[j]);
    for (int i = 0; i < series.n_nodes(); ++i) out << ',' << fmt_g17(series.values[j](i));
    out << '\n';
  }
}

FieldSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ComparisonError("cannot open series file " + path.string());
  FieldSeries series;
  std::string line;
  if (!std::getline(in, line)) throw ComparisonError("empty series file " + path.string());
  const std::vector<std::string> header = split_csv(line);
  if (header.size() < 2 || header[0] != "time_s")
    throw ComparisonError("not a series csv: " + path.string());
  for (size_t i = 1; i < header.size(); ++i) series.node_x.push_back(std::stod(header[i]));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != header.size())
      throw ComparisonError("ragged series row in " + path.string());
    series.times.push_back(std::stod(cells[0]));
    Eigen::VectorXd row(series.node_x.size());
    for (size_t i = 1; i < cells.size(); ++i) row(i - 1) = std::stod(cells[i]);
    series.values.push_back(std::move(row));
  }
  series.validate();
  return series;
}

void write_field_snapshots(const std::filesystem::path& path, const FieldSeries& series,
                           const std::vector<double>& snapshot_times) {
  std::vector<int> indices;
  for (double t : snapshot_times) {
    int best = 0;
    for (int j = 1; j < series.n_times(); ++j)
      if (std::abs(series.times[j] - t) < std::abs(series.times[best] - t)) best = j;
    indices.push_back(best);
  }
  std::ofstream out = open_out(path);
  out << "node_X_mm";
  for (int j : indices) out << ",u_mm_t=" << fmt_g17(series.times[j]);
  out << '\n';
  for (int i = 0; i < series.n_nodes(); ++i) {
    out << fmt_g17(series.node_x[i]);
    for (int j : indices) out << ',' << fmt_g17(series.values[j](i));
    out << '\n';
  }
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<StepReport>& reports, double dt) {
  std::ofstream out = open_out(path);
  out << "step,time_s,iter,delta_norm\n";
  for (size_t s = 0; s < reports.size(); ++s)
    for (size_t it = 0; it < reports[s].update_norms.size(); ++it)
      out << s + 1 << ',' << fmt_g17((s + 1) * dt) << ',' << it + 1 << ','
          << fmt_g17(reports[s].update_norms[it]) << '\n';
}

void write_steps_csv(const std::filesystem::path& path,
                     const std::vector<StepReport>& reports, double dt) {
  std::ofstream out = open_out(path);
  out << "step,time_s,newton_iters,wall_seconds\n";
  for (size_t s = 0; s < reports.size(); ++s)
    out << s + 1 << ',' << fmt_g17((s + 1) * dt) << ',' << reports[s].iterations << ','
        << fmt_g17(reports[s].wall_seconds) << '\n';
}

void write_manifest(const std::filesystem::path& path, const std::string& command,
                    const ScenarioConfig& config, double macro_tol, double micro_tol) {
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  manifest["config"] = nlohmann::json::parse(echo_config(config));
  manifest["tolerances"] = {{"macro_newton", macro_tol},
                            {"micro_newton_rel", micro_tol},
                            {"macro_max_iterations", 20},
                            {"micro_max_iterations", 25}};
  manifest["units"] = {{"length", "mm"},
                       {"force", "N"},
                       {"time", "s"},
                       {"mass", "t"},
                       {"density_internal", "t/mm^3"}};
  std::ofstream out = open_out(path);
  out << manifest.dump(2) << '\n';
}

void write_epsilon_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const std::vector<double>& eps) {
  std::ofstream out = open_out(path);
  out << "time_s,epsilon_mm\n";
  for (size_t j = 0; j < times.size(); ++j)
    out << fmt_g17(times[j]) << ',' << fmt_g17(eps[j]) << '\n';
}

void write_robustness_csv(const std::filesystem::path& path,
                          const std::vector<RunOutcome>& outcomes) {
  std::ofstream out = open_out(path);
  out << "unit_cell,constraint,n_cells,steps_completed,steps_requested,crashed\n";
  for (const RunOutcome& o : outcomes)
    out << o.unit_cell << ',' << o.constraint << ',' << o.n_cells << ',' << o.steps_completed
        << ',' << o.steps_requested << ',' << (o.crashed ? 1 : 0) << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

}  // namespace fe2dyn
