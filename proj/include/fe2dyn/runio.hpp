#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fe2dyn/macro.hpp"
#include "fe2dyn/metrics.hpp"
#include "fe2dyn/scenario.hpp"

namespace fe2dyn {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trippable decimal (17 significant digits).
std::string fmt_g17(double value);

void write_series_csv(const std::filesystem::path& path, const FieldSeries& series);
FieldSeries read_series_csv(const std::filesystem::path& path);

/// Snapshot table: header node_X_mm, then one displacement column per
/// snapshot time (nearest recorded step).
void write_field_snapshots(const std::filesystem::path& path, const FieldSeries& series,
                           const std::vector<double>& snapshot_times);

/// One row per Newton iteration: step, time_s, iter, delta_norm.
void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<StepReport>& reports, double dt);

/// One row per step: step, time_s, newton_iters, wall_seconds. The wall
/// column is the only output excluded from the bit-identity guarantee.
void write_steps_csv(const std::filesystem::path& path,
                     const std::vector<StepReport>& reports, double dt);

void write_manifest(const std::filesystem::path& path, const std::string& command,
                    const ScenarioConfig& config, double macro_tol, double micro_tol);

void write_epsilon_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const std::vector<double>& eps);

void write_robustness_csv(const std::filesystem::path& path,
                          const std::vector<RunOutcome>& outcomes);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fe2dyn
