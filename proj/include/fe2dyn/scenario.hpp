#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fe2dyn/dns.hpp"
#include "fe2dyn/macro.hpp"

namespace fe2dyn {

/// Fully validated simulation scenario. Geometry and material values are
/// stored in the internal unit system (mm, N, s, t); densities are converted
/// from the kg/m^3 given in config files.
struct ScenarioConfig {
  struct Geometry {
    double L = 0.0;          // bar length (mm)
    double l_M = 0.0;        // phase layer thickness (mm)
    double l_E = 0.0;        // micro element length (mm), default l_M/20
    int n_macro_elements = 0;
  } geometry;

  struct Phases {
    double E1 = 0.0, E2 = 0.0;      // N/mm^2
    double rho1 = 0.0, rho2 = 0.0;  // t/mm^3
    MaterialLaw law = MaterialLaw::StVenantKirchhoff;
  } phases;

  struct Load {
    double u_max = 0.0;  // mm
    double T = 0.0;      // s
  } load;

  struct Time {
    double dt = 0.0;  // s
    int n_steps = 0;
  } time;

  struct Rve {
    UnitCell unit_cell = UnitCell::A;
    int n_cells = 1;
    ConstraintMode constraint = ConstraintMode::VolumeConstraint;
    FLinkMode f_link = FLinkMode::PeriodicBC;
  } rve;

  struct Newmark {
    double beta = 0.25;
    double gamma = 0.5;
  } newmark;

  struct Outputs {
    std::vector<double> snapshot_times;  // s
    bool write_series = true;
    std::vector<int> rve_dump_gps;
    std::vector<int> rve_dump_steps;
    std::string rve_dump_pattern = "rve_gp{gp}_step{step}.csv";
  } outputs;

  std::vector<std::string> warnings;  // e.g. scale-separation diagnostic

  double macro_element_length() const { return geometry.L / geometry.n_macro_elements; }
  double rve_length() const { return 2.0 * geometry.l_M * rve.n_cells; }
  NewmarkParams newmark_params() const { return {newmark.beta, newmark.gamma, time.dt}; }
  std::vector<MaterialPhase> material_phases() const;

  std::shared_ptr<const RveModel> make_rve_model() const;
  MacroModel make_macro_model() const;
  DnsModel make_dns_model() const;

  void validate();  // fills warnings, throws ConfigError on hard violations
};

ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& json_text);

/// Config echo with every default materialized, in config-file units.
std::string echo_config(const ScenarioConfig& config);

std::string to_string(UnitCell cell);
std::string to_string(ConstraintMode mode);
std::string to_string(FLinkMode mode);

}  // namespace fe2dyn
