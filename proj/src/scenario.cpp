#include "fe2dyn/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fe2dyn {

using nlohmann::json;

namespace {

void require_keys_known(const json& obj, const std::string& section,
                        const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items())
    if (!known.count(key))
      throw ConfigError("unknown key '" + section + "." + key + "'");
}

double require_number(const json& obj, const std::string& section, const std::string& key) {
  if (!obj.contains(key))
    throw ConfigError("missing required field '" + section + "." + key + "'");
  if (!obj[key].is_number())
    throw ConfigError("field '" + section + "." + key + "' must be a number");
  return obj[key].get<double>();
}

int require_int(const json& obj, const std::string& section, const std::string& key) {
  if (!obj.contains(key))
    throw ConfigError("missing required field '" + section + "." + key + "'");
  if (!obj[key].is_number_integer())
    throw ConfigError("field '" + section + "." + key + "' must be an integer");
  return obj[key].get<int>();
}

}  // namespace

std::string to_string(UnitCell cell) { return cell == UnitCell::A ? "A" : "B"; }

std::string to_string(ConstraintMode mode) {
  return mode == ConstraintMode::VolumeConstraint ? "volume" : "fixed_corners";
}

std::string to_string(FLinkMode mode) {
  return mode == FLinkMode::PeriodicBC ? "periodic" : "volume_avg";
}

std::vector<MaterialPhase> ScenarioConfig::material_phases() const {
  return {{phases.E1, phases.rho1, phases.law}, {phases.E2, phases.rho2, phases.law}};
}

std::shared_ptr<const RveModel> ScenarioConfig::make_rve_model() const {
  return std::make_shared<RveModel>(
      build_rve_mesh(rve.unit_cell, rve.n_cells, geometry.l_M, geometry.l_E),
      material_phases(), rve.constraint, rve.f_link, newmark_params());
}

MacroModel ScenarioConfig::make_macro_model() const {
  MacroModel model;
  model.mesh = build_uniform_mesh(0.0, geometry.L, geometry.n_macro_elements);
  model.params = newmark_params();
  model.load = {load.u_max, load.T};
  model.rve_template = make_rve_model();
  return model;
}

DnsModel ScenarioConfig::make_dns_model() const {
  DnsModel model;
  model.mesh = build_bar_mesh(geometry.L, geometry.l_M, geometry.l_E);
  model.phases = material_phases();
  model.params = newmark_params();
  model.load = {load.u_max, load.T};
  return model;
}

void ScenarioConfig::validate() {
  warnings.clear();
  if (geometry.L <= 0.0 || geometry.l_M <= 0.0 || geometry.l_E <= 0.0)
    throw ConfigError("geometry lengths must be positive");
  if (geometry.n_macro_elements < 1) throw ConfigError("need at least one macro element");
  if (phases.E1 <= 0.0 || phases.E2 <= 0.0)
    throw ConfigError("Young's moduli must be positive");
  if (phases.rho1 < 0.0 || phases.rho2 < 0.0)
    throw ConfigError("densities must be non-negative");
  if (load.T <= 0.0) throw ConfigError("load duration T must be positive");
  if (time.dt <= 0.0) throw ConfigError("time step dt must be positive");
  if (time.n_steps < 1) throw ConfigError("n_steps must be >= 1");
  if (rve.n_cells < 1) throw ConfigError("rve n_cells must be >= 1");
  NewmarkParams{newmark.beta, newmark.gamma, time.dt}.validate();

  const double n_layers = geometry.L / geometry.l_M;
  if (std::abs(n_layers - std::round(n_layers)) > 1e-9 * n_layers)
    throw ConfigError("bar length L must be an integer multiple of l_M");

  for (double t : outputs.snapshot_times)
    if (t < 0.0 || t > time.dt * time.n_steps + 1e-12)
      throw ConfigError("snapshot time outside the simulated interval");

  if (rve_length() > macro_element_length())
    warnings.push_back(
        "scale separation: RVE length " + std::to_string(rve_length()) +
        " mm exceeds the macro element length " + std::to_string(macro_element_length()) +
        " mm; homogenization errors grow in this regime");
}

ScenarioConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config is not valid JSON: ") + err.what());
  }
  require_keys_known(root, "",
                     {"geometry", "phases", "load", "time", "rve", "newmark", "outputs"});

  ScenarioConfig config;

  if (!root.contains("geometry")) throw ConfigError("missing section 'geometry'");
  {
    const json& g = root["geometry"];
    require_keys_known(g, "geometry",
                       {"L_mm", "l_M_mm", "l_E_mm", "l_macro_E_mm", "n_macro_elements"});
    config.geometry.L = require_number(g, "geometry", "L_mm");
    config.geometry.l_M = require_number(g, "geometry", "l_M_mm");
    config.geometry.l_E =
        g.contains("l_E_mm") ? require_number(g, "geometry", "l_E_mm")
                             : config.geometry.l_M / 20.0;
    if (g.contains("n_macro_elements")) {
      if (g.contains("l_macro_E_mm"))
        throw ConfigError("give either geometry.l_macro_E_mm or n_macro_elements, not both");
      config.geometry.n_macro_elements = require_int(g, "geometry", "n_macro_elements");
    } else {
      const double l_macro = require_number(g, "geometry", "l_macro_E_mm");
      if (l_macro <= 0.0) throw ConfigError("l_macro_E_mm must be positive");
      const double n = config.geometry.L / l_macro;
      if (std::abs(n - std::round(n)) > 1e-9 * n)
        throw ConfigError(
            "L_mm must be divisible by l_macro_E_mm (or give n_macro_elements)");
      config.geometry.n_macro_elements = static_cast<int>(std::llround(n));
    }
  }

  if (!root.contains("phases")) throw ConfigError("missing section 'phases'");
  {
    const json& p = root["phases"];
    require_keys_known(p, "phases",
                       {"E1_N_mm2", "E2_N_mm2", "rho1_kg_m3", "rho2_kg_m3", "law"});
    config.phases.E1 = require_number(p, "phases", "E1_N_mm2");
    config.phases.E2 = require_number(p, "phases", "E2_N_mm2");
    config.phases.rho1 = require_number(p, "phases", "rho1_kg_m3") * kDensityKgM3ToTonneMm3;
    config.phases.rho2 = require_number(p, "phases", "rho2_kg_m3") * kDensityKgM3ToTonneMm3;
    if (p.contains("law")) config.phases.law = material_law_from_string(p["law"]);
  }

  if (!root.contains("load")) throw ConfigError("missing section 'load'");
  {
    const json& l = root["load"];
    require_keys_known(l, "load", {"u_max_mm", "T_s"});
    config.load.u_max = require_number(l, "load", "u_max_mm");
    config.load.T = require_number(l, "load", "T_s");
  }

  if (!root.contains("time")) throw ConfigError("missing section 'time'");
  {
    const json& t = root["time"];
    require_keys_known(t, "time", {"dt_s", "n_steps"});
    // No default dt: the value printed in the reference experiments is
    // inconsistent, so it must be stated explicitly.
    config.time.dt = require_number(t, "time", "dt_s");
    config.time.n_steps = require_int(t, "time", "n_steps");
  }

  if (root.contains("rve")) {
    const json& r = root["rve"];
    require_keys_known(r, "rve", {"unit_cell", "n_cells", "constraint", "f_link"});
    if (r.contains("unit_cell")) {
      const std::string cell = r["unit_cell"].get<std::string>();
      if (cell == "A")
        config.rve.unit_cell = UnitCell::A;
      else if (cell == "B")
        config.rve.unit_cell = UnitCell::B;
      else
        throw ConfigError("rve.unit_cell must be A or B");
    }
    if (r.contains("n_cells")) config.rve.n_cells = require_int(r, "rve", "n_cells");
    if (r.contains("constraint")) {
      const std::string c = r["constraint"].get<std::string>();
      if (c == "volume")
        config.rve.constraint = ConstraintMode::VolumeConstraint;
      else if (c == "fixed_corners")
        config.rve.constraint = ConstraintMode::FixedCorners;
      else
        throw ConfigError("rve.constraint must be volume or fixed_corners");
    }
    if (r.contains("f_link")) {
      const std::string f = r["f_link"].get<std::string>();
      if (f == "periodic")
        config.rve.f_link = FLinkMode::PeriodicBC;
      else if (f == "volume_avg")
        config.rve.f_link = FLinkMode::VolumeAverageF;
      else
        throw ConfigError("rve.f_link must be periodic or volume_avg");
    }
  }

  if (root.contains("newmark")) {
    const json& n = root["newmark"];
    require_keys_known(n, "newmark", {"beta", "gamma"});
    if (n.contains("beta")) config.newmark.beta = require_number(n, "newmark", "beta");
    if (n.contains("gamma")) config.newmark.gamma = require_number(n, "newmark", "gamma");
  }

  if (root.contains("outputs")) {
    const json& o = root["outputs"];
    require_keys_known(o, "outputs",
                       {"snapshot_times_s", "write_series", "rve_dump_gps",
                        "rve_dump_steps", "rve_dump_pattern"});
    if (o.contains("snapshot_times_s"))
      config.outputs.snapshot_times = o["snapshot_times_s"].get<std::vector<double>>();
    if (o.contains("write_series"))
      config.outputs.write_series = o["write_series"].get<bool>();
    if (o.contains("rve_dump_gps"))
      config.outputs.rve_dump_gps = o["rve_dump_gps"].get<std::vector<int>>();
    if (o.contains("rve_dump_steps"))
      config.outputs.rve_dump_steps = o["rve_dump_steps"].get<std::vector<int>>();
    if (o.contains("rve_dump_pattern"))
      config.outputs.rve_dump_pattern = o["rve_dump_pattern"].get<std::string>();
  }

  config.validate();
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string echo_config(const ScenarioConfig& c) {
  json root;
  root["geometry"] = {{"L_mm", c.geometry.L},
                      {"l_M_mm", c.geometry.l_M},
                      {"l_E_mm", c.geometry.l_E},
                      {"n_macro_elements", c.geometry.n_macro_elements},
                      {"l_macro_E_mm", c.macro_element_length()}};
  root["phases"] = {{"E1_N_mm2", c.phases.E1},
                    {"E2_N_mm2", c.phases.E2},
                    {"rho1_kg_m3", c.phases.rho1 / kDensityKgM3ToTonneMm3},
                    {"rho2_kg_m3", c.phases.rho2 / kDensityKgM3ToTonneMm3},
                    {"law", to_string(c.phases.law)}};
  root["load"] = {{"u_max_mm", c.load.u_max}, {"T_s", c.load.T}};
  root["time"] = {{"dt_s", c.time.dt}, {"n_steps", c.time.n_steps}};
  root["rve"] = {{"unit_cell", to_string(c.rve.unit_cell)},
                 {"n_cells", c.rve.n_cells},
                 {"rve_length_mm", c.rve_length()},
                 {"constraint", to_string(c.rve.constraint)},
                 {"f_link", to_string(c.rve.f_link)}};
  root["newmark"] = {{"beta", c.newmark.beta}, {"gamma", c.newmark.gamma}};
  root["outputs"] = {{"snapshot_times_s", c.outputs.snapshot_times},
                     {"write_series", c.outputs.write_series},
                     {"rve_dump_gps", c.outputs.rve_dump_gps},
                     {"rve_dump_steps", c.outputs.rve_dump_steps},
                     {"rve_dump_pattern", c.outputs.rve_dump_pattern}};
  root["warnings"] = c.warnings;
  return root.dump(2);
}

}  // namespace fe2dyn
