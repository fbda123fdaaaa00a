#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fe2dyn {

// Unit convention used throughout: lengths in mm, forces in N, time in s.
// The consistent mass unit is then the tonne (1 t = 1e3 kg), so densities
// are carried internally in t/mm^3.  Config files accept kg/m^3 and the
// loader converts via kDensityKgM3ToTonneMm3.
inline constexpr double kDensityKgM3ToTonneMm3 = 1e-12;

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class AssemblyError : public std::logic_error {
public:
  explicit AssemblyError(const std::string& what) : std::logic_error(what) {}
};

/// Micro Newton failed: element inversion or iteration cap. Carries the
/// update-norm trace so crash diagnostics can be logged per time step.
class MicroDivergenceError : public std::runtime_error {
public:
  MicroDivergenceError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), update_norms(std::move(trace)) {}
  std::vector<double> update_norms;
};

class MacroDivergenceError : public std::runtime_error {
public:
  MacroDivergenceError(const std::string& what, int step)
      : std::runtime_error(what), step_index(step) {}
  int step_index;
};

class IllPosedError : public std::runtime_error {
public:
  explicit IllPosedError(const std::string& what) : std::runtime_error(what) {}
};

class ComparisonError : public std::runtime_error {
public:
  explicit ComparisonError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fe2dyn
