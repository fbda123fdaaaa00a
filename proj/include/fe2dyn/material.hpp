#pragma once

#include <string>

#include "fe2dyn/types.hpp"

namespace fe2dyn {

enum class MaterialLaw { StVenantKirchhoff, LinearElastic };

/// One microstructural phase: stiffness, reference density and the 1D
/// finite-strain law used for P(F).
struct MaterialPhase {
  double youngs_modulus = 0.0;  // N/mm^2
  double density = 0.0;         // t/mm^3 (converted from kg/m^3 at config load)
  MaterialLaw law = MaterialLaw::StVenantKirchhoff;
};

/// First Piola-Kirchhoff stress.
///   StVenantKirchhoff: P = E F (F^2 - 1) / 2
///   LinearElastic:     P = E (F - 1)
/// Throws MicroDivergenceError for F <= 0 (inverted element).
double stress(const MaterialPhase& phase, double F);

/// Material tangent dP/dF: E (3 F^2 - 1) / 2 resp. E.
double tangent(const MaterialPhase& phase, double F);

/// Strain energy density per reference volume (diagnostics only).
double strain_energy(const MaterialPhase& phase, double F);

MaterialLaw material_law_from_string(const std::string& name);
std::string to_string(MaterialLaw law);

}  // namespace fe2dyn
