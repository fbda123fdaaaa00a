#include "fe2dyn/material.hpp"

namespace fe2dyn {

namespace {
void check_deformation(double F) {
  if (!(F > 0.0))
    throw MicroDivergenceError("element inverted: F = " + std::to_string(F), {});
}
}  // namespace

double stress(const MaterialPhase& phase, double F) {
  check_deformation(F);
  switch (phase.law) {
    case MaterialLaw::StVenantKirchhoff:
      return 0.5 * phase.youngs_modulus * F * (F * F - 1.0);
    case MaterialLaw::LinearElastic:
      return phase.youngs_modulus * (F - 1.0);
  }
  throw AssemblyError("unknown material law");
}

double tangent(const MaterialPhase& phase, double F) {
  check_deformation(F);
  switch (phase.law) {
    case MaterialLaw::StVenantKirchhoff:
      return 0.5 * phase.youngs_modulus * (3.0 * F * F - 1.0);
    case MaterialLaw::LinearElastic:
      return phase.youngs_modulus;
  }
  throw AssemblyError("unknown material law");
}

double strain_energy(const MaterialPhase& phase, double F) {
  check_deformation(F);
  switch (phase.law) {
    case MaterialLaw::StVenantKirchhoff: {
      const double green = 0.5 * (F * F - 1.0);
      return 0.5 * phase.youngs_modulus * green * green;
    }
    case MaterialLaw::LinearElastic:
      return 0.5 * phase.youngs_modulus * (F - 1.0) * (F - 1.0);
  }
  throw AssemblyError("unknown material law");
}

MaterialLaw material_law_from_string(const std::string& name) {
  if (name == "stvk" || name == "st_venant_kirchhoff")
    return MaterialLaw::StVenantKirchhoff;
  if (name == "linear" || name == "linear_elastic") return MaterialLaw::LinearElastic;
  throw ConfigError("unknown material law '" + name + "' (use stvk|linear)");
}

std::string to_string(MaterialLaw law) {
  return law == MaterialLaw::StVenantKirchhoff ? "stvk" : "linear";
}

}  // namespace fe2dyn
