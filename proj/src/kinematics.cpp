#include "ofem/kinematics.hpp"

#include <cmath>

#include "ofem/units.hpp"

namespace ofem {

double ElectronParams::velocity_nm_per_s() const {
  return beta_v * units::c_nm_per_s;
}

ElectronParams electron_kinematics(double E0_keV) {
  if (!(E0_keV > 0.0))
    throw std::domain_error("electron_kinematics: kinetic energy must be positive");

  ElectronParams p;
  p.E0 = E0_keV;
  p.gamma = 1.0 + E0_keV / units::electron_rest_keV;
  p.beta_v = std::sqrt(1.0 - 1.0 / (p.gamma * p.gamma));
  const double gb = p.gamma * p.beta_v;
  p.q0 = gb * units::electron_rest_keV / units::hbar_c_keV_nm;
  p.lambda_e = 2.0 * units::pi / p.q0;
  p.Mc2 = gb * units::electron_rest_keV * units::inv_alpha;
  return p;
}

LightParams light_params(double lambda0_nm) {
  if (!(lambda0_nm > 0.0))
    throw std::domain_error("light_params: wavelength must be positive");

  LightParams lp;
  lp.lambda0 = lambda0_nm;
  lp.k0 = 2.0 * units::pi / lambda0_nm;
  lp.omega = units::c_nm_per_s * lp.k0;
  return lp;
}

double kinetic_energy_from_gamma(double gamma) {
  return (gamma - 1.0) * units::electron_rest_keV;
}

}  // namespace ofem
