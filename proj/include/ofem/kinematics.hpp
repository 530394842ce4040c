#ifndef OFEM_KINEMATICS_HPP
#define OFEM_KINEMATICS_HPP

#include <stdexcept>

namespace ofem {

/// Relativistic electron beam parameters derived from the kinetic energy.
struct ElectronParams {
  double E0;        // kinetic energy (keV)
  double gamma;     // Lorentz factor
  double beta_v;    // v/c
  double q0;        // central wave vector (1/nm)
  double lambda_e;  // de Broglie wavelength (nm)
  double Mc2;       // scaled mass m_e gamma v / (c alpha), stored as M c^2 (keV)

  double velocity_nm_per_s() const;
};

/// Monochromatic light parameters.
struct LightParams {
  double lambda0;  // vacuum wavelength (nm)
  double omega;    // angular frequency (rad/s)
  double k0;       // wave number 2 pi / lambda0 (1/nm)
};

/// E0 in keV; throws std::domain_error for E0 <= 0 (zero velocity makes the
/// ponderomotive phase prefactor singular).
ElectronParams electron_kinematics(double E0_keV);

/// lambda0 in nm; throws std::domain_error for non-positive wavelength.
LightParams light_params(double lambda0_nm);

/// Kinetic energy (keV) back from a Lorentz factor.
double kinetic_energy_from_gamma(double gamma);

}  // namespace ofem

#endif
