#ifndef OFEM_IMPRINT_HPP
#define OFEM_IMPRINT_HPP

#include <functional>
#include <string>
#include <vector>

#include "ofem/kinematics.hpp"
#include "ofem/lightfield.hpp"

namespace ofem {

/// Phase samples on a 1D transverse axis (nm, rad).
struct PhaseMap1D {
  std::vector<double> x;
  std::vector<double> phi;
};

/// Phase samples on a uniform 2D grid; row-major, x fastest.
struct PhaseMap2D {
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0;
  double dx = 0.0, dy = 0.0;
  std::vector<double> phi;

  double x(int ix) const { return x0 + dx * ix; }
  double y(int iy) const { return y0 + dy * iy; }
  double at(int ix, int iy) const {
    return phi[static_cast<std::size_t>(iy) * nx + ix];
  }
  double& at(int ix, int iy) {
    return phi[static_cast<std::size_t>(iy) * nx + ix];
  }
};

/// Controls for the axial line integral behind imprint_phase.
struct ZQuadControl {
  double z_half_range = 0.0;  // initial half-window Z (nm); 0 picks a default
  double rel_tol = 1e-7;      // step-refinement target on the window integral
  double tail_tol = 1e-6;     // relative bound on the estimated |z|>Z remainder
  int max_range_doublings = 14;
  int max_step_halvings = 24;
};

/// Phase accumulated along the electron trajectory at each transverse node:
/// the z integral of the weighted field intensity |Ex|^2+|Ey|^2+|Ez|^2/gamma^2
/// times -1/(M omega^2).  The axial tail beyond the integration window decays
/// algebraically for focused beams, so it is estimated (|f(Z)|*Z scaling) and
/// the window grows until the estimate drops below tail_tol; a window that
/// never satisfies it raises ConvergenceError carrying the tail estimate.
PhaseMap1D imprint_phase(
    const std::function<FieldSample(double R, double z)>& field,
    const std::vector<double>& R_nodes, const ElectronParams& electron,
    double omega, const ZQuadControl& ctl = {});

/// Exact radial-quadrature phase of an azimuthal-m beam with arbitrary
/// smooth radial coefficient profiles beta_sigma(k_perp), at radius R.
double vortex_phase_radial_profile(int m,
                                   const std::function<cplx(double)>& beta_s,
                                   const std::function<cplx(double)>& beta_p,
                                   double k0, const ElectronParams& electron,
                                   double R);

/// Top-hat special case driven by a VortexBeamSpec.
double vortex_phase_radial(const VortexBeamSpec& spec,
                           const ElectronParams& electron, double R);

/// Small-angle closed form: phi = -(pi alpha m P / m!^2 m_e c v gamma omega)
/// (k0 theta_L R / 2)^{2(m-1)}.  P in W.  Valid only for R much smaller than
/// lambda0/(2 pi theta_L); m = 0 has no term at this order and returns 0.
double vortex_phase_paraxial(int m, double power_W, double theta_L,
                             const ElectronParams& electron,
                             const LightParams& light, double R);

/// The two closed forms the m = 3 aberration-correction phase can take.
/// They disagree by a constant factor; phase_m3_arbitrate reports which one
/// the exact radial quadrature supports.  Both kept callable by name so the
/// discrepancy stays visible in outputs rather than silently resolved.
double phase_m3_paraxial_main_text(double power_W, double theta_L,
                                   const ElectronParams& electron,
                                   const LightParams& light, double R);
double phase_m3_paraxial_appendix(double power_W, double theta_L,
                                  const ElectronParams& electron,
                                  const LightParams& light, double R);

struct M3Arbitration {
  double quadrature;  // exact radial-quadrature value (rad)
  double main_text;   // pi^2/96 closed form (rad)
  double appendix;    // pi^5/12 closed form (rad)
  std::string winner; // "paraxial_main_text" or "paraxial_appendix"
};

/// Evaluates both m = 3 closed forms against the radial quadrature at radius
/// R (deep inside the paraxial validity range) and names the closer one.
M3Arbitration phase_m3_arbitrate(double power_W, double theta_L,
                                 const ElectronParams& electron,
                                 const LightParams& light, double R);

/// Effective light-electron interaction length L = 2 lambda0 / theta_L^2 (nm).
double effective_length(double theta_L, double lambda0);

/// Power (W) needed for an on-axis phase of phi_target at m = 1:
/// P = |phi/2pi| * 2 M c^2 omega.
double power_for_phase(double phi_target, const ElectronParams& electron,
                       const LightParams& light);

/// Power (W) to compensate spherical aberration with an m = 3 vortex:
/// P = (6 hbar c^2 / pi^4 alpha) C3 q0^2 lambda0^3 / (theta_L^4 (z_f-z_L)^4).
/// Appends a note to *warning when theta_L is too large for the closed form's
/// validity radius to plausibly cover the aperture.
double aberration_correction_power(double C3_mm, const ElectronParams& electron,
                                   const LightParams& light, double theta_L,
                                   double z_f_minus_z_L_mm,
                                   std::string* warning = nullptr);

}  // namespace ofem

#endif
