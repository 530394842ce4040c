#ifndef OFEM_PROPAGATE_HPP
#define OFEM_PROPAGATE_HPP

#include <complex>
#include <vector>

#include "ofem/imprint.hpp"
#include "ofem/kinematics.hpp"

namespace ofem {

/// Axial layout of the column: crossover -> modulation/lens plane -> focal
/// plane.  Derived quantities are always recomputed from the stored layout.
struct MicroscopeGeometry {
  double z_xo_mm = -1.0;
  double z_L_mm = 0.0;
  double z_f_mm = 1.0;
  double f_mm = 0.5;
  double R_max_um = 10.0;

  double NA() const { return R_max_um * 1e-3 / (z_f_mm - z_L_mm); }
  /// Defocus 1/(z_f-z_L) + 1/(z_L-z_xo) - 1/f, in 1/mm; 0 at the focal plane.
  double delta_mm_inv() const {
    return 1.0 / (z_f_mm - z_L_mm) + 1.0 / (z_L_mm - z_xo_mm) - 1.0 / f_mm;
  }
  /// Projected electron wavelength lambda_e / NA (nm): the natural focal unit.
  double lambda_e_perp(const ElectronParams& el) const {
    return el.lambda_e / NA();
  }
  void validate() const;  // ordering, 0 < NA < 1

  /// In-focus layout used throughout: crossover at -1 mm, lens at 0, focal
  /// plane at +1 mm, f = 0.5 mm, so delta vanishes identically.
  static MicroscopeGeometry in_focus(double R_max_um);
};

/// Quartic spherical aberration chi(theta) = C3 q0 theta^4 / 4, or an
/// explicit tabulated chi(theta) when the table is non-empty (linear
/// interpolation, clamped ends).
struct AberrationSpec {
  double C3_mm = 0.0;
  std::vector<double> table_theta;  // ascending
  std::vector<double> table_chi;    // same length

  double chi(double theta, double q0) const;
};

/// Focal-plane amplitude on a uniform grid of x_f; positions are stored in
/// units of lambda_e_perp.  psi is scaled so max |psi| = 1; raw_scale holds
/// the discarded factor.
struct FocalProfile1D {
  std::vector<double> x_f_hat;
  std::vector<cplx> psi;
  double raw_scale = 0.0;
  double lambda_e_perp = 0.0;  // nm per unit of x_f_hat

  double x_f_nm(std::size_t i) const { return x_f_hat[i] * lambda_e_perp; }
  double intensity(std::size_t i) const { return std::norm(psi[i]); }
};

struct FocalProfile2D {
  int nx = 0, ny = 0;
  double fx0_hat = 0.0, fy0_hat = 0.0;  // position of node (0,0)
  double df_hat = 0.0;                  // grid step, same along x and y
  std::vector<cplx> psi;                // row-major, x fastest; max |psi| = 1
  double raw_scale = 0.0;
  double lambda_e_perp = 0.0;

  double x_f_hat(int ix) const { return fx0_hat + df_hat * ix; }
  double y_f_hat(int iy) const { return fy0_hat + df_hat * iy; }
  const cplx& at(int ix, int iy) const {
    return psi[static_cast<std::size_t>(iy) * nx + ix];
  }
  double intensity(int ix, int iy) const { return std::norm(at(ix, iy)); }
};

/// Free-space paraxial propagation over a signed distance (nm) by spectral
/// multiplication with the quadratic Fresnel kernel.  The grid is treated as
/// periodic; fields must be negligible near the window edges.
std::vector<cplx> fresnel_propagate_1d(std::vector<cplx> psi, double dx,
                                       double distance_nm, double q0);
std::vector<cplx> fresnel_propagate_2d(std::vector<cplx> psi, int nx, int ny,
                                       double dx, double dy,
                                       double distance_nm, double q0);

double aberration_phase(const AberrationSpec& spec, double theta, double q0);

/// Focal-plane wave function: windowed Fourier transform of
/// e^{i(chi + phi + q0 R^2 delta/2)} over the aperture R <= R_max, evaluated
/// on an oversampled frequency grid (zero-padding factor pad >= 4).  The
/// phase map must cover the aperture on a uniform grid or the call throws.
/// extra_delta_mm_inv is added to the geometric defocus (used by scans).
FocalProfile1D focal_wavefunction_1d(const PhaseMap1D& phase,
                                     const AberrationSpec& aberr,
                                     const MicroscopeGeometry& geom,
                                     const ElectronParams& el, int pad = 4,
                                     double extra_delta_mm_inv = 0.0);

/// 2D variant; focal_half_width_hat > 0 crops the output to
/// |x_f|,|y_f| <= that many lambda_e_perp.
FocalProfile2D focal_wavefunction_2d(const PhaseMap2D& phase,
                                     const AberrationSpec& aberr,
                                     const MicroscopeGeometry& geom,
                                     const ElectronParams& el, int pad = 4,
                                     double extra_delta_mm_inv = 0.0,
                                     double focal_half_width_hat = 0.0);

/// Peak focal intensity versus added defocus, normalized to the flat-phase
/// in-focus peak (a Strehl-like metric).
struct DefocusScan {
  std::vector<double> delta_mm_inv;
  std::vector<double> strehl;
};
DefocusScan defocus_scan(const PhaseMap1D& phase, const AberrationSpec& aberr,
                         const MicroscopeGeometry& geom,
                         const ElectronParams& el,
                         const std::vector<double>& delta_values_mm_inv,
                         int pad = 4);

/// Magnitude (rad) of the quadratic focal-plane factor e^{i q0 R_f^2/2(z_f-z_L)}
/// that the transform drops, at the edge of a focal window of half-width
/// R_f_max_nm.  Diagnostic only.
double dismissed_focal_phase(const MicroscopeGeometry& geom,
                             const ElectronParams& el, double R_f_max_nm);

}  // namespace ofem

#endif
