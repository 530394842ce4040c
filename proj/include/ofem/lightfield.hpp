#ifndef OFEM_LIGHTFIELD_HPP
#define OFEM_LIGHTFIELD_HPP

#include <complex>
#include <vector>

#include "ofem/kinematics.hpp"

namespace ofem {

using cplx = std::complex<double>;

/// Complex field vector (Cartesian components) at one point.  The physical
/// field is E(r,t) = 2 Re{E(r) e^{-i omega t}}.
struct FieldSample {
  cplx Ex{0.0, 0.0};
  cplx Ey{0.0, 0.0};
  cplx Ez{0.0, 0.0};
};

/// Angular spectrum beta(k_perp, sigma) of a monochromatic beam travelling
/// toward +z, sampled on a uniform node-centered grid covering [-k0, k0]^2.
/// Only propagating components |k_perp| < k0 carry amplitude; set() ignores
/// writes outside the light cone so the invariant holds by construction.
class LightSpectrum2D {
 public:
  LightSpectrum2D(double k0, int n = 256);

  double k0() const { return k0_; }
  int n() const { return n_; }
  double step() const { return step_; }
  double node(int i) const { return -k0_ + step_ * i; }

  void set(int ix, int iy, cplx beta_s, cplx beta_p);
  cplx bs(int ix, int iy) const { return bs_[idx(ix, iy)]; }
  cplx bp(int ix, int iy) const { return bp_[idx(ix, iy)]; }

  /// Bilinear interpolation at an arbitrary (kx, ky); identically zero
  /// outside the light cone and outside the grid.
  void interp(double kx, double ky, cplx& beta_s, cplx& beta_p) const;

 private:
  std::size_t idx(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * n_ + ix;
  }
  double k0_;
  int n_;
  double step_;
  std::vector<cplx> bs_, bp_;
};

/// 1D spectrum beta(kx) for fields E(x,z) y-hat with translational invariance
/// along y.  Cell-centered nodes keep all |kx| strictly inside (-k0, k0).
class LightSpectrum1D {
 public:
  LightSpectrum1D(double k0, int n = 256);

  double k0() const { return k0_; }
  int n() const { return n_; }
  double step() const { return step_; }
  double node(int i) const { return -k0_ + step_ * (i + 0.5); }

  void set(int i, cplx b) { b_[i] = b; }
  cplx b(int i) const { return b_[i]; }

 private:
  double k0_;
  int n_;
  double step_;
  std::vector<cplx> b_;
};

/// Azimuthal-m beam with constant coefficients beta_sigma over the top-hat
/// range k_perp <= k0*theta_L (capped at the light cone).
struct VortexBeamSpec {
  int m = 1;
  double theta_L = 0.01;  // divergence half-angle (rad), in (0, pi/2)
  cplx beta_s{0.0, 0.0};
  cplx beta_p{0.0, 0.0};
  double k0 = 0.0;  // light wave number (1/nm)

  double k_top() const;
  void validate() const;  // throws std::domain_error on bad m/theta_L/k0
};

/// Field of a 1D spectrum at (x, z): midpoint-rule quadrature of the kx
/// integral with k_z = sqrt(k0^2 - kx^2).
FieldSample sample_field_1d(const LightSpectrum1D& spec, double x, double z);

/// Field of a vortex beam at cylindrical (R, phi, z): radial quadrature of
/// the s/p Bessel-beam components.  Exact limits at R = 0.
FieldSample sample_vortex_field(const VortexBeamSpec& spec, double R,
                                double phi, double z);

/// Beam power in W from the Poynting flux of the angular spectrum.
double beam_power(const LightSpectrum2D& spec);
double beam_power(const VortexBeamSpec& spec);  // closed-form radial integral

/// Small-angle top-hat closed form of the power (W).
double beam_power_paraxial(const VortexBeamSpec& spec);

/// Returns a copy of spec with both coefficients scaled so the exact beam
/// power equals watts.  Throws std::domain_error if the spec carries no power.
VortexBeamSpec scale_to_power(VortexBeamSpec spec, double watts);

}  // namespace ofem

#endif
