#ifndef OFEM_SYNTH2D_HPP
#define OFEM_SYNTH2D_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "ofem/imprint.hpp"
#include "ofem/kinematics.hpp"
#include "ofem/lightfield.hpp"
#include "ofem/propagate.hpp"

namespace ofem {

/// Binary focal-plane intensity target on a square pixel grid.  Pixel
/// (ix, iy) is centered at ((ix - n/2)/4, (iy - n/2)/4) focal cells, i.e.
/// four pixels per electron focal wavelength in each direction.
struct ShapeMask {
  explicit ShapeMask(int n);
  int n() const { return n_; }
  bool at(int ix, int iy) const { return cells[idx(ix, iy)] != 0; }
  void set(int ix, int iy, bool v) { cells[idx(ix, iy)] = v ? 1 : 0; }
  int count() const;
  double coord_hat(int i) const { return 0.25 * (i - n_ / 2); }

  std::vector<std::uint8_t> cells;  // row-major, x fastest

 private:
  std::size_t idx(int ix, int iy) const;
  int n_ = 0;
};

/// Pixels whose centers fall inside the disk are switched on (hat units).
ShapeMask disk_mask(int n, double cx_hat, double cy_hat, double r_hat);
/// Switches on pixels whose centers fall inside the axis-aligned rectangle.
void fill_rect(ShapeMask& mask, double x0_hat, double x1_hat, double y0_hat,
               double y1_hat);

/// Geometric overlaps between the transverse polarization unit vectors of
/// two propagating plane waves of equal transverse wavenumber k_perp whose
/// azimuths differ by dphi.
struct PolarizationOverlap {
  double ss, sp, ps, pp;
};
PolarizationOverlap polarization_overlap(double k_perp, double k0, double dphi);

/// Phase target read off a focal-shape mask: the argument of the mask's
/// Fourier transform, evaluated on the aperture grid through the focal
/// mapping Q = q0 R / (z_f - z_L).  The mask side must be even; the
/// returned map has mask.n()/2 + 1 nodes per axis spanning [-R_max, R_max].
PhaseMap2D target_phase_from_shape(const ShapeMask& mask,
                                   const MicroscopeGeometry& geom,
                                   const ElectronParams& el);

/// Ideal low-pass of a square phase map: Fourier components with
/// |k| >= k0 are removed.  Grid must cover the aperture radius R_max.
PhaseMap2D lowpass_filter_2d(const PhaseMap2D& phase, double k0, double R_max_nm);

/// Same projection as spatial convolution with the k0 J1(k0 R)/(2 pi R)
/// point-spread kernel, summed over the map window.  Independent of the
/// Fourier route; agreement holds on fields that decay inside the window.
PhaseMap2D lowpass_filter_2d_psf(const PhaseMap2D& phase, double k0, double R_max_nm);

/// Full synthesis pipeline: mask -> phase target -> low-pass -> focal
/// wavefunction with no aberration and the defocus balanced to zero.
FocalProfile2D synthesize_focus(const ShapeMask& mask,
                                const MicroscopeGeometry& geom,
                                const ElectronParams& el,
                                const LightParams& light, int pad = 4,
                                double focal_half_width_hat = 0.0);

/// Brute-force phase evaluation on an aperture grid: per node, the radial
/// wavenumber integral and both azimuth integrals are carried out in full.
/// Cost grows like the fifth power of the linear size, so grids larger than
/// max_nodes per axis are rejected; use phase_fast for those.
/// The returned phase is absolute (the constant offset is included).
PhaseMap2D phase_direct_quadrature(const LightSpectrum2D& spec,
                                   const ElectronParams& el,
                                   const std::vector<double>& x_nodes,
                                   const std::vector<double>& y_nodes,
                                   int max_nodes = 64);

/// Single-point variant of the brute-force evaluation (absolute phase).
double phase_direct_at(const LightSpectrum2D& spec, const ElectronParams& el,
                       double x, double y);

struct FastPhaseResult {
  PhaseMap2D map;           // zero-mean spatial phase on the conjugate grid
  double diagonal_constant; // adding it to map restores the absolute phase
  bool has_diagonal = false;
  double dk = 0.0;          // spectral node spacing of phi_k
  // Raw Fourier coefficients of the phase before Hermitian symmetrization,
  // on the spectrum's own node layout, row-major with kx fastest.
  std::vector<std::complex<double>> phi_k;
};

/// Fourier-space phase evaluation: for each transverse mode the wavenumber
/// delta is collapsed analytically, leaving one angular integral taken with
/// the tangent substitution; an inverse FFT then yields the map on the grid
/// conjugate to the spectrum (spacing 2 pi / (n dk)).  Cost ~ n^3.
/// The spectrum grid must have an even number of nodes per axis.  When
/// with_diagonal is set, the constant offset is anchored with a one-point
/// brute-force evaluation and reported in the result.
FastPhaseResult phase_fast(const LightSpectrum2D& spec, const ElectronParams& el,
                           bool with_diagonal = true);

}  // namespace ofem

#endif
