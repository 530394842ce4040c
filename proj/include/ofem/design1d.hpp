#ifndef OFEM_DESIGN1D_HPP
#define OFEM_DESIGN1D_HPP

#include <vector>

#include "ofem/imprint.hpp"
#include "ofem/kinematics.hpp"
#include "ofem/lightfield.hpp"

namespace ofem {

/// Desired phase profile on a uniform transverse grid (nm, rad).
struct TargetPhase1D {
  std::vector<double> x;
  std::vector<double> phi;
};

/// Ideal low-pass smoothing of the target with the sin(2 k0 (x-x'))/(x-x')
/// window kernel: the best phase a beam limited to |kx| < k0 can realize.
/// The target must resolve the kernel (at least 8 samples per light
/// wavelength) or the call throws.
PhaseMap1D diffraction_limited_phase(const TargetPhase1D& target, double k0);

/// Particular light-spectrum solution realizing the target: the coefficient
/// product beta(kx) beta*(-kx) is read off the target's Fourier transform and
/// split by a continuity-preserving square root with beta(kx) = beta*(-kx).
/// n_k (even) is the spectral resolution of the returned cell-centered grid.
LightSpectrum1D invert_beam_coefficients(const TargetPhase1D& target,
                                         const ElectronParams& el,
                                         const LightParams& light,
                                         int n_k = 16384);

/// Phase imprinted by a 1D spectrum, evaluated on x_nodes, with the grid's
/// zero-mean convention.  If phi0_total is given it receives the constant
/// that restores the absolute (non-positive) phase of the underlying field:
/// the R-independent diagonal term plus the subtracted window mean.
/// Spectra whose coefficient product does not vanish at least linearly
/// toward kx = 0 make the reconstruction integral singular and are rejected.
PhaseMap1D forward_phase_from_beta(const LightSpectrum1D& spec,
                                   const ElectronParams& el,
                                   const std::vector<double>& x_nodes,
                                   double* phi0_total = nullptr);

}  // namespace ofem

#endif
