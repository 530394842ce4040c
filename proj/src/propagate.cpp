#include "ofem/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ofem/fft.hpp"
#include "ofem/units.hpp"

namespace ofem {

namespace {

void check_uniform(const std::vector<double>& x, double& step) {
  if (x.size() < 2)
    throw std::invalid_argument("focal transform: need at least 2 phase nodes");
  step = x[1] - x[0];
  if (!(step > 0.0))
    throw std::invalid_argument("focal transform: phase grid must ascend");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (std::fabs(x[i] - x[i - 1] - step) > 1e-9 * step)
      throw std::invalid_argument("focal transform: phase grid must be uniform");
}

void check_coverage(double lo, double hi, double step, double R_max) {
  if (lo > -R_max + 0.51 * step || hi < R_max - 0.51 * step)
    throw std::invalid_argument(
        "focal transform: phase grid does not cover the aperture");
}

}  // namespace

void MicroscopeGeometry::validate() const {
  if (!(z_xo_mm < z_L_mm && z_L_mm < z_f_mm))
    throw std::domain_error("MicroscopeGeometry: need z_xo < z_L < z_f");
  if (!(f_mm > 0.0))
    throw std::domain_error("MicroscopeGeometry: focal length must be positive");
  const double na = NA();
  if (!(na > 0.0 && na < 1.0))
    throw std::domain_error("MicroscopeGeometry: NA must lie in (0, 1)");
}

MicroscopeGeometry MicroscopeGeometry::in_focus(double R_max_um) {
  MicroscopeGeometry g;
  g.z_xo_mm = -1.0;
  g.z_L_mm = 0.0;
  g.z_f_mm = 1.0;
  g.f_mm = 0.5;  // 1/(z_f-z_L) + 1/(z_L-z_xo) = 2 = 1/f
  g.R_max_um = R_max_um;
  g.validate();
  return g;
}

double AberrationSpec::chi(double theta, double q0) const {
  if (theta < 0.0) throw std::domain_error("AberrationSpec::chi: theta must be >= 0");
  if (!table_theta.empty()) {
    if (table_theta.size() != table_chi.size() || table_theta.size() < 2)
      throw std::invalid_argument("AberrationSpec: malformed chi table");
    if (theta <= table_theta.front()) return table_chi.front();
    if (theta >= table_theta.back()) return table_chi.back();
    const auto it =
        std::upper_bound(table_theta.begin(), table_theta.end(), theta);
    const std::size_t i = it - table_theta.begin();
    const double t =
        (theta - table_theta[i - 1]) / (table_theta[i] - table_theta[i - 1]);
    return table_chi[i - 1] + t * (table_chi[i] - table_chi[i - 1]);
  }
  const double t2 = theta * theta;
  return C3_mm * units::mm_to_nm * q0 * t2 * t2 / 4.0;
}

double aberration_phase(const AberrationSpec& spec, double theta, double q0) {
  return spec.chi(theta, q0);
}

std::vector<cplx> fresnel_propagate_1d(std::vector<cplx> psi, double dx,
                                       double distance_nm, double q0) {
  if (!(dx > 0.0) || !(q0 > 0.0))
    throw std::domain_error("fresnel_propagate_1d: dx and q0 must be positive");
  if (distance_nm == 0.0) return psi;
  const int n = static_cast<int>(psi.size());
  fft_inplace(psi, false);
  const double dq = 2.0 * units::pi / (n * dx);
  for (int i = 0; i < n; ++i) {
    const double Q = dq * fft_freq_index(i, n);
    psi[i] *= std::polar(1.0, -Q * Q * distance_nm / (2.0 * q0));
  }
  fft_inplace(psi, true);
  return psi;
}

std::vector<cplx> fresnel_propagate_2d(std::vector<cplx> psi, int nx, int ny,
                                       double dx, double dy,
                                       double distance_nm, double q0) {
  if (!(dx > 0.0) || !(dy > 0.0) || !(q0 > 0.0))
    throw std::domain_error("fresnel_propagate_2d: dx, dy, q0 must be positive");
  if (static_cast<std::size_t>(nx) * ny != psi.size())
    throw std::invalid_argument("fresnel_propagate_2d: grid shape mismatch");
  if (distance_nm == 0.0) return psi;
  fft2_inplace(psi, ny, nx, false);
  const double dqx = 2.0 * units::pi / (nx * dx);
  const double dqy = 2.0 * units::pi / (ny * dy);
  for (int iy = 0; iy < ny; ++iy) {
    const double Qy = dqy * fft_freq_index(iy, ny);
    for (int ix = 0; ix < nx; ++ix) {
      const double Qx = dqx * fft_freq_index(ix, nx);
      psi[static_cast<std::size_t>(iy) * nx + ix] *=
          std::polar(1.0, -(Qx * Qx + Qy * Qy) * distance_nm / (2.0 * q0));
    }
  }
  fft2_inplace(psi, ny, nx, true);
  return psi;
}

FocalProfile1D focal_wavefunction_1d(const PhaseMap1D& phase,
                                     const AberrationSpec& aberr,
                                     const MicroscopeGeometry& geom,
                                     const ElectronParams& el, int pad,
                                     double extra_delta_mm_inv) {
  geom.validate();
  if (pad < 4) throw std::invalid_argument("focal_wavefunction_1d: pad must be >= 4");
  if (phase.x.size() != phase.phi.size())
    throw std::invalid_argument("focal_wavefunction_1d: malformed phase map");

  double dx;
  check_uniform(phase.x, dx);
  const double R_max = geom.R_max_um * units::um_to_nm;
  check_coverage(phase.x.front(), phase.x.back(), dx, R_max);

  const double d_nm = (geom.z_f_mm - geom.z_L_mm) * units::mm_to_nm;
  const double delta_nm =
      (geom.delta_mm_inv() + extra_delta_mm_inv) / units::mm_to_nm;

  const int n = static_cast<int>(phase.x.size());
  const int P = pad * n;
  std::vector<cplx> a(P, cplx{});
  for (int j = 0; j < n; ++j) {
    const double x = phase.x[j];
    if (std::fabs(x) > R_max) continue;
    const double arg = phase.phi[j] + aberr.chi(std::fabs(x) / d_nm, el.q0) +
                       el.q0 * x * x * delta_nm / 2.0;
    a[j] = std::polar(1.0, arg);
  }
  fft_inplace(a, false);

  const double h = dx / R_max;       // normalized aperture step
  const double x0_hat = phase.x.front() / R_max;

  FocalProfile1D out;
  out.lambda_e_perp = geom.lambda_e_perp(el);
  out.x_f_hat.resize(P);
  out.psi.resize(P);
  double peak = 0.0;
  for (int k = 0; k < P; ++k) {
    const int signed_k = k - P / 2;
    const double nu = signed_k / (P * h);
    const cplx v = h * std::polar(1.0, -2.0 * units::pi * x0_hat * nu) *
                   a[(signed_k + P) % P];
    out.x_f_hat[k] = nu;
    out.psi[k] = v;
    peak = std::max(peak, std::abs(v));
  }
  out.raw_scale = peak;
  if (peak > 0.0)
    for (auto& v : out.psi) v /= peak;
  return out;
}

FocalProfile2D focal_wavefunction_2d(const PhaseMap2D& phase,
                                     const AberrationSpec& aberr,
                                     const MicroscopeGeometry& geom,
                                     const ElectronParams& el, int pad,
                                     double extra_delta_mm_inv,
                                     double focal_half_width_hat) {
  geom.validate();
  if (pad < 4) throw std::invalid_argument("focal_wavefunction_2d: pad must be >= 4");
  if (phase.nx != phase.ny || std::fabs(phase.dx - phase.dy) > 1e-12 * phase.dx)
    throw std::invalid_argument(
        "focal_wavefunction_2d: aperture grid must be square");

  const double R_max = geom.R_max_um * units::um_to_nm;
  check_coverage(phase.x(0), phase.x(phase.nx - 1), phase.dx, R_max);
  check_coverage(phase.y(0), phase.y(phase.ny - 1), phase.dy, R_max);

  const double d_nm = (geom.z_f_mm - geom.z_L_mm) * units::mm_to_nm;
  const double delta_nm =
      (geom.delta_mm_inv() + extra_delta_mm_inv) / units::mm_to_nm;

  const int n = phase.nx;
  const int P = pad * n;
  std::vector<cplx> a(static_cast<std::size_t>(P) * P, cplx{});
  for (int jy = 0; jy < n; ++jy) {
    const double y = phase.y(jy);
    for (int jx = 0; jx < n; ++jx) {
      const double x = phase.x(jx);
      const double r2 = x * x + y * y;
      if (r2 > R_max * R_max) continue;
      const double r = std::sqrt(r2);
      const double arg = phase.at(jx, jy) + aberr.chi(r / d_nm, el.q0) +
                         el.q0 * r2 * delta_nm / 2.0;
      a[static_cast<std::size_t>(jy) * P + jx] = std::polar(1.0, arg);
    }
  }
  fft2_inplace(a, P, P, false);

  const double h = phase.dx / R_max;
  const double x0_hat = phase.x(0) / R_max;
  const double y0_hat = phase.y(0) / R_max;
  const double dnu = 1.0 / (P * h);

  int k_lo = -P / 2, k_hi = P / 2 - 1;
  if (focal_half_width_hat > 0.0) {
    const int k_max = static_cast<int>(std::floor(focal_half_width_hat / dnu));
    k_lo = std::max(k_lo, -k_max);
    k_hi = std::min(k_hi, k_max);
  }
  const int m = k_hi - k_lo + 1;

  FocalProfile2D out;
  out.nx = out.ny = m;
  out.df_hat = dnu;
  out.fx0_hat = out.fy0_hat = k_lo * dnu;
  out.lambda_e_perp = geom.lambda_e_perp(el);
  out.psi.resize(static_cast<std::size_t>(m) * m);

  double peak = 0.0;
  for (int ky = k_lo; ky <= k_hi; ++ky) {
    const double nuy = ky * dnu;
    const cplx py = std::polar(1.0, -2.0 * units::pi * y0_hat * nuy);
    for (int kx = k_lo; kx <= k_hi; ++kx) {
      const double nux = kx * dnu;
      const cplx v = h * h * py *
                     std::polar(1.0, -2.0 * units::pi * x0_hat * nux) *
                     a[static_cast<std::size_t>((ky + P) % P) * P + (kx + P) % P];
      out.psi[static_cast<std::size_t>(ky - k_lo) * m + (kx - k_lo)] = v;
      peak = std::max(peak, std::abs(v));
    }
  }
  out.raw_scale = peak;
  if (peak > 0.0)
    for (auto& v : out.psi) v /= peak;
  return out;
}

DefocusScan defocus_scan(const PhaseMap1D& phase, const AberrationSpec& aberr,
                         const MicroscopeGeometry& geom,
                         const ElectronParams& el,
                         const std::vector<double>& delta_values_mm_inv,
                         int pad) {
  PhaseMap1D flat;
  flat.x = phase.x;
  flat.phi.assign(phase.x.size(), 0.0);
  const AberrationSpec none;
  const double ref =
      focal_wavefunction_1d(flat, none, geom, el, pad, 0.0).raw_scale;

  DefocusScan scan;
  scan.delta_mm_inv = delta_values_mm_inv;
  scan.strehl.reserve(delta_values_mm_inv.size());
  for (double dv : delta_values_mm_inv) {
    const double s =
        focal_wavefunction_1d(phase, aberr, geom, el, pad, dv).raw_scale;
    scan.strehl.push_back((s * s) / (ref * ref));
  }
  return scan;
}

double dismissed_focal_phase(const MicroscopeGeometry& geom,
                             const ElectronParams& el, double R_f_max_nm) {
  const double d_nm = (geom.z_f_mm - geom.z_L_mm) * units::mm_to_nm;
  return el.q0 * R_f_max_nm * R_f_max_nm / (2.0 * d_nm);
}

}  // namespace ofem
