#include "ofem/lightfield.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "ofem/bessel.hpp"
#include "ofem/quadrature.hpp"
#include "ofem/units.hpp"

namespace ofem {

LightSpectrum2D::LightSpectrum2D(double k0, int n) : k0_(k0), n_(n) {
  if (!(k0 > 0.0)) throw std::domain_error("LightSpectrum2D: k0 must be positive");
  if (n < 2) throw std::invalid_argument("LightSpectrum2D: need at least 2 nodes per axis");
  step_ = 2.0 * k0 / (n - 1);
  bs_.assign(static_cast<std::size_t>(n) * n, cplx{});
  bp_.assign(static_cast<std::size_t>(n) * n, cplx{});
}

void LightSpectrum2D::set(int ix, int iy, cplx beta_s, cplx beta_p) {
  if (ix < 0 || ix >= n_ || iy < 0 || iy >= n_)
    throw std::out_of_range("LightSpectrum2D::set: node index out of range");
  const double kx = node(ix), ky = node(iy);
  if (kx * kx + ky * ky >= k0_ * k0_) return;  // propagating waves only
  bs_[idx(ix, iy)] = beta_s;
  bp_[idx(ix, iy)] = beta_p;
}

void LightSpectrum2D::interp(double kx, double ky, cplx& beta_s,
                             cplx& beta_p) const {
  beta_s = cplx{};
  beta_p = cplx{};
  if (kx * kx + ky * ky >= k0_ * k0_) return;

  const double fx = (kx + k0_) / step_;
  const double fy = (ky + k0_) / step_;
  const int ix = static_cast<int>(std::floor(fx));
  const int iy = static_cast<int>(std::floor(fy));
  if (ix < 0 || iy < 0 || ix >= n_ - 1 || iy >= n_ - 1) return;
  const double tx = fx - ix, ty = fy - iy;

  const double w00 = (1.0 - tx) * (1.0 - ty);
  const double w10 = tx * (1.0 - ty);
  const double w01 = (1.0 - tx) * ty;
  const double w11 = tx * ty;
  beta_s = w00 * bs_[idx(ix, iy)] + w10 * bs_[idx(ix + 1, iy)] +
           w01 * bs_[idx(ix, iy + 1)] + w11 * bs_[idx(ix + 1, iy + 1)];
  beta_p = w00 * bp_[idx(ix, iy)] + w10 * bp_[idx(ix + 1, iy)] +
           w01 * bp_[idx(ix, iy + 1)] + w11 * bp_[idx(ix + 1, iy + 1)];
}

LightSpectrum1D::LightSpectrum1D(double k0, int n) : k0_(k0), n_(n) {
  if (!(k0 > 0.0)) throw std::domain_error("LightSpectrum1D: k0 must be positive");
  if (n < 1) throw std::invalid_argument("LightSpectrum1D: need at least 1 node");
  step_ = 2.0 * k0 / n;
  b_.assign(n, cplx{});
}

double VortexBeamSpec::k_top() const { return k0 * std::min(1.0, theta_L); }

void VortexBeamSpec::validate() const {
  if (m < 0) throw std::domain_error("VortexBeamSpec: azimuthal number m must be >= 0");
  if (!(theta_L > 0.0) || !(theta_L < units::pi / 2.0))
    throw std::domain_error("VortexBeamSpec: theta_L must lie in (0, pi/2)");
  if (!(k0 > 0.0)) throw std::domain_error("VortexBeamSpec: k0 must be positive");
}

FieldSample sample_field_1d(const LightSpectrum1D& spec, double x, double z) {
  const double k0 = spec.k0();
  cplx acc{};
  for (int i = 0; i < spec.n(); ++i) {
    const cplx b = spec.b(i);
    if (b == cplx{}) continue;
    const double kx = spec.node(i);
    const double kz = std::sqrt(k0 * k0 - kx * kx);
    acc += b * std::polar(1.0, kx * x + kz * z);
  }
  FieldSample out;
  out.Ey = acc * (spec.step() / (2.0 * units::pi));
  return out;
}

namespace {

// J_m(x)/x * m, J_m'(x), J_m(x) with the exact x -> 0 limits.
struct BesselFactors {
  double m_jm_over_x;
  double jm_prime;
  double jm;
};

BesselFactors bessel_factors(int m, double x) {
  if (x == 0.0) {
    return {m == 1 ? 0.5 : 0.0, m == 1 ? 0.5 : 0.0, m == 0 ? 1.0 : 0.0};
  }
  double buf[8];
  bessel_j_upto(m + 1, x, buf);
  const double jm_minus = (m == 0) ? -buf[1] : buf[m - 1];
  return {m * buf[m] / x, 0.5 * (jm_minus - buf[m + 1]), buf[m]};
}

cplx integrate_complex(const std::function<cplx(double)>& f, double a, double b,
                       double rel_tol) {
  const double re = integrate_gk([&](double t) { return f(t).real(); }, a, b, rel_tol);
  const double im = integrate_gk([&](double t) { return f(t).imag(); }, a, b, rel_tol);
  return {re, im};
}

}  // namespace

FieldSample sample_vortex_field(const VortexBeamSpec& spec, double R,
                                double phi, double z) {
  spec.validate();
  const double k0 = spec.k0;
  const double kt = spec.k_top();
  const int m = spec.m;

  // Cylindrical components of the integrand of the k_perp integral:
  //   i beta_s E_s - beta_p E_p per unit k_perp dk_perp, with
  //   E_s = [ (i m / k_perp R) J_m Rhat - J_m' phihat ]
  //   E_p = (k_z/k0) [ i J_m' Rhat - (m / k_perp R) J_m phihat ] + (k_perp/k0) J_m zhat
  auto radial = [&](double kp) {
    const double kz = std::sqrt(k0 * k0 - kp * kp);
    const BesselFactors f = bessel_factors(m, kp * R);
    const cplx osc = std::polar(1.0, kz * z);
    const cplx i{0.0, 1.0};
    const cplx er = spec.beta_s * i * (i * f.m_jm_over_x) -
                    spec.beta_p * (kz / k0) * (i * f.jm_prime);
    const cplx ep = spec.beta_s * i * (-f.jm_prime) +
                    spec.beta_p * (kz / k0) * f.m_jm_over_x;
    const cplx ez = -spec.beta_p * (kp / k0) * f.jm;
    return std::array<cplx, 3>{kp * osc * er, kp * osc * ep, kp * osc * ez};
  };

  const double tol = 1e-10;
  const cplx ER = integrate_complex([&](double k) { return radial(k)[0]; }, 0.0, kt, tol);
  const cplx EP = integrate_complex([&](double k) { return radial(k)[1]; }, 0.0, kt, tol);
  const cplx EZ = integrate_complex([&](double k) { return radial(k)[2]; }, 0.0, kt, tol);

  // i^m / 2pi prefactor and the e^{i m phi} winding
  const cplx front = std::polar(1.0, 0.5 * units::pi * m + m * phi) / (2.0 * units::pi);
  const cplx er = front * ER, ep = front * EP, ez = front * EZ;

  FieldSample out;
  const double c = std::cos(phi), s = std::sin(phi);
  out.Ex = er * c - ep * s;
  out.Ey = er * s + ep * c;
  out.Ez = ez;
  return out;
}

double beam_power(const LightSpectrum2D& spec) {
  const double k0 = spec.k0();
  const double omega = units::c_nm_per_s * k0;
  double sum = 0.0;
  for (int iy = 0; iy < spec.n(); ++iy) {
    const double ky = spec.node(iy);
    for (int ix = 0; ix < spec.n(); ++ix) {
      const double kx = spec.node(ix);
      const double k2 = kx * kx + ky * ky;
      if (k2 >= k0 * k0) continue;
      const double kz = std::sqrt(k0 * k0 - k2);
      sum += kz * (std::norm(spec.bs(ix, iy)) + std::norm(spec.bp(ix, iy)));
    }
  }
  const double c = units::c_nm_per_s;
  const double p_keV_s = c * c / (8.0 * units::pi * units::pi * units::pi * omega) *
                         sum * spec.step() * spec.step();
  return p_keV_s * units::keV_per_s_in_W;
}

double beam_power(const VortexBeamSpec& spec) {
  spec.validate();
  const double k0 = spec.k0;
  const double kt = spec.k_top();
  const double omega = units::c_nm_per_s * k0;
  // closed form of int_0^kt k sqrt(k0^2 - k^2) dk
  const double inner = k0 * k0 - kt * kt;
  const double radial = (k0 * k0 * k0 - std::pow(inner, 1.5)) / 3.0;
  const double c = units::c_nm_per_s;
  const double p_keV_s = c * c / (4.0 * units::pi * units::pi * omega) * radial *
                         (std::norm(spec.beta_s) + std::norm(spec.beta_p));
  return p_keV_s * units::keV_per_s_in_W;
}

double beam_power_paraxial(const VortexBeamSpec& spec) {
  spec.validate();
  const double omega = units::c_nm_per_s * spec.k0;
  const double p_keV_s = spec.theta_L * spec.theta_L * omega * omega /
                         (8.0 * units::pi * units::pi * units::c_nm_per_s) *
                         (std::norm(spec.beta_s) + std::norm(spec.beta_p));
  return p_keV_s * units::keV_per_s_in_W;
}

VortexBeamSpec scale_to_power(VortexBeamSpec spec, double watts) {
  if (!(watts >= 0.0)) throw std::domain_error("scale_to_power: negative power");
  const double now = beam_power(spec);
  if (!(now > 0.0))
    throw std::domain_error("scale_to_power: spec carries no power to scale");
  const double s = std::sqrt(watts / now);
  spec.beta_s *= s;
  spec.beta_p *= s;
  return spec;
}

}  // namespace ofem
