#include "ofem/imprint.hpp"

#include <cmath>
#include <stdexcept>

#include "ofem/bessel.hpp"
#include "ofem/errors.hpp"
#include "ofem/quadrature.hpp"
#include "ofem/units.hpp"

namespace ofem {

namespace {

double weighted_intensity(const FieldSample& f, double inv_gamma2) {
  return std::norm(f.Ex) + std::norm(f.Ey) + inv_gamma2 * std::norm(f.Ez);
}

// Trapezoid over [-Z, Z] with uniform step, n intervals.
double trapezoid(const std::function<double(double)>& w, double Z, int n) {
  const double h = 2.0 * Z / n;
  double sum = 0.5 * (w(-Z) + w(Z));
  for (int i = 1; i < n; ++i) sum += w(-Z + h * i);
  return sum * h;
}

}  // namespace

PhaseMap1D imprint_phase(
    const std::function<FieldSample(double R, double z)>& field,
    const std::vector<double>& R_nodes, const ElectronParams& electron,
    double omega, const ZQuadControl& ctl) {
  if (!(omega > 0.0)) throw std::domain_error("imprint_phase: omega must be positive");

  const double inv_gamma2 = 1.0 / (electron.gamma * electron.gamma);
  const double c = units::c_nm_per_s;
  const double M_omega2 = electron.Mc2 * omega * omega / (c * c);  // keV/nm^2

  PhaseMap1D out;
  out.x = R_nodes;
  out.phi.resize(R_nodes.size());

  for (std::size_t ir = 0; ir < R_nodes.size(); ++ir) {
    const double R = R_nodes[ir];
    auto w = [&](double z) { return weighted_intensity(field(R, z), inv_gamma2); };

    double Z = ctl.z_half_range > 0.0 ? ctl.z_half_range : 1e5;
    double integral = 0.0;
    bool tail_ok = false;
    double tail_rel = 0.0;

    for (int grow = 0; grow <= ctl.max_range_doublings; ++grow) {
      int n = 128;
      integral = trapezoid(w, Z, n);
      for (int halve = 0; halve < ctl.max_step_halvings; ++halve) {
        n *= 2;
        const double finer = trapezoid(w, Z, n);
        const double err = std::fabs(finer - integral);
        integral = finer;
        if (err <= ctl.rel_tol * std::max(std::fabs(finer), 1e-300)) break;
      }

      // Algebraic-tail estimate: beyond the window the intensity of a focused
      // beam falls off at least like 1/z^2, so sup(w z^2) over the outer
      // quarter bounds the remainder by C/Z per side.
      double C = 0.0;
      const int probes = 32;
      for (int i = 0; i <= probes; ++i) {
        const double z = 0.75 * Z + 0.25 * Z * i / probes;
        C = std::max(C, std::max(w(z), w(-z)) * z * z);
      }
      const double tail = 2.0 * C / Z;
      tail_rel = tail / std::max(std::fabs(integral), 1e-300);
      if (tail_rel <= ctl.tail_tol) {
        tail_ok = true;
        break;
      }
      Z *= 2.0;
    }
    if (!tail_ok)
      throw ConvergenceError(
          "imprint_phase: z window kept an estimated tail above tolerance",
          -integral / M_omega2, tail_rel);

    out.phi[ir] = -integral / M_omega2;
  }
  return out;
}

double vortex_phase_radial_profile(int m,
                                   const std::function<cplx(double)>& beta_s,
                                   const std::function<cplx(double)>& beta_p,
                                   double k0, const ElectronParams& electron,
                                   double R) {
  if (m < 0) throw std::domain_error("vortex_phase_radial_profile: m must be >= 0");
  if (!(k0 > 0.0)) throw std::domain_error("vortex_phase_radial_profile: k0 must be positive");

  const double inv_gamma2 = 1.0 / (electron.gamma * electron.gamma);
  const cplx i{0.0, 1.0};

  auto integrand = [&](double kp) {
    const double kz = std::sqrt(std::max(0.0, k0 * k0 - kp * kp));
    const cplx bs = beta_s(kp), bp = beta_p(kp);
    double buf[8];
    const double x = kp * R;
    bessel_j_upto(m + 1, x, buf);
    const double jm_minus = (m == 0) ? buf[1] : buf[m - 1];  // squared below
    const cplx mix = i * (kz / k0) * bp;
    // The transverse field splits its weight across the two neighbouring
    // Bessel orders ((m J_m / x)^2 + J_m'^2 = (J_{m-1}^2 + J_{m+1}^2) / 2),
    // while the longitudinal part keeps its full J_m^2 weight, hence the 2.
    return kp * kz *
           (std::norm(bs + mix) * jm_minus * jm_minus +
            std::norm(bs - mix) * buf[m + 1] * buf[m + 1] +
            2.0 * (kp * kp / (k0 * k0)) * inv_gamma2 * std::norm(bp) *
                buf[m] * buf[m]);
  };

  const double c = units::c_nm_per_s;
  const double omega = c * k0;
  const double front = -c * c / (4.0 * units::pi * electron.Mc2 * omega * omega);
  return front * integrate_gk(integrand, 0.0, k0, 1e-9);
}

double vortex_phase_radial(const VortexBeamSpec& spec,
                           const ElectronParams& electron, double R) {
  spec.validate();
  const double kt = spec.k_top();
  auto bs = [&](double kp) { return kp <= kt ? spec.beta_s : cplx{}; };
  auto bp = [&](double kp) { return kp <= kt ? spec.beta_p : cplx{}; };
  // Integrate only over the top-hat support so the quadrature never sees the
  // cutoff discontinuity.
  const double inv_gamma2 = 1.0 / (electron.gamma * electron.gamma);
  const double k0 = spec.k0;
  const cplx i{0.0, 1.0};
  const int m = spec.m;

  auto integrand = [&](double kp) {
    const double kz = std::sqrt(std::max(0.0, k0 * k0 - kp * kp));
    double buf[8];
    bessel_j_upto(m + 1, kp * R, buf);
    const double jm_minus = (m == 0) ? buf[1] : buf[m - 1];
    const cplx mix = i * (kz / k0) * spec.beta_p;
    // Factor 2 on the longitudinal term for the same reason as in the
    // profile overload: the transverse weight halves across J_{m-1}, J_{m+1}.
    return kp * kz *
           (std::norm(spec.beta_s + mix) * jm_minus * jm_minus +
            std::norm(spec.beta_s - mix) * buf[m + 1] * buf[m + 1] +
            2.0 * (kp * kp / (k0 * k0)) * inv_gamma2 * std::norm(spec.beta_p) *
                buf[m] * buf[m]);
  };

  const double c = units::c_nm_per_s;
  const double omega = c * k0;
  const double front = -c * c / (4.0 * units::pi * electron.Mc2 * omega * omega);
  return front * integrate_gk(integrand, 0.0, kt, 1e-9);
}

double vortex_phase_paraxial(int m, double power_W, double theta_L,
                             const ElectronParams& electron,
                             const LightParams& light, double R) {
  if (m < 0) throw std::domain_error("vortex_phase_paraxial: m must be >= 0");
  if (m == 0) return 0.0;  // no term at lowest Bessel order
  const double p_keV_s = power_W * units::watt_to_keV_per_s;
  double fact = 1.0;
  for (int j = 2; j <= m; ++j) fact *= j;
  const double base = light.k0 * theta_L * R / 2.0;
  return -units::pi * m * p_keV_s /
         (fact * fact * electron.Mc2 * light.omega) *
         std::pow(base, 2 * (m - 1));
}

double phase_m3_paraxial_main_text(double power_W, double theta_L,
                                   const ElectronParams& electron,
                                   const LightParams& light, double R) {
  const double p_keV_s = power_W * units::watt_to_keV_per_s;
  const double u = theta_L * R / light.lambda0;
  return -units::pi * units::pi * p_keV_s /
         (96.0 * electron.Mc2 * light.omega) * u * u * u * u;
}

double phase_m3_paraxial_appendix(double power_W, double theta_L,
                                  const ElectronParams& electron,
                                  const LightParams& light, double R) {
  return vortex_phase_paraxial(3, power_W, theta_L, electron, light, R);
}

M3Arbitration phase_m3_arbitrate(double power_W, double theta_L,
                                 const ElectronParams& electron,
                                 const LightParams& light, double R) {
  VortexBeamSpec spec;
  spec.m = 3;
  spec.theta_L = theta_L;
  spec.k0 = light.k0;
  spec.beta_s = cplx{1.0, 0.0};
  spec.beta_p = cplx{0.0, 0.0};
  spec = scale_to_power(spec, power_W);

  M3Arbitration a;
  a.quadrature = vortex_phase_radial(spec, electron, R);
  a.main_text = phase_m3_paraxial_main_text(power_W, theta_L, electron, light, R);
  a.appendix = phase_m3_paraxial_appendix(power_W, theta_L, electron, light, R);
  const double scale = std::fabs(a.quadrature);
  const double err_main = std::fabs(a.main_text - a.quadrature) / scale;
  const double err_app = std::fabs(a.appendix - a.quadrature) / scale;
  a.winner = err_app <= err_main ? "paraxial_appendix" : "paraxial_main_text";
  return a;
}

double effective_length(double theta_L, double lambda0) {
  if (!(theta_L > 0.0))
    throw std::domain_error("effective_length: theta_L = 0 gives an infinite interaction length");
  if (!(lambda0 > 0.0)) throw std::domain_error("effective_length: lambda0 must be positive");
  return 2.0 * lambda0 / (theta_L * theta_L);
}

double power_for_phase(double phi_target, const ElectronParams& electron,
                       const LightParams& light) {
  const double p_keV_s =
      std::fabs(phi_target / (2.0 * units::pi)) * 2.0 * electron.Mc2 * light.omega;
  return p_keV_s * units::keV_per_s_in_W;
}

double aberration_correction_power(double C3_mm, const ElectronParams& electron,
                                   const LightParams& light, double theta_L,
                                   double z_f_minus_z_L_mm,
                                   std::string* warning) {
  if (!(theta_L > 0.0))
    throw std::domain_error("aberration_correction_power: theta_L must be positive");
  if (!(z_f_minus_z_L_mm > 0.0))
    throw std::domain_error("aberration_correction_power: z_f - z_L must be positive");

  const double theta_limit = 0.15 * units::deg_to_rad;
  if (theta_L >= theta_limit && warning) {
    *warning +=
        "theta_L is not small against 0.15 deg; the R^4 closed form may not "
        "cover the full aperture (needs R << lambda0/(2 pi theta_L))";
  }

  const double C3 = C3_mm * units::mm_to_nm;
  const double d = z_f_minus_z_L_mm * units::mm_to_nm;
  const double pi4 = std::pow(units::pi, 4);
  const double hbar_c2 = units::hbar_c_keV_nm * units::c_nm_per_s;  // keV nm^2 / s
  const double p_keV_s = 6.0 * hbar_c2 * units::inv_alpha / pi4 * C3 *
                         electron.q0 * electron.q0 *
                         std::pow(light.lambda0, 3) /
                         (std::pow(theta_L, 4) * std::pow(d, 4));
  return p_keV_s * units::keV_per_s_in_W;
}

}  // namespace ofem
