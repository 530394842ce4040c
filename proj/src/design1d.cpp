#include "ofem/design1d.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "ofem/units.hpp"

namespace ofem {

namespace {

using cplx = std::complex<double>;

// Uniform ascending grid with at least two nodes; returns the step.
double checked_step(const std::vector<double>& x, const char* who) {
  if (x.size() < 2) throw std::invalid_argument(std::string(who) + ": grid needs at least 2 nodes");
  const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  if (!(dx > 0.0)) throw std::invalid_argument(std::string(who) + ": grid must ascend");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (std::fabs(x[i] - x[i - 1] - dx) > 1e-9 * dx)
      throw std::invalid_argument(std::string(who) + ": grid must be uniform");
  }
  return dx;
}

void check_sizes(const TargetPhase1D& t, const char* who) {
  if (t.x.size() != t.phi.size())
    throw std::invalid_argument(std::string(who) + ": x and phi sizes differ");
}

// M omega^2 in keV/nm^2 for phase formulas, from Mc^2 [keV] and omega [1/s].
double m_omega2(const ElectronParams& el, double omega) {
  const double c = units::c_nm_per_s;
  return el.Mc2 * omega * omega / (c * c);
}

}  // namespace

PhaseMap1D diffraction_limited_phase(const TargetPhase1D& target, double k0) {
  check_sizes(target, "diffraction_limited_phase");
  if (!(k0 > 0.0)) throw std::domain_error("diffraction_limited_phase: k0 must be positive");
  const double dx = checked_step(target.x, "diffraction_limited_phase");
  // The kernel oscillates with period pi/k0 (half the light wavelength); the
  // trapezoid sum needs at least 8 target samples per light wavelength.
  if (dx > units::pi / (4.0 * k0) * (1.0 + 1e-9))
    throw std::invalid_argument(
        "diffraction_limited_phase: target grid is undersampled, need >= 8 points per light wavelength");

  const std::size_t n = target.x.size();
  PhaseMap1D out;
  out.x = target.x;
  out.phi.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = target.x[i] - target.x[j];
      const double kern = (i == j) ? 2.0 * k0 : std::sin(2.0 * k0 * d) / d;
      const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      acc += w * kern * target.phi[j];
    }
    out.phi[i] = acc * dx / units::pi;
  }
  return out;
}

LightSpectrum1D invert_beam_coefficients(const TargetPhase1D& target,
                                         const ElectronParams& el,
                                         const LightParams& light,
                                         int n_k) {
  check_sizes(target, "invert_beam_coefficients");
  if (n_k < 16 || n_k % 2 != 0)
    throw std::invalid_argument("invert_beam_coefficients: n_k must be even and at least 16");
  const double dx = checked_step(target.x, "invert_beam_coefficients");
  for (double p : target.phi)
    if (!std::isfinite(p)) throw std::invalid_argument("invert_beam_coefficients: target has non-finite phase");

  const double k0 = light.k0;
  const double momega2 = m_omega2(el, light.omega);
  LightSpectrum1D spec(k0, n_k);

  // Positive-kx half; the negative half follows from beta(-kx) = beta*(kx).
  const int half = n_k / 2;
  std::vector<cplx> s_pos(static_cast<std::size_t>(half));
  for (int i = 0; i < half; ++i) {
    const double kx = spec.node(half + i);
    cplx ft = 0.0;
    for (std::size_t j = 0; j < target.x.size(); ++j) {
      const double w = (j == 0 || j + 1 == target.x.size()) ? 0.5 : 1.0;
      ft += w * target.phi[j] * std::polar(1.0, -2.0 * kx * target.x[j]);
    }
    ft *= dx;
    const double kz = std::sqrt(std::max(0.0, k0 * k0 - kx * kx));
    s_pos[static_cast<std::size_t>(i)] =
        (kz > 0.0) ? cplx(-2.0 * momega2 * kx / kz) * ft : cplx(0.0);
  }

  // Square root on a continuous branch: unwrap the argument along ascending
  // kx before halving so beta does not flip sign between adjacent nodes.
  double prev_arg = 0.0;
  double offset = 0.0;
  bool have_prev = false;
  for (int i = 0; i < half; ++i) {
    const cplx s = s_pos[static_cast<std::size_t>(i)];
    const double mag = std::abs(s);
    double arg = (mag > 0.0) ? std::arg(s) : prev_arg;
    if (have_prev) {
      while (arg + offset - prev_arg > units::pi) offset -= 2.0 * units::pi;
      while (arg + offset - prev_arg < -units::pi) offset += 2.0 * units::pi;
    }
    const double unwrapped = arg + offset;
    prev_arg = unwrapped;
    have_prev = true;
    const cplx beta = std::polar(std::sqrt(mag), 0.5 * unwrapped);
    spec.set(half + i, beta);
    spec.set(half - 1 - i, std::conj(beta));
  }
  return spec;
}

PhaseMap1D forward_phase_from_beta(const LightSpectrum1D& spec,
                                   const ElectronParams& el,
                                   const std::vector<double>& x_nodes,
                                   double* phi0_total) {
  if (x_nodes.empty())
    throw std::invalid_argument("forward_phase_from_beta: x_nodes is empty");
  const int n = spec.n();
  if (n % 2 != 0)
    throw std::invalid_argument("forward_phase_from_beta: spectrum grid size must be even");

  const double k0 = spec.k0();
  const double omega = units::c_nm_per_s * k0;
  const double momega2 = m_omega2(el, omega);
  const double step = spec.step();
  const int half = n / 2;

  // Per positive node: pair product s = beta(kx) beta*(-kx) and the diagonal
  // weight |beta(kx)|^2 + |beta(-kx)|^2 that carries the constant offset.
  std::vector<double> kxs(static_cast<std::size_t>(half));
  std::vector<double> kz_over_kx(static_cast<std::size_t>(half));
  std::vector<cplx> s_pair(static_cast<std::size_t>(half));
  std::vector<double> diag(static_cast<std::size_t>(half));
  for (int i = 0; i < half; ++i) {
    const double kx = spec.node(half + i);
    const cplx bp = spec.b(half + i);
    const cplx bm = spec.b(half - 1 - i);
    kxs[static_cast<std::size_t>(i)] = kx;
    const double kz = std::sqrt(std::max(0.0, k0 * k0 - kx * kx));
    kz_over_kx[static_cast<std::size_t>(i)] = kz / kx;
    s_pair[static_cast<std::size_t>(i)] = bp * std::conj(bm);
    diag[static_cast<std::size_t>(i)] = std::norm(bp) + std::norm(bm);
  }

  // The reconstruction integrand carries 1/|kx|; it stays integrable only if
  // the pair product vanishes at least linearly toward kx = 0.  A surviving
  // product makes |s|/kx blow up against nodes a few steps out (by the node
  // ratio ~17 at the probe window), while a linear zero keeps it level, so a
  // local comparison separates the two without assuming anything about how
  // the spectrum is distributed over the rest of the band.
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(half));
  double total = 0.0;
  for (int i = 0; i < half; ++i) {
    const double m = std::abs(s_pair[static_cast<std::size_t>(i)]) + diag[static_cast<std::size_t>(i)];
    total += m;
    ratios.push_back(m / kxs[static_cast<std::size_t>(i)]);
  }
  const int lo = std::min(8, std::max(1, half / 4));
  const int hi = std::min(half - 1, 5 * lo);
  if (total > 0.0 && hi > lo) {
    double nearby = 0.0;
    for (int i = lo; i <= hi; ++i) nearby = std::max(nearby, ratios[static_cast<std::size_t>(i)]);
    if (ratios[0] > 4.0 * nearby && ratios[0] * kxs[0] > 1e-12 * total)
      throw std::domain_error(
          "forward_phase_from_beta: beta(kx) beta*(-kx) does not vanish toward kx = 0; "
          "the 1/|kx| reconstruction integral is singular at the innermost node");
  }

  PhaseMap1D out;
  out.x = x_nodes;
  out.phi.assign(x_nodes.size(), 0.0);
  const double front = -step / (2.0 * units::pi * momega2);
  double diag_term = 0.0;
  for (int i = 0; i < half; ++i)
    diag_term += front * kz_over_kx[static_cast<std::size_t>(i)] * diag[static_cast<std::size_t>(i)];

  for (std::size_t j = 0; j < x_nodes.size(); ++j) {
    double acc = 0.0;
    for (int i = 0; i < half; ++i) {
      const cplx osc = std::polar(1.0, 2.0 * kxs[static_cast<std::size_t>(i)] * x_nodes[j]);
      acc += 2.0 * (s_pair[static_cast<std::size_t>(i)] * osc).real() *
             kz_over_kx[static_cast<std::size_t>(i)];
    }
    out.phi[j] = front * acc;
  }

  double mean = 0.0;
  for (double p : out.phi) mean += p;
  mean /= static_cast<double>(out.phi.size());
  for (double& p : out.phi) p -= mean;
  if (phi0_total) *phi0_total = diag_term + mean;
  return out;
}

}  // namespace ofem
