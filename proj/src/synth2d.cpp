#include "ofem/synth2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ofem/bessel.hpp"
#include "ofem/fft.hpp"
#include "ofem/quadrature.hpp"
#include "ofem/units.hpp"

namespace ofem {

namespace {

using cplx = std::complex<double>;

double m_omega2(const ElectronParams& el, double omega) {
  const double c = units::c_nm_per_s;
  return el.Mc2 * omega * omega / (c * c);
}

// Runs fn(i) for i in [0, n) split over hardware threads.  Callers must make
// iterations independent; every output cell is owned by exactly one index.
template <typename Fn>
void parallel_for(int n, const Fn& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int nth = static_cast<int>(std::min<unsigned>(hw, 16u));
  if (nth <= 1 || n < 2 * nth) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nth));
  for (int t = 0; t < nth; ++t) {
    const int lo = static_cast<int>(static_cast<long long>(n) * t / nth);
    const int hi = static_cast<int>(static_cast<long long>(n) * (t + 1) / nth);
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Fixed composite Gauss-Kronrod rule: visit(node, weight) over [a, b].
template <typename Visit>
void gk15_fixed(double a, double b, int panels, const Visit& visit) {
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + h * (p + 0.5);
    const double half = 0.5 * h;
    visit(mid, half * gk_detail::kWeightK[0]);
    for (int i = 1; i < 8; ++i) {
      const double off = half * gk_detail::kNodes[i];
      const double w = half * gk_detail::kWeightK[i];
      visit(mid - off, w);
      visit(mid + off, w);
    }
  }
}

double checked_uniform(const std::vector<double>& v, const char* who) {
  if (v.empty()) throw std::invalid_argument(std::string(who) + ": empty node axis");
  if (v.size() == 1) return 0.0;
  const double d = (v.back() - v.front()) / static_cast<double>(v.size() - 1);
  if (!(d > 0.0)) throw std::invalid_argument(std::string(who) + ": nodes must ascend");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::fabs(v[i] - v[i - 1] - d) > 1e-9 * d)
      throw std::invalid_argument(std::string(who) + ": nodes must be uniform");
  return d;
}

// Radial tables for the brute-force evaluator: Gauss-Kronrod nodes over
// (0, k0) and the spectrum sampled on rings of n_phi azimuths.
struct DirectTables {
  int n_phi = 0;
  std::vector<double> k, w, kz;
  std::vector<double> cphi, sphi;       // azimuth direction cosines
  std::vector<double> cosd, sind;       // per difference index
  std::vector<cplx> bs, bp;             // ring-major: node * n_phi + j
};

DirectTables build_direct_tables(const LightSpectrum2D& spec) {
  DirectTables t;
  const int n = spec.n();
  const double k0 = spec.k0();
  t.n_phi = 2 * n;
  const int panels = std::max(2, n / 8);

  gk15_fixed(0.0, k0, panels, [&](double k, double w) {
    t.k.push_back(k);
    t.w.push_back(w);
    t.kz.push_back(std::sqrt(std::max(0.0, k0 * k0 - k * k)));
  });

  t.cphi.resize(t.n_phi);
  t.sphi.resize(t.n_phi);
  t.cosd.resize(t.n_phi);
  t.sind.resize(t.n_phi);
  for (int j = 0; j < t.n_phi; ++j) {
    const double phi = 2.0 * units::pi * j / t.n_phi;
    t.cphi[j] = std::cos(phi);
    t.sphi[j] = std::sin(phi);
    t.cosd[j] = std::cos(phi);
    t.sind[j] = std::sin(phi);
  }

  t.bs.resize(t.k.size() * t.n_phi);
  t.bp.resize(t.k.size() * t.n_phi);
  for (std::size_t r = 0; r < t.k.size(); ++r) {
    for (int j = 0; j < t.n_phi; ++j) {
      cplx bs, bp;
      spec.interp(t.k[r] * t.cphi[j], t.k[r] * t.sphi[j], bs, bp);
      t.bs[r * t.n_phi + j] = bs;
      t.bp[r * t.n_phi + j] = bp;
    }
  }
  return t;
}

// Absolute phase at one point from the prebuilt tables.  The double azimuth
// sum couples every ring direction with every other; the polarization
// overlaps depend only on the azimuth difference, so they enter through the
// cosd/sind tables with ring-level radial factors.
double direct_phase_point(const DirectTables& t, double k0, double inv_g2,
                          double momega2, double x, double y) {
  const int n_phi = t.n_phi;
  std::vector<cplx> as(n_phi), ap(n_phi);
  double total = 0.0;
  for (std::size_t r = 0; r < t.k.size(); ++r) {
    const double k = t.k[r];
    const double kz = t.kz[r];
    const double czk = kz / k0;
    const double c2 = czk * czk;
    const double cz = inv_g2 * k * k / (k0 * k0);
    const cplx* bs = &t.bs[r * n_phi];
    const cplx* bp = &t.bp[r * n_phi];
    for (int j = 0; j < n_phi; ++j) {
      const cplx e = std::polar(1.0, k * (x * t.cphi[j] + y * t.sphi[j]));
      as[j] = bs[j] * e;
      ap[j] = bp[j] * e;
    }
    double ring = 0.0;
    for (int j = 0; j < n_phi; ++j) {
      const double asr = as[j].real(), asi = as[j].imag();
      const double apr = ap[j].real(), api = ap[j].imag();
      for (int jp = 0; jp < n_phi; ++jp) {
        const int d = j - jp + (j < jp ? n_phi : 0);
        const double bsr = as[jp].real(), bsi = as[jp].imag();
        const double bpr = ap[jp].real(), bpi = ap[jp].imag();
        const double re_ss = asr * bsr + asi * bsi;
        const double re_sp = asr * bpr + asi * bpi;
        const double re_ps = apr * bsr + api * bsi;
        const double re_pp = apr * bpr + api * bpi;
        ring += re_ss * t.cosd[d] + czk * (re_ps - re_sp) * t.sind[d] +
                re_pp * (c2 * t.cosd[d] + cz);
      }
    }
    total += t.w[r] * k * kz * ring;
  }
  // (2 pi / n_phi)^2 azimuth measure folded with the 1/(8 pi^3) front.
  return -total / (2.0 * units::pi * momega2 * n_phi * n_phi);
}

// One pair-difference mode: the coupling integral runs along the hyperbolic
// chord kp = (q/2) cosh s of direction pairs whose difference is exactly q.
// Zero outside 0 < q < 2 k0, where no pair closes.
cplx chord_mode(const LightSpectrum2D& spec, double k0, double inv_g2,
                double momega2, double qx, double qy, int panels) {
  const double q = std::sqrt(qx * qx + qy * qy);
  if (q <= 0.0 || q >= 2.0 * k0) return cplx(0.0);
  const double ratio = 2.0 * k0 / q;
  const double u0 = std::sqrt(std::max(0.0, ratio * ratio - 1.0));
  if (u0 <= 0.0) return cplx(0.0);
  const double s_max = std::asinh(u0);
  const double cphi = qx / q, sphi = qy / q;

  cplx acc(0.0);
  gk15_fixed(-s_max, s_max, panels, [&](double s, double w) {
    const double ch = std::cosh(s);
    const double kp = 0.5 * q * ch;
    if (kp >= k0) return;
    const double cd = 1.0 / ch;        // cos of the half-opening angle
    const double sd = std::tanh(s);    // sin of it, signed
    const double kz = std::sqrt(k0 * k0 - kp * kp);

    const double c1x = cphi * cd - sphi * sd, c1y = sphi * cd + cphi * sd;
    const double c2x = -(cphi * cd + sphi * sd), c2y = -(sphi * cd - cphi * sd);
    cplx bs1, bp1, bs2, bp2;
    spec.interp(kp * c1x, kp * c1y, bs1, bp1);
    spec.interp(kp * c2x, kp * c2y, bs2, bp2);
    if (bs1 == cplx(0.0) && bp1 == cplx(0.0)) return;

    const double c2a = 2.0 * cd * cd - 1.0;  // cos of the full angle 2D
    const double s2a = 2.0 * sd * cd;
    const double czk = kz / k0;
    const double s_ss = -c2a;
    const double s_sp = +czk * s2a;
    const double s_ps = -czk * s2a;
    const double s_pp = -czk * czk * c2a + inv_g2 * kp * kp / (k0 * k0);

    const cplx term = bs1 * std::conj(bs2) * s_ss + bs1 * std::conj(bp2) * s_sp +
                      bp1 * std::conj(bs2) * s_ps + bp1 * std::conj(bp2) * s_pp;
    acc += (w * ch * kz) * term;
  });
  return acc / (-4.0 * units::pi * momega2);
}

// Radial weight of the spectrum along one azimuth, carrying the polarization
// factor that survives the perpendicular-pair limit q -> 0.
double ray_density(const LightSpectrum2D& spec, double k0, double inv_g2,
                   double psi) {
  const double cp = std::cos(psi), sp = std::sin(psi);
  double acc = 0.0;
  gk15_fixed(0.0, k0, 32, [&](double k, double w) {
    const double kz2 = k0 * k0 - k * k;
    if (kz2 <= 0.0) return;
    cplx bs, bp;
    spec.interp(k * cp, k * sp, bs, bp);
    acc += w * std::sqrt(kz2) *
           (std::norm(bs) + std::norm(bp) * (kz2 + inv_g2 * k * k) / (k0 * k0));
  });
  return acc;
}

const cplx kQuarterTurn[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};

}  // namespace

ShapeMask::ShapeMask(int n) : n_(n) {
  if (n < 4) throw std::invalid_argument("ShapeMask: side must be at least 4");
  cells.assign(static_cast<std::size_t>(n) * n, 0);
}

std::size_t ShapeMask::idx(int ix, int iy) const {
  if (ix < 0 || ix >= n_ || iy < 0 || iy >= n_)
    throw std::out_of_range("ShapeMask: pixel index outside grid");
  return static_cast<std::size_t>(iy) * n_ + ix;
}

int ShapeMask::count() const {
  int c = 0;
  for (auto v : cells) c += v != 0;
  return c;
}

ShapeMask disk_mask(int n, double cx_hat, double cy_hat, double r_hat) {
  ShapeMask m(n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double dx = m.coord_hat(ix) - cx_hat;
      const double dy = m.coord_hat(iy) - cy_hat;
      if (dx * dx + dy * dy <= r_hat * r_hat) m.set(ix, iy, true);
    }
  return m;
}

void fill_rect(ShapeMask& mask, double x0_hat, double x1_hat, double y0_hat,
               double y1_hat) {
  for (int iy = 0; iy < mask.n(); ++iy)
    for (int ix = 0; ix < mask.n(); ++ix) {
      const double px = mask.coord_hat(ix);
      const double py = mask.coord_hat(iy);
      if (px >= x0_hat && px <= x1_hat && py >= y0_hat && py <= y1_hat)
        mask.set(ix, iy, true);
    }
}

PolarizationOverlap polarization_overlap(double k_perp, double k0, double dphi) {
  if (!(k0 > 0.0) || k_perp < 0.0 || k_perp > k0)
    throw std::domain_error("polarization_overlap: need 0 <= k_perp <= k0");
  const double kz2 = k0 * k0 - k_perp * k_perp;
  const double czk = std::sqrt(kz2) / k0;
  PolarizationOverlap s;
  s.ss = std::cos(dphi);
  s.sp = -czk * std::sin(dphi);
  s.ps = +czk * std::sin(dphi);
  s.pp = (kz2 / (k0 * k0)) * std::cos(dphi) + k_perp * k_perp / (k0 * k0);
  return s;
}

PhaseMap2D target_phase_from_shape(const ShapeMask& mask,
                                   const MicroscopeGeometry& geom,
                                   const ElectronParams& el) {
  geom.validate();
  (void)el;
  const int M = mask.n();
  if (M % 2 != 0 || M < 8)
    throw std::invalid_argument("target_phase_from_shape: mask side must be even and at least 8");
  if (mask.count() == 0)
    throw std::invalid_argument("target_phase_from_shape: mask has no pixels switched on");

  // One aperture node per two mask pixels puts every Fourier phase on an
  // exact transform bin: node i maps to bin i - N/2 of the M-point DFT.
  std::vector<cplx> buf(static_cast<std::size_t>(M) * M);
  for (int iy = 0; iy < M; ++iy)
    for (int ix = 0; ix < M; ++ix)
      buf[static_cast<std::size_t>(iy) * M + ix] = mask.at(ix, iy) ? 1.0 : 0.0;
  fft2_inplace(buf, M, M, true);

  const int N = M / 2;
  const double R_max = geom.R_max_um * units::um_to_nm;
  PhaseMap2D out;
  out.nx = N + 1;
  out.ny = N + 1;
  out.dx = 2.0 * R_max / N;
  out.dy = out.dx;
  out.x0 = -R_max;
  out.y0 = -R_max;
  out.phi.resize(static_cast<std::size_t>(out.nx) * out.ny);
  for (int i2 = 0; i2 <= N; ++i2) {
    const int j2 = i2 - N / 2;
    const int b2 = (j2 + M) % M;
    for (int i1 = 0; i1 <= N; ++i1) {
      const int j1 = i1 - N / 2;
      const int b1 = (j1 + M) % M;
      // The pixel-centering phase (-1)^(j1+j2) re-centers the transform on
      // the mask's middle rather than its corner.
      const double parity = ((j1 + j2) & 1) ? -1.0 : 1.0;
      const cplx g = parity * buf[static_cast<std::size_t>(b2) * M + b1];
      out.at(i1, i2) = (g == cplx(0.0)) ? 0.0 : std::arg(g);
    }
  }
  return out;
}

namespace {

void check_square_coverage(const PhaseMap2D& phase, double R_max_nm, const char* who) {
  if (phase.nx != phase.ny || phase.nx < 4)
    throw std::invalid_argument(std::string(who) + ": map must be square");
  if (std::fabs(phase.dx - phase.dy) > 1e-9 * phase.dx || !(phase.dx > 0.0))
    throw std::invalid_argument(std::string(who) + ": map cells must be square");
  const double lo = phase.x(0), hi = phase.x(phase.nx - 1);
  if (lo > -R_max_nm + 0.51 * phase.dx || hi < R_max_nm - 0.51 * phase.dx)
    throw std::invalid_argument(std::string(who) + ": map does not cover the aperture radius");
}

}  // namespace

PhaseMap2D lowpass_filter_2d(const PhaseMap2D& phase, double k0, double R_max_nm) {
  check_square_coverage(phase, R_max_nm, "lowpass_filter_2d");
  const int n = phase.nx;
  std::vector<cplx> buf(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = phase.phi[i];
  fft2_inplace(buf, n, n, false);
  const double dk = 2.0 * units::pi / (n * phase.dx);
  for (int iy = 0; iy < n; ++iy) {
    const double ky = dk * fft_freq_index(iy, n);
    for (int ix = 0; ix < n; ++ix) {
      const double kx = dk * fft_freq_index(ix, n);
      if (kx * kx + ky * ky >= k0 * k0)
        buf[static_cast<std::size_t>(iy) * n + ix] = 0.0;
    }
  }
  fft2_inplace(buf, n, n, true);
  PhaseMap2D out = phase;
  for (std::size_t i = 0; i < buf.size(); ++i) out.phi[i] = buf[i].real();
  return out;
}

PhaseMap2D lowpass_filter_2d_psf(const PhaseMap2D& phase, double k0, double R_max_nm) {
  check_square_coverage(phase, R_max_nm, "lowpass_filter_2d_psf");
  const int n = phase.nx;
  // Kernel values depend only on the index offset; tabulating them once
  // leaves a pure multiply-add convolution.
  const int span = 2 * n - 1;
  std::vector<double> kern(static_cast<std::size_t>(span) * span);
  parallel_for(span, [&](int oy) {
    const double ry = phase.dy * (oy - (n - 1));
    for (int ox = 0; ox < span; ++ox) {
      const double rx = phase.dx * (ox - (n - 1));
      const double r = std::sqrt(rx * rx + ry * ry);
      kern[static_cast<std::size_t>(oy) * span + ox] =
          (k0 * r < 1e-8) ? k0 * k0 / (4.0 * units::pi)
                          : k0 * bessel_j(1, k0 * r) / (2.0 * units::pi * r);
    }
  });
  PhaseMap2D out = phase;
  const double cell = phase.dx * phase.dy;
  parallel_for(n, [&](int iy) {
    for (int ix = 0; ix < n; ++ix) {
      double acc = 0.0;
      for (int jy = 0; jy < n; ++jy) {
        const double* krow =
            &kern[static_cast<std::size_t>(iy - jy + n - 1) * span + (ix + n - 1)];
        const double* prow = &phase.phi[static_cast<std::size_t>(jy) * n];
        for (int jx = 0; jx < n; ++jx) acc += krow[-jx] * prow[jx];
      }
      out.at(ix, iy) = acc * cell;
    }
  });
  return out;
}

FocalProfile2D synthesize_focus(const ShapeMask& mask,
                                const MicroscopeGeometry& geom,
                                const ElectronParams& el,
                                const LightParams& light, int pad,
                                double focal_half_width_hat) {
  const PhaseMap2D target = target_phase_from_shape(mask, geom, el);
  const double R_max = geom.R_max_um * units::um_to_nm;
  const PhaseMap2D filtered = lowpass_filter_2d(target, light.k0, R_max);
  // Balance the geometry's own defocus so the profile is taken in focus.
  return focal_wavefunction_2d(filtered, AberrationSpec{}, geom, el, pad,
                               -geom.delta_mm_inv(), focal_half_width_hat);
}

PhaseMap2D phase_direct_quadrature(const LightSpectrum2D& spec,
                                   const ElectronParams& el,
                                   const std::vector<double>& x_nodes,
                                   const std::vector<double>& y_nodes,
                                   int max_nodes) {
  const double dx = checked_uniform(x_nodes, "phase_direct_quadrature");
  const double dy = checked_uniform(y_nodes, "phase_direct_quadrature");
  const int nx = static_cast<int>(x_nodes.size());
  const int ny = static_cast<int>(y_nodes.size());
  if (nx > max_nodes || ny > max_nodes)
    throw std::invalid_argument(
        "phase_direct_quadrature: grid exceeds " + std::to_string(max_nodes) +
        " nodes per axis and the cost grows like N^5; use phase_fast instead");

  const DirectTables tables = build_direct_tables(spec);
  const double momega2 = m_omega2(el, units::c_nm_per_s * spec.k0());
  const double inv_g2 = 1.0 / (el.gamma * el.gamma);

  PhaseMap2D out;
  out.nx = nx;
  out.ny = ny;
  out.x0 = x_nodes.front();
  out.y0 = y_nodes.front();
  out.dx = dx;
  out.dy = dy;
  out.phi.resize(static_cast<std::size_t>(nx) * ny);
  parallel_for(nx * ny, [&](int i) {
    const int ix = i % nx, iy = i / nx;
    out.at(ix, iy) = direct_phase_point(tables, spec.k0(), inv_g2, momega2,
                                        x_nodes[ix], y_nodes[iy]);
  });
  return out;
}

double phase_direct_at(const LightSpectrum2D& spec, const ElectronParams& el,
                       double x, double y) {
  const DirectTables tables = build_direct_tables(spec);
  const double momega2 = m_omega2(el, units::c_nm_per_s * spec.k0());
  const double inv_g2 = 1.0 / (el.gamma * el.gamma);
  return direct_phase_point(tables, spec.k0(), inv_g2, momega2, x, y);
}

FastPhaseResult phase_fast(const LightSpectrum2D& spec, const ElectronParams& el,
                           bool with_diagonal) {
  const int n = spec.n();
  if (n % 2 != 0)
    throw std::invalid_argument("phase_fast: spectrum grid side must be even");
  const double k0 = spec.k0();
  const double dk = spec.step();
  const double momega2 = m_omega2(el, units::c_nm_per_s * k0);
  const double inv_g2 = 1.0 / (el.gamma * el.gamma);
  const int panels = std::max(8, n / 4);
  const double g = -0.5 * (n - 1);

  FastPhaseResult res;
  res.dk = dk;
  res.phi_k.assign(static_cast<std::size_t>(n) * n, cplx(0.0));
  parallel_for(n, [&](int a2) {
    for (int a1 = 0; a1 < n; ++a1)
      res.phi_k[static_cast<std::size_t>(a2) * n + a1] = chord_mode(
          spec, k0, inv_g2, momega2, spec.node(a1), spec.node(a2), panels);
  });

  // The inversion below reconstructs the field only at the map nodes, which
  // repeat with period 2 pi / dk.  Modes outside the n x n window therefore
  // land exactly on window nodes, picking up (-1)^(n-1) per index wrap from
  // the staggered layout.  Fold in everything inside the disk q < 2 k0.
  std::vector<cplx> work = res.phi_k;
  {
    std::vector<std::array<int, 4>> wraps;
    for (int s2 = -1; s2 <= 1; ++s2)
      for (int s1 = -1; s1 <= 1; ++s1) {
        if (s1 == 0 && s2 == 0) continue;
        for (int a2 = 0; a2 < n; ++a2)
          for (int a1 = 0; a1 < n; ++a1) {
            const double qx = dk * (a1 + s1 * n + g);
            const double qy = dk * (a2 + s2 * n + g);
            if (qx * qx + qy * qy >= 4.0 * k0 * k0) continue;
            wraps.push_back({a1, a2, s1, s2});
          }
      }
    std::vector<cplx> vals(wraps.size());
    parallel_for(static_cast<int>(wraps.size()), [&](int i) {
      const auto& w = wraps[static_cast<std::size_t>(i)];
      vals[static_cast<std::size_t>(i)] =
          chord_mode(spec, k0, inv_g2, momega2, dk * (w[0] + w[2] * n + g),
                     dk * (w[1] + w[3] * n + g), panels);
    });
    for (std::size_t i = 0; i < wraps.size(); ++i) {
      const auto& w = wraps[i];
      const double sgn = (((w[2] + w[3]) * (n - 1)) % 2) ? -1.0 : 1.0;
      work[static_cast<std::size_t>(w[1]) * n + w[0]] += sgn * vals[i];
    }
  }

  // Toward q -> 0 the modes behave like A(theta)/q + B(theta) + C(theta) q;
  // no lattice sum follows the 1/q spike or the cone kink.  Subtract the
  // tapered model S = (A/q + B + C q) W and add its transform back in closed
  // form after the inversion.  W = (1 - (q/qc)^4)^4: flat to fourth order at
  // the origin, so tapering the model does not reintroduce low-order kinks.
  const double qc = k0;
  auto taper = [qc](double q) {
    if (q >= qc) return 0.0;
    const double r2 = (q / qc) * (q / qc);
    const double u = 1.0 - r2 * r2;
    return u * u * u * u;
  };

  // Only direction pairs straddling the perpendicular azimuth survive the
  // q -> 0 chord limit, so A follows from the ray density a quarter turn
  // away on either side.
  constexpr int n_ang = 256;  // multiple of 4: quarter turns stay exact
  constexpr int n_harm = 48;
  std::vector<double> dens(n_ang);
  parallel_for(n_ang, [&](int i) {
    dens[static_cast<std::size_t>(i)] =
        ray_density(spec, k0, inv_g2, 2.0 * units::pi * i / n_ang);
  });
  std::vector<double> a_ang(n_ang);
  for (int i = 0; i < n_ang; ++i)
    a_ang[i] = -(dens[(i + n_ang / 4) % n_ang] + dens[(i + 3 * n_ang / 4) % n_ang]) /
               (2.0 * units::pi * momega2);
  std::vector<cplx> Ah(n_harm + 1);
  for (int j = 0; j <= n_harm; ++j) {
    cplx s(0.0);
    for (int i = 0; i < n_ang; ++i)
      s += a_ang[i] * std::polar(1.0, -2.0 * units::pi * j * i / n_ang);
    Ah[j] = s / static_cast<double>(n_ang);
  }
  auto a_model = [&](double th) {
    double s = Ah[0].real();
    for (int j = 1; j <= n_harm; ++j)
      s += 2.0 * (Ah[j] * std::polar(1.0, j * th)).real();
    return s;
  };

  // B and C come from the modes themselves: evaluate g(q) = phi - A/q on
  // three sub-lattice radii and extrapolate the quadratic through them to
  // q = 0.  Referencing the pointwise ray-density values rather than the
  // truncated harmonics keeps the 1/q subtraction from amplifying their
  // truncation error, and moderate radii keep its quadrature error from
  // being blown up by the extrapolation weights.
  constexpr int nb_ang = 64, nb_harm = 24;
  // High angular orders of B and C sit below the extraction noise floor, and
  // their cones q e^{ij theta} oscillate faster than the innermost lattice
  // rings can resolve, so subtracting them injects more aliasing than they
  // remove.  Keep only the orders that beat the noise.
  const int jb_cut = std::min(nb_harm, std::max(12, 3 * n / 8));
  const int jc_cut = std::min(8, std::max(2, n / 16));
  const int b_panels = std::max(96, 2 * n);
  std::vector<cplx> b_ang(nb_ang), c_ang(nb_ang);
  parallel_for(nb_ang, [&](int i) {
    const double th = 2.0 * units::pi * i / nb_ang;
    const double ct = std::cos(th), st = std::sin(th);
    const double a_ex = a_ang[(i * (n_ang / nb_ang)) % n_ang];
    cplx g[3];
    for (int r = 0; r < 3; ++r) {
      const double q = 0.25 * (r + 1) * dk;
      g[r] = chord_mode(spec, k0, inv_g2, momega2, q * ct, q * st, b_panels) -
             a_ex / q;
    }
    // Lagrange stencil for value and slope at 0 from radii dk {1/4, 1/2, 3/4}.
    b_ang[static_cast<std::size_t>(i)] = 3.0 * g[0] - 3.0 * g[1] + g[2];
    c_ang[static_cast<std::size_t>(i)] =
        (-10.0 * g[0] + 16.0 * g[1] - 6.0 * g[2]) / dk;
  });
  // Every coefficient of the expansion obeys F(theta + pi) = conj(F(theta));
  // projecting the harmonics onto that symmetry keeps the final map real.
  auto harmonics = [&](const std::vector<cplx>& ang) {
    std::vector<cplx> h(2 * nb_harm + 1);
    for (int j = -nb_harm; j <= nb_harm; ++j) {
      cplx s(0.0);
      for (int i = 0; i < nb_ang; ++i)
        s += ang[i] * std::polar(1.0, -2.0 * units::pi * j * i / nb_ang);
      h[j + nb_harm] = s / static_cast<double>(nb_ang);
    }
    for (int j = 0; j <= nb_harm; ++j) {
      const double par = (j % 2) ? -1.0 : 1.0;
      const cplx s = 0.5 * (h[nb_harm + j] + par * std::conj(h[nb_harm - j]));
      h[nb_harm + j] = s;
      h[nb_harm - j] = par * std::conj(s);
    }
    return h;
  };
  const std::vector<cplx> Bh = harmonics(b_ang);
  const std::vector<cplx> Ch = harmonics(c_ang);
  auto pair_model = [&](const std::vector<cplx>& h, double th, int jcut) {
    cplx s = h[nb_harm];
    for (int j = 1; j <= jcut; ++j)
      s += h[nb_harm + j] * std::polar(1.0, j * th) +
           h[nb_harm - j] * std::polar(1.0, -j * th);
    return s;
  };

  // Real spatial phase: enforce phi_k(-q) = conj(phi_k(q)) before inverting.
  // The node layout pairs index a with n-1-a on each axis.
  std::vector<cplx> sym(work.size());
  for (int a2 = 0; a2 < n; ++a2)
    for (int a1 = 0; a1 < n; ++a1) {
      const cplx v = work[static_cast<std::size_t>(a2) * n + a1];
      const cplx m = work[static_cast<std::size_t>(n - 1 - a2) * n + (n - 1 - a1)];
      sym[static_cast<std::size_t>(a2) * n + a1] = 0.5 * (v + std::conj(m));
    }
  for (int a2 = 0; a2 < n; ++a2)
    for (int a1 = 0; a1 < n; ++a1) {
      const double qx = spec.node(a1), qy = spec.node(a2);
      const double q = std::sqrt(qx * qx + qy * qy);
      if (q > 0.0 && q < qc) {
        const double th = std::atan2(qy, qx);
        sym[static_cast<std::size_t>(a2) * n + a1] -=
            (a_model(th) / q + pair_model(Bh, th, jb_cut) +
             pair_model(Ch, th, jc_cut) * q) *
            taper(q);
      }
    }

  // Off-center node layout: q(a) = dk (a + g).  Splitting the kernel into
  // index phases on both sides of the plain FFT keeps the transform exact.
  const double dR = 2.0 * units::pi / (n * dk);
  std::vector<cplx> buf(sym.size());
  for (int a2 = 0; a2 < n; ++a2)
    for (int a1 = 0; a1 < n; ++a1)
      buf[static_cast<std::size_t>(a2) * n + a1] =
          sym[static_cast<std::size_t>(a2) * n + a1] *
          std::polar(1.0, 2.0 * units::pi * g * (a1 + a2) / n);
  fft2_inplace(buf, n, n, true);

  const double scale = (dk * n) / (2.0 * units::pi);
  PhaseMap2D& map = res.map;
  map.nx = n;
  map.ny = n;
  map.dx = dR;
  map.dy = dR;
  map.x0 = dR * g;
  map.y0 = dR * g;
  map.phi.resize(buf.size());
  const cplx corner = std::polar(1.0, 4.0 * units::pi * g * g / n);
  for (int b2 = 0; b2 < n; ++b2)
    for (int b1 = 0; b1 < n; ++b1) {
      const cplx ph = corner * std::polar(1.0, 2.0 * units::pi * g * (b1 + b2) / n);
      map.phi[static_cast<std::size_t>(b2) * n + b1] =
          (buf[static_cast<std::size_t>(b2) * n + b1] * ph).real() * scale * scale;
    }

  // Transform of the subtracted model: expanding the plane wave in Bessel
  // harmonics reduces each angular order to one radial integral against the
  // taper.  No node sits at R = 0, so the orders stay finite.
  parallel_for(n * n, [&](int idx) {
    const int b1 = idx % n, b2 = idx / n;
    const double x = map.x(b1), y = map.y(b2);
    const double R = std::hypot(x, y), th_r = std::atan2(y, x);
    std::array<double, n_harm + 1> prof_a{};
    std::array<double, nb_harm + 1> prof_b{}, prof_c{};
    std::array<double, n_harm + 1> jb;
    const int rp = 4 + static_cast<int>(qc * R / 5.0);
    gk15_fixed(0.0, qc, rp, [&](double q, double w) {
      const double wt = w * taper(q);
      bessel_j_upto(n_harm, q * R, jb.data());
      for (int j = 0; j <= n_harm; ++j) prof_a[j] += wt * jb[j];
      for (int j = 0; j <= jb_cut; ++j) prof_b[j] += wt * q * jb[j];
      for (int j = 0; j <= jc_cut; ++j) prof_c[j] += wt * q * q * jb[j];
    });
    double s = Ah[0].real() * prof_a[0] + Bh[nb_harm].real() * prof_b[0] +
               Ch[nb_harm].real() * prof_c[0];
    for (int j = 1; j <= n_harm; ++j) {
      const cplx rot = kQuarterTurn[j & 3] * std::polar(1.0, j * th_r);
      s += 2.0 * (Ah[j] * rot).real() * prof_a[j];
      if (j <= jb_cut) s += 2.0 * (Bh[nb_harm + j] * rot).real() * prof_b[j];
      if (j <= jc_cut) s += 2.0 * (Ch[nb_harm + j] * rot).real() * prof_c[j];
    }
    map.phi[static_cast<std::size_t>(idx)] += s / (2.0 * units::pi);
  });

  double mean = 0.0;
  for (double v : map.phi) mean += v;
  mean /= static_cast<double>(map.phi.size());
  for (double& v : map.phi) v -= mean;

  if (with_diagonal) {
    const int b0 = n / 2;
    res.diagonal_constant =
        phase_direct_at(spec, el, map.x(b0), map.y(b0)) - map.at(b0, b0);
    res.has_diagonal = true;
  }
  return res;
}

}  // namespace ofem
