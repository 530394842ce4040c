#include "ofem/bessel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

// Integer-order J_n via the two classic kernels: Miller's normalized downward
// recurrence below the asymptotic regime, and the Hankel large-argument
// expansion (orders 0 and 1, then stable upward recurrence) above it.  Both
// are spelled out in Abramowitz & Stegun 9.12 and 9.2; the combination is
// accurate to ~1e-14 absolute across the range this library uses (|x| < 1e3,
// n <= a few tens).

namespace ofem {
namespace {

constexpr double kAsymptoticCutoff = 30.0;

// P and Q sums of the Hankel expansion:
//   J_n(x) = sqrt(2/(pi x)) [P cos(chi) - Q sin(chi)],  chi = x - (2n+1) pi/4
// with terms t_j = prod_{i<=j} (4n^2 - (2i-1)^2) / (j! 8^j).  Only used for
// n = 0, 1 where the series reaches machine precision well before it turns.
double hankel_j(int n, double x) {
  const double mu = 4.0 * n * n;
  double p = 1.0, q = 0.0;
  double term = 1.0;
  double prev_mag = 1.0;
  for (int j = 1; j < 40; ++j) {
    term *= (mu - (2.0 * j - 1.0) * (2.0 * j - 1.0)) / (8.0 * j * x);
    const double mag = std::fabs(term);
    if (mag > prev_mag) break;  // asymptotic series started diverging
    if (j % 2 == 1)
      q += (j % 4 == 1) ? term : -term;
    else
      p += (j % 4 == 2) ? -term : term;
    if (mag < 1e-17) break;
    prev_mag = mag;
  }
  const double chi = x - (0.5 * n + 0.25) * M_PI;
  return std::sqrt(2.0 / (M_PI * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Downward recurrence from a seed well above max(nmax, x), normalized with
// J_0 + 2 sum_k J_{2k} = 1.  Rescales on the way down so tiny x does not
// overflow the unnormalized iterates.
void miller_downward(int nmax, double x, double* out) {
  int start = static_cast<int>(std::ceil(std::max(static_cast<double>(nmax), x))) + 50;
  if (start % 2 == 1) ++start;

  std::vector<double> j(static_cast<size_t>(start) + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-30;
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    j[k - 1] = (2.0 * k / x) * j[k] - j[k + 1];
    if (k - 1 > 0 && (k - 1) % 2 == 0) norm += 2.0 * j[k - 1];
    if (std::fabs(j[k - 1]) > 1e250) {
      const double scale = 1e-250;
      for (int i = k - 1; i <= start + 1; ++i) j[i] *= scale;
      norm *= scale;
    }
  }
  norm += j[0];
  for (int n = 0; n <= nmax; ++n) out[n] = j[n] / norm;
}

}  // namespace

void bessel_j_upto(int nmax, double x, double* out) {
  if (nmax < 0) throw std::invalid_argument("bessel_j_upto: order must be >= 0");

  const bool reflect = x < 0.0;
  const double ax = std::fabs(x);

  if (ax == 0.0) {
    out[0] = 1.0;
    for (int n = 1; n <= nmax; ++n) out[n] = 0.0;
    return;
  }

  if (ax <= kAsymptoticCutoff || nmax >= ax) {
    miller_downward(nmax, ax, out);
  } else {
    out[0] = hankel_j(0, ax);
    if (nmax >= 1) out[1] = hankel_j(1, ax);
    for (int n = 1; n < nmax; ++n)
      out[n + 1] = (2.0 * n / ax) * out[n] - out[n - 1];  // stable while n < x
  }

  if (reflect)
    for (int n = 1; n <= nmax; n += 2) out[n] = -out[n];
}

double bessel_j(int n, double x) {
  if (n < 0) throw std::invalid_argument("bessel_j: order must be >= 0");
  std::vector<double> buf(static_cast<size_t>(n) + 1);
  bessel_j_upto(n, x, buf.data());
  return buf[n];
}

double bessel_j_prime(int n, double x) {
  if (n == 0) return -bessel_j(1, x);
  std::vector<double> buf(static_cast<size_t>(n) + 2);
  bessel_j_upto(n + 1, x, buf.data());
  return 0.5 * (buf[n - 1] - buf[n + 1]);
}

}  // namespace ofem
