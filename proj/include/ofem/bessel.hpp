#ifndef OFEM_BESSEL_HPP
#define OFEM_BESSEL_HPP

namespace ofem {

/// Bessel function of the first kind J_n(x), integer order n >= 0.
/// Good to better than 1e-12 absolute for |x| < 1e3.
double bessel_j(int n, double x);

/// Fill out[0..nmax] with J_0(x) .. J_nmax(x) in one pass.  Cheaper than
/// nmax+1 separate calls when several adjacent orders are needed, which is
/// the common case for the vortex integrands.
void bessel_j_upto(int nmax, double x, double* out);

/// dJ_n/dx via the two-sided recurrence; J_0' = -J_1.
double bessel_j_prime(int n, double x);

}  // namespace ofem

#endif
