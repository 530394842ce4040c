#ifndef OFEM_FFT_HPP
#define OFEM_FFT_HPP

#include <complex>
#include <vector>

namespace ofem {

// Thin wrappers over the system FFT backend.  Forward transforms use the
// negative exponent (analysis convention); the inverse carries the 1/N
// factor so inverse(forward(x)) == x.  Single-threaded plans keep results
// bit-reproducible across runs.

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

// 2D transform of row-major data with `rows` x `cols` layout.
void fft2_inplace(std::vector<std::complex<double>>& data, int rows, int cols,
                  bool inverse);

// Signed frequency index of bin i in an n-point transform: values in
// [-n/2, n/2).  Physical frequency is this times 2*pi/(n*dx).
inline int fft_freq_index(int i, int n) { return (i < (n + 1) / 2) ? i : i - n; }

}  // namespace ofem

#endif
