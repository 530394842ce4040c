#include "ofem/fft.hpp"

#include <fftw3.h>

#include <stdexcept>

namespace ofem {

namespace {

// std::complex<double> is layout-compatible with fftw_complex.
fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  const int n = static_cast<int>(data.size());
  if (n == 0) return;
  fftw_plan plan =
      fftw_plan_dft_1d(n, as_fftw(data.data()), as_fftw(data.data()),
                       inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  if (!plan) throw std::runtime_error("fft_inplace: planning failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  if (inverse) {
    const double s = 1.0 / n;
    for (auto& v : data) v *= s;
  }
}

void fft2_inplace(std::vector<std::complex<double>>& data, int rows, int cols,
                  bool inverse) {
  if (rows <= 0 || cols <= 0 ||
      data.size() != static_cast<size_t>(rows) * cols)
    throw std::invalid_argument("fft2_inplace: shape does not match data size");
  fftw_plan plan =
      fftw_plan_dft_2d(rows, cols, as_fftw(data.data()), as_fftw(data.data()),
                       inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  if (!plan) throw std::runtime_error("fft2_inplace: planning failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  if (inverse) {
    const double s = 1.0 / (static_cast<double>(rows) * cols);
    for (auto& v : data) v *= s;
  }
}

}  // namespace ofem
