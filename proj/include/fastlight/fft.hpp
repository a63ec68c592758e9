#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Thin FFTW wrapper. Plans are built once per (kind, size) with FFTW_ESTIMATE
// and FFTW_UNALIGNED, so results depend only on the input values and are
// reproducible across runs and threads.
namespace fastlight::fft {

using cplx = std::complex<double>;

// Real-to-half-complex forward transform, X[k] = sum_n x[n] exp(-2 pi i k n / N),
// k = 0 .. N/2.
std::vector<cplx> forward_real(std::span<const double> x);

// Inverse of forward_real including the 1/N factor. `spectrum` holds N/2 + 1 bins;
// imaginary parts of the DC and Nyquist bins are ignored.
std::vector<double> inverse_real(std::span<const cplx> spectrum, std::size_t n);

// Full complex transforms; inverse includes 1/N.
std::vector<cplx> forward(std::span<const cplx> x);
std::vector<cplx> inverse(std::span<const cplx> x);

// Frequencies (Hz) of the N/2 + 1 bins returned by forward_real.
std::vector<double> real_frequencies(std::size_t n, double sample_rate);

const char* backend_version();

} // namespace fastlight::fft
