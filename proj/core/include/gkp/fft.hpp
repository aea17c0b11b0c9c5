#pragma once

#include <complex>
#include <span>

namespace gkp::fft {

// Unnormalised DFTs backed by FFTW. Plans are cached per length and shared
// between threads; execution writes only to the caller's buffers.
//   forward: out[k] = sum_j in[j] exp(-2 pi i jk / n)
//   inverse: out[j] = sum_k in[k] exp(+2 pi i jk / n)
// in and out may alias.
void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

}  // namespace gkp::fft
