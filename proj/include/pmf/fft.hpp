#pragma once

#include <complex>
#include <span>
#include <vector>

namespace pmf::fft {

using Complex = std::complex<double>;

/// In-place unnormalized multidimensional DFT of a row-major tensor.
/// sign = -1 is the forward kernel exp(-2 pi i j s / N), sign = +1 the inverse kernel.
void dft(std::span<Complex> data, std::span<const int> dims, int sign);

/// Forward unnormalized DFT of a real tensor.  Only the non-redundant half of the last
/// axis is returned: dims[0] x ... x (dims[n-1] / 2 + 1) coefficients, row-major.
std::vector<Complex> rdft(std::span<const double> data, std::span<const int> dims);

/// Inverse of rdft without the 1/N factor: the real tensor whose half spectrum is given.
std::vector<double> irdft(std::span<const Complex> half, std::span<const int> dims);

/// Size of the half spectrum produced by rdft.
std::size_t half_size(std::span<const int> dims);

/// In-place unnormalized DST-I, out[k] = sum_i v[i] sin((i+1)(k+1) pi / (N+1)),
/// applied along every axis of a row-major tensor.
void dst1(std::span<double> data, std::span<const int> dims);

}  // namespace pmf::fft
