#pragma once

#include <complex>
#include <span>

namespace earm::detail {

// Real-input DFT of size in.size(); out must hold n/2 + 1 bins. Unnormalised.
void rfft(std::span<const double> in, std::span<std::complex<double>> out);

// Inverse of rfft scaled by 1/n, so irfft(rfft(x)) == x.
void irfft(std::span<const std::complex<double>> in, std::span<double> out);

}  // namespace earm::detail
