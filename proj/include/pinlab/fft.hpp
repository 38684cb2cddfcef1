#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace pinlab {

// In-place iterative radix-2 FFT. Size must be a power of two (the circulant
// embedding always pads to one). Forward transform is
// X_j = sum_k x_k exp(-2*pi*i*j*k/M); the inverse omits the 1/M factor.
void fft_pow2(std::vector<std::complex<double>>& data, bool inverse);

bool is_power_of_two(std::size_t m);
std::size_t next_power_of_two(std::size_t m);

}  // namespace pinlab
