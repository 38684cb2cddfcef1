#include "pinlab/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pinlab {

bool is_power_of_two(std::size_t m) { return m != 0 && (m & (m - 1)) == 0; }

std::size_t next_power_of_two(std::size_t m) {
    std::size_t p = 1;
    while (p < m) p <<= 1;
    return p;
}

void fft_pow2(std::vector<std::complex<double>>& data, bool inverse) {
    const std::size_t m = data.size();
    if (!is_power_of_two(m)) throw std::invalid_argument("fft_pow2: size must be a power of two");
    if (m <= 1) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < m; ++i) {
        std::size_t bit = m >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= m; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < m; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = data[i + k];
                const std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

}  // namespace pinlab
