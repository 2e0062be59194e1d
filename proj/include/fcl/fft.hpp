#pragma once

// Minimal FFT utilities: iterative radix-2 transform and Bluestein's
// chirp-z reduction for arbitrary lengths.

#include <complex>
#include <vector>
#include <cmath>

namespace fcl {

inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * 3.14159265358979323846 / static_cast<double>(len) *
                     (inverse ? -1.0 : 1.0);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (size_t k = 0; k < len / 2; ++k) {
                auto u = a[i + k], t = a[i + k + len / 2] * w;
                a[i + k] = u + t;
                a[i + k + len / 2] = u - t;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& z : a) z /= static_cast<double>(n);
}

// Forward DFT X_k = sum_n x_n exp(+i 2 pi n k / N) for arbitrary N.
inline std::vector<std::complex<double>> dft_bluestein(
    const std::vector<std::complex<double>>& x) {
    const size_t n = x.size();
    if (n == 0) return {};
    size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;
    // Chirp b_k = exp(i pi k^2 / n); k^2 taken mod 2n to keep the phase exact.
    std::vector<std::complex<double>> b(n);
    for (size_t k = 0; k < n; ++k) {
        size_t k2 = (k * k) % (2 * n);
        b[k] = std::polar(1.0, 3.14159265358979323846 * static_cast<double>(k2) /
                                   static_cast<double>(n));
    }
    std::vector<std::complex<double>> u(m, 0.0), v(m, 0.0);
    for (size_t k = 0; k < n; ++k) u[k] = x[k] * b[k];
    v[0] = std::conj(b[0]);
    for (size_t k = 1; k < n; ++k) v[k] = v[m - k] = std::conj(b[k]);
    fft_pow2(u, false);
    fft_pow2(v, false);
    for (size_t k = 0; k < m; ++k) u[k] *= v[k];
    fft_pow2(u, true);
    std::vector<std::complex<double>> out(n);
    for (size_t k = 0; k < n; ++k) out[k] = u[k] * b[k];
    return out;
}

// Inverse DFT x_k = (1/N) sum_m X_m exp(-i 2 pi m k / N) for arbitrary N.
inline std::vector<std::complex<double>> idft_bluestein(
    const std::vector<std::complex<double>>& x) {
    std::vector<std::complex<double>> c(x);
    for (auto& z : c) z = std::conj(z);
    auto y = dft_bluestein(c);
    for (auto& z : y) z = std::conj(z) / static_cast<double>(x.size());
    return y;
}

} // namespace fcl
