#include "discfill/fft.hpp"

#include <numbers>
#include <stdexcept>

namespace discfill {

FftPlan::FftPlan(std::size_t n) : n_(n) {
    if (n == 0 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("FftPlan: length must be a power of two");
    }
    bitrev_.resize(n);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rev = 0;
        for (std::size_t b = 0; b < log2n; ++b) {
            rev |= ((i >> b) & 1u) << (log2n - 1 - b);
        }
        bitrev_[i] = rev;
    }
    roots_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double phi = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        roots_[k] = {std::cos(phi), std::sin(phi)};
    }
}

void FftPlan::transform(std::complex<double>* a, bool inverse) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = bitrev_[i];
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> w = roots_[k * stride];
                if (inverse) w = std::conj(w);
                const std::complex<double> u = a[start + k];
                const std::complex<double> v = a[start + k + len / 2] * w;
                a[start + k] = u + v;
                a[start + k + len / 2] = u - v;
            }
        }
    }
}

void FftPlan::inverse(std::complex<double>* data) const {
    transform(data, true);
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) data[i] *= inv;
}

}  // namespace discfill
