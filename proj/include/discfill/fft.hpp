#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace discfill {

/// Radix-2 complex FFT for a fixed power-of-two length.
///
/// Plans are immutable after construction and safe to share between
/// threads; transforms run in place on caller-owned buffers.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);

    std::size_t size() const { return n_; }

    /// In-place forward transform, X_k = sum_j x_j e^{-2πi jk/n}. No scaling.
    void forward(std::complex<double>* data) const { transform(data, false); }

    /// In-place inverse transform including the 1/n factor.
    void inverse(std::complex<double>* data) const;

    /// Signed mode number carried by coefficient index k (Nyquist maps to -n/2).
    int mode(std::size_t k) const {
        return k < n_ / 2 ? static_cast<int>(k) : static_cast<int>(k) - static_cast<int>(n_);
    }

private:
    void transform(std::complex<double>* data, bool inverse) const;

    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<std::complex<double>> roots_;  // e^{-2πi k/n}, k < n/2
};

}  // namespace discfill
