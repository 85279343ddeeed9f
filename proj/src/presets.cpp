#include "discfill/presets.hpp"

#include <cmath>

namespace discfill::presets {

namespace {

double ramp_up(double x, double lo, double hi) { return smoothstep5((x - lo) / (hi - lo)); }
double ramp_down(double x, double lo, double hi) { return 1.0 - smoothstep5((x - lo) / (hi - lo)); }

// Cutoff profile in (|z|, |w|): 1 on a plateau inside the prescribed
// support {|z| < 1/2, 1/4 < |w| < 3/4}, 0 outside it.
double bump_chi(double az, double aw) {
    return ramp_down(az, 0.30, 0.48) * ramp_up(aw, 0.26, 0.42) * ramp_down(aw, 0.58, 0.74);
}

// Normalization so that max over the support of chi(z,w)·(1 + 0.4 Re z)
// equals one (the asymmetry factor peaks slightly off the plateau edge).
double bump_asym_norm() {
    static const double norm = [] {
        double peak = 0.0;
        for (int i = 0; i <= 4000; ++i) {
            const double az = 0.5 * i / 4000.0;
            peak = std::max(peak, bump_chi(az, 0.5) * (1.0 + 0.4 * az));
        }
        return peak;
    }();
    return norm;
}

}  // namespace

TriangularStructure flat() { return TriangularStructure::standard(); }

TriangularStructure bump(double amplitude) {
    const double norm = bump_asym_norm();
    auto amp = [amplitude, norm](Complex z, Complex w) {
        return amplitude * bump_chi(std::abs(z), std::abs(w)) * (1.0 + 0.4 * z.real()) / norm;
    };
    auto a = [amp](Complex z, Complex w) { return 0.6 * amp(z, w) * std::polar(1.0, 0.3); };
    auto b = [amp](Complex z, Complex w) { return 0.8 * amp(z, w) * std::polar(1.0, -0.7); };
    return TriangularStructure(a, b, 0.6 * amplitude + 1e-12);
}

TriangularStructure bump_rotation_symmetric(double amplitude) {
    auto a = [amplitude](Complex z, Complex w) {
        return 0.6 * amplitude * bump_chi(std::abs(z), std::abs(w)) * std::polar(1.0, 0.3);
    };
    auto b = [amplitude](Complex z, Complex w) {
        const double aw = std::abs(w);
        const double chi = bump_chi(std::abs(z), aw);
        if (chi == 0.0) return Complex{0.0, 0.0};
        return 0.8 * amplitude * chi * std::polar(1.0, -0.7) * (w / aw);
    };
    return TriangularStructure(a, b, 0.6 * amplitude + 1e-12);
}

TriangularStructure bump_weighted(double a_amplitude, double b_amplitude) {
    const double norm = std::hypot(a_amplitude, b_amplitude);
    if (!(norm < 1.0)) throw TamingError("bump_weighted: sqrt(a² + b²) must stay below 1");
    auto a = [a_amplitude](Complex z, Complex w) {
        return a_amplitude * bump_chi(std::abs(z), std::abs(w)) * std::polar(1.0, 0.3);
    };
    auto b = [b_amplitude](Complex z, Complex w) {
        return b_amplitude * bump_chi(std::abs(z), std::abs(w)) * std::polar(1.0, -0.7);
    };
    return TriangularStructure(a, b, a_amplitude + 1e-12);
}

Box4 bump_support_box() { return {{-0.5, -0.5, -0.75, -0.75}, {0.5, 0.5, 0.75, 0.75}}; }

HartogsModel hartogs(double dip, double delta) {
    return HartogsModel(
        [dip](Complex z) { return 1.0 - dip * smoothstep5((std::abs(z) - 0.2) / 0.6); }, delta);
}

}  // namespace discfill::presets
