#include "discfill/structures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace discfill {

namespace {

Mat4 sub(const Mat4& a, const Mat4& b) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
    return r;
}

Mat4 add(const Mat4& a, const Mat4& b) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
    return r;
}

}  // namespace

Mat4 Mat4::identity() {
    Mat4 r;
    for (int i = 0; i < 4; ++i) r.m[i][i] = 1.0;
    return r;
}

Mat4 Mat4::standard_complex() {
    Mat4 r;
    r.m[0][1] = -1.0;
    r.m[1][0] = 1.0;
    r.m[2][3] = -1.0;
    r.m[3][2] = 1.0;
    return r;
}

Mat4 Mat4::conjugation() {
    Mat4 r;
    r.m[0][0] = 1.0;
    r.m[1][1] = -1.0;
    r.m[2][2] = 1.0;
    r.m[3][3] = -1.0;
    return r;
}

Vec4 Mat4::apply(const Vec4& v) const {
    Vec4 r{};
    for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += m[i][j] * v[static_cast<std::size_t>(j)];
        r[static_cast<std::size_t>(i)] = s;
    }
    return r;
}

Mat4 Mat4::multiply(const Mat4& o) const {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += m[i][k] * o.m[k][j];
            r.m[i][j] = s;
        }
    return r;
}

double Mat4::det() const {
    double a[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a[i][j] = m[i][j];
    double d = 1.0;
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int r = c + 1; r < 4; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0) return 0.0;
        if (piv != c) {
            for (int j = 0; j < 4; ++j) std::swap(a[c][j], a[piv][j]);
            d = -d;
        }
        d *= a[c][c];
        for (int r = c + 1; r < 4; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int j = c; j < 4; ++j) a[r][j] -= f * a[c][j];
        }
    }
    return d;
}

Mat4 Mat4::inverse() const {
    double a[4][8];
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) a[i][j] = m[i][j];
        for (int j = 4; j < 8; ++j) a[i][j] = (j - 4 == i) ? 1.0 : 0.0;
    }
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int r = c + 1; r < 4; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-14) throw SingularMatrixError("Mat4::inverse: singular matrix");
        if (piv != c)
            for (int j = 0; j < 8; ++j) std::swap(a[c][j], a[piv][j]);
        const double d = a[c][c];
        for (int j = 0; j < 8; ++j) a[c][j] /= d;
        for (int r = 0; r < 4; ++r) {
            if (r == c) continue;
            const double f = a[r][c];
            if (f == 0.0) continue;
            for (int j = 0; j < 8; ++j) a[r][j] -= f * a[c][j];
        }
    }
    Mat4 inv;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) inv.m[i][j] = a[i][j + 4];
    return inv;
}

double Mat4::max_abs_diff(const Mat4& o) const {
    double e = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) e = std::max(e, std::abs(m[i][j] - o.m[i][j]));
    return e;
}

std::array<Complex, 2> Mat2c::apply(const std::array<Complex, 2>& v) const {
    return {a11 * v[0] + a12 * v[1], a21 * v[0] + a22 * v[1]};
}

double Mat2c::frobenius_sq() const { return std::norm(a11) + std::norm(a12) + std::norm(a21) + std::norm(a22); }

double Mat2c::operator_norm() const {
    const double t = frobenius_sq();
    const double d = std::norm(det());
    const double disc = std::max(0.0, t * t - 4.0 * d);
    return std::sqrt(0.5 * (t + std::sqrt(disc)));
}

std::array<Complex, 2> Mat2c::top_singular_vector() const {
    // Eigenvector of the Hermitian matrix A*A for its largest eigenvalue.
    const Complex h11 = std::conj(a11) * a11 + std::conj(a21) * a21;
    const Complex h12 = std::conj(a11) * a12 + std::conj(a21) * a22;
    const Complex h22 = std::conj(a12) * a12 + std::conj(a22) * a22;
    const double lam = operator_norm() * operator_norm();
    // (H − λ) u = 0; pick the larger of the two candidate null vectors.
    std::array<Complex, 2> u1 = {-h12, h11 - lam};
    std::array<Complex, 2> u2 = {h22 - lam, -std::conj(h12)};
    const double n1 = std::sqrt(std::norm(u1[0]) + std::norm(u1[1]));
    const double n2 = std::sqrt(std::norm(u2[0]) + std::norm(u2[1]));
    std::array<Complex, 2> u = (n1 >= n2) ? u1 : u2;
    double n = std::max(n1, n2);
    if (n < 1e-14) {
        u = {Complex{1.0, 0.0}, Complex{0.0, 0.0}};  // A*A is a multiple of I
        n = 1.0;
    }
    return {u[0] / n, u[1] / n};
}

Mat4 Mat2c::real_embedding() const {
    Mat4 r;
    auto put = [&](int bi, int bj, Complex v) {
        r.m[2 * bi][2 * bj] = v.real();
        r.m[2 * bi][2 * bj + 1] = -v.imag();
        r.m[2 * bi + 1][2 * bj] = v.imag();
        r.m[2 * bi + 1][2 * bj + 1] = v.real();
    };
    put(0, 0, a11);
    put(0, 1, a12);
    put(1, 0, a21);
    put(1, 1, a22);
    return r;
}

bool Box4::contains(const Point2c& p) const {
    const Vec4 v = to_vec4(p);
    for (int i = 0; i < 4; ++i) {
        if (v[static_cast<std::size_t>(i)] < lo[static_cast<std::size_t>(i)] ||
            v[static_cast<std::size_t>(i)] > hi[static_cast<std::size_t>(i)])
            return false;
    }
    return true;
}

Point2c Box4::sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec4 v{};
    for (int i = 0; i < 4; ++i) {
        const auto s = static_cast<std::size_t>(i);
        v[s] = lo[s] + (hi[s] - lo[s]) * u(rng);
    }
    return to_point(v);
}

Box4 Box4::cube(double half_side) {
    return {{-half_side, -half_side, -half_side, -half_side}, {half_side, half_side, half_side, half_side}};
}

double omega_st(const Vec4& v, const Vec4& w) {
    return v[0] * w[1] - v[1] * w[0] + v[2] * w[3] - v[3] * w[2];
}

Mat2c matrix_of_structure_at(const Mat4& J) {
    const Mat4 jst = Mat4::standard_complex();
    const Mat4 sum = add(jst, J);
    if (std::abs(sum.det()) < 1e-12) {
        throw CorrespondenceDomainError("matrix_of_structure: det(J_st + J) = 0");
    }
    const Mat4 n = sum.inverse().multiply(sub(jst, J)).multiply(Mat4::conjugation());
    // N must be complex-linear; extract its complex entries.
    const Mat4 jst_n = jst.multiply(n);
    const Mat4 n_jst = n.multiply(jst);
    if (jst_n.max_abs_diff(n_jst) > 1e-8) {
        throw StructureError("matrix_of_structure: input is not an almost complex structure (A not C-linear)");
    }
    Mat2c a;
    a.a11 = {n.m[0][0], n.m[1][0]};
    a.a21 = {n.m[2][0], n.m[3][0]};
    a.a12 = {n.m[0][2], n.m[1][2]};
    a.a22 = {n.m[2][2], n.m[3][2]};
    return a;
}

Mat4 structure_of_matrix_at(const Mat2c& A) {
    // Ellipticity of the associated system: det(I − A·conj(A)) ≠ 0.
    const Mat2c conj_a{std::conj(A.a11), std::conj(A.a12), std::conj(A.a21), std::conj(A.a22)};
    const Complex p11 = A.a11 * conj_a.a11 + A.a12 * conj_a.a21;
    const Complex p12 = A.a11 * conj_a.a12 + A.a12 * conj_a.a22;
    const Complex p21 = A.a21 * conj_a.a11 + A.a22 * conj_a.a21;
    const Complex p22 = A.a21 * conj_a.a12 + A.a22 * conj_a.a22;
    const Complex det_elliptic = (Complex{1.0, 0.0} - p11) * (Complex{1.0, 0.0} - p22) - p12 * p21;
    if (std::abs(det_elliptic) < 1e-12) {
        throw DegenerateStructureError("structure_of_matrix: det(I − A·conj(A)) = 0");
    }
    const Mat4 c = Mat4::conjugation();
    const Mat4 alpha = A.real_embedding();
    Mat4 denom = add(c, alpha);
    if (std::abs(denom.det()) < 1e-12) {
        throw DegenerateStructureError("structure_of_matrix: C + A singular");
    }
    return Mat4::standard_complex().multiply(sub(c, alpha)).multiply(denom.inverse());
}

AlmostComplexStructure::AlmostComplexStructure(MatrixField field, std::optional<Box4> support_hint)
    : field_(std::move(field)), support_hint_(support_hint) {}

AlmostComplexStructure AlmostComplexStructure::standard() {
    return AlmostComplexStructure([](const Point2c&) { return Mat2c{}; },
                                  Box4{{0, 0, 0, 0}, {0, 0, 0, 0}});
}

AlmostComplexStructure matrix_of_structure(const std::function<Mat4(const Point2c&)>& J_field,
                                           std::optional<Box4> support_hint) {
    return AlmostComplexStructure([J_field](const Point2c& p) { return matrix_of_structure_at(J_field(p)); },
                                  support_hint);
}

std::function<Mat4(const Point2c&)> structure_of_matrix(const AlmostComplexStructure& A) {
    return [&A](const Point2c& p) { return structure_of_matrix_at(A.matrix(p)); };
}

TamingReport is_tamed(const AlmostComplexStructure& A, std::span<const Point2c> samples) {
    TamingReport rep;
    rep.max_norm = 0.0;
    for (const Point2c& p : samples) {
        const double n = A.matrix(p).operator_norm();
        if (n > rep.max_norm) {
            rep.max_norm = n;
            rep.worst_point = p;
        }
    }
    rep.tamed = rep.max_norm < 1.0;
    rep.margin = 1.0 - rep.max_norm;
    return rep;
}

TamingReport is_tamed(const AlmostComplexStructure& A, const Box4& box, int sample_count, std::mt19937_64& rng) {
    std::vector<Point2c> pts(static_cast<std::size_t>(sample_count));
    for (auto& p : pts) p = box.sample(rng);
    return is_tamed(A, pts);
}

Vec4 taming_witness(const Mat2c& A) {
    const auto u = A.top_singular_vector();
    const auto au = A.apply(u);
    // V = conj(U) + A U gives ω_st(V, JV) = |U|² − |AU|².
    const Complex vz = std::conj(u[0]) + au[0];
    const Complex vw = std::conj(u[1]) + au[1];
    return {vz.real(), vz.imag(), vw.real(), vw.imag()};
}

LeviResult levi_form(const std::function<double(const Point2c&)>& rho, const Point2c& p, const Vec4& V,
                     const std::function<Mat4(const Point2c&)>& J_field, const LeviOptions& opts) {
    const Vec4 JV = J_field(p).apply(V);

    const double hg = opts.gradient_step;
    auto beta = [&](const Point2c& q, const Vec4& X) {
        // dρ_q(J(q) X) by central differences in each coordinate.
        const Vec4 jx = J_field(q).apply(X);
        const Vec4 q4 = to_vec4(q);
        double s = 0.0;
        for (int i = 0; i < 4; ++i) {
            Vec4 plus = q4, minus = q4;
            plus[static_cast<std::size_t>(i)] += hg;
            minus[static_cast<std::size_t>(i)] -= hg;
            s += (rho(to_point(plus)) - rho(to_point(minus))) / (2.0 * hg) * jx[static_cast<std::size_t>(i)];
        }
        return s;
    };

    const double h = opts.step;
    auto shift = [&](const Vec4& dir, double amount) {
        Vec4 q = to_vec4(p);
        for (int i = 0; i < 4; ++i) q[static_cast<std::size_t>(i)] += amount * dir[static_cast<std::size_t>(i)];
        return to_point(q);
    };

    const double bv_p = beta(shift(V, h), JV);
    const double bv_m = beta(shift(V, -h), JV);
    const double bw_p = beta(shift(JV, h), V);
    const double bw_m = beta(shift(JV, -h), V);

    const double d_beta = (bv_p - bv_m) / (2.0 * h) - (bw_p - bw_m) / (2.0 * h);

    LeviResult out;
    out.value = -d_beta;
    const double scale = std::max({std::abs(bv_p), std::abs(bv_m), std::abs(bw_p), std::abs(bw_m), 1e-30});
    out.conditioning_warning = std::abs(out.value) < scale / h * 1e-11;
    return out;
}

Diffeomorphism Diffeomorphism::identity() {
    Diffeomorphism d;
    d.forward = [](const Point2c& p) { return p; };
    d.inverse = [](const Point2c& p) { return p; };
    d.differential = [](const Point2c&) { return Mat4::identity(); };
    return d;
}

AlmostComplexStructure pushforward(const Diffeomorphism& phi, const AlmostComplexStructure& J) {
    auto fwd = phi;
    return AlmostComplexStructure([fwd, J](const Point2c& q) {
        const Point2c p = fwd.inverse(q);
        const Mat4 d = fwd.differential(p);
        const Mat4 j_new = d.multiply(J.structure_at(p)).multiply(d.inverse());
        return matrix_of_structure_at(j_new);
    });
}

Region Region::ball(const Point2c& center, double radius) {
    return Region{[center](const Point2c& p) {
                      const Complex dz = p.z - center.z;
                      const Complex dw = p.w - center.w;
                      return std::sqrt(std::norm(dz) + std::norm(dw));
                  },
                  radius};
}

double smoothstep5(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

AlmostComplexStructure blend_cutoff(const AlmostComplexStructure& a_inner,
                                    const std::function<double(const Point2c&)>& gauge, double inner_level,
                                    double outer_level) {
    if (!(inner_level < outer_level)) throw StructureError("blend_cutoff: inner level must be below outer level");
    auto field = [a_inner, gauge, inner_level, outer_level](const Point2c& p) {
        const double t = (gauge(p) - inner_level) / (outer_level - inner_level);
        const double chi = 1.0 - smoothstep5(t);
        Mat2c a = a_inner.matrix(p);
        a.a11 *= chi;
        a.a12 *= chi;
        a.a21 *= chi;
        a.a22 *= chi;
        return a;
    };
    return AlmostComplexStructure(field, a_inner.support_hint());
}

AlmostComplexStructure blend_cutoff(const AlmostComplexStructure& a_inner, const Region& inner, const Region& outer) {
    return blend_cutoff(a_inner, outer.gauge, inner.level, outer.level);
}

TriangularStructure::TriangularStructure(Coefficient a, Coefficient b, double a_bound)
    : a_(std::move(a)), b_(std::move(b)), a_bound_(a_bound) {
    if (!(a_bound_ < 1.0) || a_bound_ < 0.0) {
        throw TamingError("TriangularStructure: require 0 ≤ a_bound < 1");
    }
}

TriangularStructure TriangularStructure::standard() {
    return TriangularStructure([](Complex, Complex) { return Complex{0.0, 0.0}; },
                               [](Complex, Complex) { return Complex{0.0, 0.0}; }, 0.0);
}

AlmostComplexStructure TriangularStructure::as_structure() const {
    auto a = a_;
    auto b = b_;
    return AlmostComplexStructure([a, b](const Point2c& p) {
        Mat2c m;
        m.a11 = a(p.z, p.w);
        m.a21 = b(p.z, p.w);
        return m;
    });
}

GraphCoefficients graph_equation_coefficients(const TriangularStructure& T) {
    GraphCoefficients g;
    g.a = [T](Complex z, Complex w) { return T.a(z, w); };
    g.b = [T](Complex z, Complex w) { return T.b(z, w); };
    g.a_bound = T.a_bound();
    return g;
}

TriangularStructure triangular_reduction(const AlmostComplexStructure& A, std::span<const Point2c> samples,
                                         double tol) {
    double a_max = 0.0;
    for (const Point2c& p : samples) {
        const Mat2c m = A.matrix(p);
        if (std::abs(m.a12) > tol || std::abs(m.a22) > tol) {
            throw StructureError("triangular_reduction: structure is not triangular over the sampled region");
        }
        a_max = std::max(a_max, std::abs(m.a11));
    }
    if (!(a_max < 1.0)) throw TamingError("triangular_reduction: |a| reaches 1 on the sampled region");
    auto field = A;
    return TriangularStructure([field](Complex z, Complex w) { return field.matrix({z, w}).a11; },
                               [field](Complex z, Complex w) { return field.matrix({z, w}).a21; },
                               std::min(1.0 - 1e-12, a_max + 1e-12));
}

HartogsModel::HartogsModel(std::function<double(Complex)> radius_profile, double delta)
    : radius_profile_(std::move(radius_profile)), delta_(delta) {
    if (!(delta_ > 0.0 && delta_ < 1.0)) throw StructureError("HartogsModel: delta must lie in (0,1)");
    min_radius_ = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= 24; ++j) {
        for (int k = 0; k < 32; ++k) {
            const double r = j / 24.0;
            const double t = 2.0 * std::numbers::pi * k / 32.0;
            const double v = radius_profile_(std::polar(r, t));
            if (!(v > 0.0) || v > 1.0 + 1e-12) {
                throw StructureError("HartogsModel: radius profile must satisfy 0 < r(z) ≤ 1");
            }
            min_radius_ = std::min(min_radius_, v);
        }
    }
}

Point2c HartogsModel::map(Complex z, Complex w) const { return {z, radius_profile_(z) * w}; }

TriangularStructure HartogsModel::pullback_standard() const {
    auto profile = radius_profile_;
    auto b = [profile](Complex z, Complex w) {
        const double h = 1e-6;
        const double rx = (profile(z + h) - profile(z - h)) / (2.0 * h);
        const double ry = (profile(z + Complex{0.0, h}) - profile(z - Complex{0.0, h})) / (2.0 * h);
        const Complex r_zbar = 0.5 * Complex{rx, ry};
        return -r_zbar / profile(z) * w;
    };
    return TriangularStructure([](Complex, Complex) { return Complex{0.0, 0.0}; }, b, 0.0);
}

}  // namespace discfill
