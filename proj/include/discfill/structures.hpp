#pragma once

#include <array>
#include <functional>
#include <optional>
#include <random>
#include <span>

#include "discfill/grid.hpp"

namespace discfill {

/// Point of ℂ², coordinates Z = (z, w).
struct Point2c {
    Complex z;
    Complex w;
};

/// Real coordinates (x1, y1, x2, y2) of the same point.
using Vec4 = std::array<double, 4>;

inline Vec4 to_vec4(const Point2c& p) { return {p.z.real(), p.z.imag(), p.w.real(), p.w.imag()}; }
inline Point2c to_point(const Vec4& v) { return {{v[0], v[1]}, {v[2], v[3]}}; }

struct Mat4 {
    double m[4][4] = {};

    static Mat4 identity();
    static Mat4 standard_complex();  // J_st: multiplication by i
    static Mat4 conjugation();       // V ↦ V̄

    Vec4 apply(const Vec4& v) const;
    Mat4 multiply(const Mat4& o) const;
    Mat4 inverse() const;  // throws SingularMatrixError
    double det() const;
    double max_abs_diff(const Mat4& o) const;
};

struct Mat2c {
    Complex a11{0.0, 0.0}, a12{0.0, 0.0}, a21{0.0, 0.0}, a22{0.0, 0.0};

    std::array<Complex, 2> apply(const std::array<Complex, 2>& v) const;
    Complex det() const { return a11 * a22 - a12 * a21; }
    double frobenius_sq() const;
    /// Largest singular value (the Euclidean operator norm).
    double operator_norm() const;
    /// Unit right singular vector attaining operator_norm().
    std::array<Complex, 2> top_singular_vector() const;
    /// Real 4×4 embedding of V ↦ A V.
    Mat4 real_embedding() const;
};

struct StructureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularMatrixError : StructureError {
    using StructureError::StructureError;
};
/// det(J_st + J) = 0: the matrix correspondence is not defined there.
struct CorrespondenceDomainError : StructureError {
    using StructureError::StructureError;
};
/// det(I − A·conj(A)) = 0: the associated first-order system degenerates.
struct DegenerateStructureError : StructureError {
    using StructureError::StructureError;
};
struct TamingError : StructureError {
    using StructureError::StructureError;
};

/// Axis-aligned box in ℝ⁴ ≅ ℂ².
struct Box4 {
    Vec4 lo;
    Vec4 hi;
    bool contains(const Point2c& p) const;
    Point2c sample(std::mt19937_64& rng) const;
    static Box4 cube(double half_side);
};

/// Standard symplectic pairing ω_st = dx1∧dy1 + dx2∧dy2.
double omega_st(const Vec4& v, const Vec4& w);

/// Pointwise correspondence between J (real 4×4, J² = −I) and its complex
/// matrix A: A V = (J_st + J)^{-1}(J_st − J) V̄.
Mat2c matrix_of_structure_at(const Mat4& J);

/// Inverse correspondence, J = J_st (C − α)(C + α)^{-1} with α the real
/// embedding of A and C conjugation.
Mat4 structure_of_matrix_at(const Mat2c& A);

/// Almost complex structure on ℂ² stored through its complex matrix field.
/// Immutable and evaluation-only after construction.
class AlmostComplexStructure {
public:
    using MatrixField = std::function<Mat2c(const Point2c&)>;

    explicit AlmostComplexStructure(MatrixField field, std::optional<Box4> support_hint = std::nullopt);

    static AlmostComplexStructure standard();

    Mat2c matrix(const Point2c& p) const { return field_(p); }
    /// J materialized on demand from the matrix field.
    Mat4 structure_at(const Point2c& p) const { return structure_of_matrix_at(field_(p)); }

    const std::optional<Box4>& support_hint() const { return support_hint_; }

private:
    MatrixField field_;
    std::optional<Box4> support_hint_;
};

/// Field-level correspondence wrappers.
AlmostComplexStructure matrix_of_structure(const std::function<Mat4(const Point2c&)>& J_field,
                                           std::optional<Box4> support_hint = std::nullopt);
std::function<Mat4(const Point2c&)> structure_of_matrix(const AlmostComplexStructure& A);

struct TamingReport {
    bool tamed = false;
    double max_norm = 0.0;
    double margin = 0.0;  // 1 − max sampled ‖A‖
    Point2c worst_point{{0.0, 0.0}, {0.0, 0.0}};
};

TamingReport is_tamed(const AlmostComplexStructure& A, std::span<const Point2c> samples);
TamingReport is_tamed(const AlmostComplexStructure& A, const Box4& box, int sample_count, std::mt19937_64& rng);

/// A tangent vector certifying failure of taming at a point where
/// ‖A‖ ≥ 1: returns V with ω_st(V, JV) ≤ 0 (built from the top singular
/// vector U as V = conj(U) + A U).
Vec4 taming_witness(const Mat2c& A);

struct LeviOptions {
    double step = 1e-4;        // outer directional step
    double gradient_step = 1e-6;  // inner step for dρ
};

struct LeviResult {
    double value = 0.0;
    bool conditioning_warning = false;
};

/// Levi form L(ρ)(p)(V) = −d(dρ∘J)(V, JV)(p) by nested central differences
/// with the vectors V and JV frozen at p.
LeviResult levi_form(const std::function<double(const Point2c&)>& rho, const Point2c& p, const Vec4& V,
                     const std::function<Mat4(const Point2c&)>& J_field, const LeviOptions& opts = {});

/// Diffeomorphism of ℂ² presented through evaluation callbacks.
struct Diffeomorphism {
    std::function<Point2c(const Point2c&)> forward;
    std::function<Point2c(const Point2c&)> inverse;
    std::function<Mat4(const Point2c&)> differential;  // dφ at a point
    static Diffeomorphism identity();
};

/// φ_* J: matrix field of dφ ∘ J ∘ dφ^{-1} read at φ-images.
AlmostComplexStructure pushforward(const Diffeomorphism& phi, const AlmostComplexStructure& J);

/// Sublevel region {gauge < level} of a scalar gauge on ℂ².
struct Region {
    std::function<double(const Point2c&)> gauge;
    double level = 0.0;
    bool contains(const Point2c& p) const { return gauge(p) < level; }
    static Region ball(const Point2c& center, double radius);
};

/// Order-5 polynomial smoothstep, C², 0 below 0 and 1 above 1.
double smoothstep5(double x);

/// χ·A with a smooth cutoff χ equal to 1 on {gauge ≤ inner_level} and 0 on
/// {gauge ≥ outer_level}; pointwise norm never exceeds the input norm.
AlmostComplexStructure blend_cutoff(const AlmostComplexStructure& a_inner,
                                    const std::function<double(const Point2c&)>& gauge, double inner_level,
                                    double outer_level);

/// Region-pair convenience (the regions must be nested sublevel sets of the
/// same gauge; the outer region's gauge is used).
AlmostComplexStructure blend_cutoff(const AlmostComplexStructure& a_inner, const Region& inner, const Region& outer);

/// Triangular structure [[a, 0], [b, 0]] with |a| ≤ a_bound < 1: the class
/// whose graphs solve the scalar equation w_z̄ + a(z,w) w_z = b(z,w).
class TriangularStructure {
public:
    using Coefficient = std::function<Complex(Complex z, Complex w)>;

    TriangularStructure(Coefficient a, Coefficient b, double a_bound);

    Complex a(Complex z, Complex w) const { return a_(z, w); }
    Complex b(Complex z, Complex w) const { return b_(z, w); }
    double a_bound() const { return a_bound_; }

    static TriangularStructure standard();

    AlmostComplexStructure as_structure() const;

private:
    Coefficient a_;
    Coefficient b_;
    double a_bound_;
};

struct GraphCoefficients {
    TriangularStructure::Coefficient a;
    TriangularStructure::Coefficient b;
    double a_bound = 0.0;
};

/// Coefficient fields of the graph equation w_z̄ + a w_z = b for the given
/// triangular structure.
GraphCoefficients graph_equation_coefficients(const TriangularStructure& T);

/// Extract the triangular reduction of a general structure over a region,
/// verifying that the second matrix column vanishes there (within tol).
TriangularStructure triangular_reduction(const AlmostComplexStructure& A, std::span<const Point2c> samples,
                                         double tol = 1e-9);

/// Product Hartogs model H(z, w) = (z, r(z)·w) with a smooth radius profile
/// 0 < r ≤ 1 bounded away from zero.
class HartogsModel {
public:
    HartogsModel(std::function<double(Complex)> radius_profile, double delta);

    Point2c map(Complex z, Complex w) const;
    double radius(Complex z) const { return radius_profile_(z); }
    double delta() const { return delta_; }
    double min_radius() const { return min_radius_; }

    /// Pullback of J_st through the model: graphs v(z) with (z, r(z) v(z))
    /// holomorphic solve v_z̄ = −(r_z̄/r)·v, i.e. a = 0, b = −(r_z̄/r)·w.
    TriangularStructure pullback_standard() const;

private:
    std::function<double(Complex)> radius_profile_;
    double delta_;
    double min_radius_;
};

}  // namespace discfill
