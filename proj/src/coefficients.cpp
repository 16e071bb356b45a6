#include "femlab/coefficients.hpp"

#include <algorithm>
#include <cmath>

namespace femlab {

Vec2 sym_eigenvalues(const Mat2& A) {
    const double tr = A(0, 0) + A(1, 1);
    const double diff = A(0, 0) - A(1, 1);
    const double disc = std::sqrt(diff * diff + 4.0 * A(0, 1) * A(1, 0));
    return Vec2(0.5 * (tr - disc), 0.5 * (tr + disc));
}

Mat2 spd_inverse_sqrt(const Mat2& A) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(A);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw Error("spd_inverse_sqrt: matrix is not positive definite");
    return es.operatorInverseSqrt();
}

std::string to_string(Formulation f) {
    switch (f) {
        case Formulation::Conservative: return "conservative";
        case Formulation::Divergence: return "divergence";
        case Formulation::General: return "general";
    }
    return "?";
}

CoefficientSet CoefficientSet::conservative(MatrixField A, VectorField b, ScalarField gamma) {
    CoefficientSet c;
    c.A = std::move(A);
    c.b = std::move(b);
    c.gamma = std::move(gamma);
    c.formulation = Formulation::Conservative;
    return c;
}

CoefficientSet CoefficientSet::divergence(MatrixField A, VectorField b, ScalarField gamma) {
    CoefficientSet c = conservative(std::move(A), std::move(b), std::move(gamma));
    c.formulation = Formulation::Divergence;
    return c;
}

CoefficientSet CoefficientSet::general(MatrixField A, VectorField b1, VectorField b2,
                                       ScalarField gamma) {
    CoefficientSet c;
    c.A = std::move(A);
    c.gamma = std::move(gamma);
    c.formulation = Formulation::General;
    c.b1_explicit = std::move(b1);
    c.b2_explicit = std::move(b2);
    return c;
}

Vec2 CoefficientSet::b1(int element, const Vec2& x) const {
    switch (formulation) {
        case Formulation::Conservative: return A_inv(element, x) * b(element, x);
        case Formulation::Divergence: return Vec2::Zero();
        case Formulation::General: return b1_explicit(element, x);
    }
    return Vec2::Zero();
}

Vec2 CoefficientSet::b2(int element, const Vec2& x) const {
    switch (formulation) {
        case Formulation::Conservative: return Vec2::Zero();
        // b . A^-1 equals A^-1 b as a vector field for symmetric A
        case Formulation::Divergence: return A_inv(element, x) * b(element, x);
        case Formulation::General: return b2_explicit(element, x);
    }
    return Vec2::Zero();
}

CoefficientSet CoefficientSet::with_formulation(Formulation f) const {
    CoefficientSet c = *this;
    c.formulation = f;
    return c;
}

AssumptionADiagnostics validate_assumption_A(const CoefficientSet& c, const Triangulation& mesh,
                                             const Quadrature& quad) {
    AssumptionADiagnostics d;
    d.alpha_lo = std::numeric_limits<double>::infinity();
    d.alpha_hi = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 x = mesh.map_to_physical(t, quad.ref_point(q));
            const Mat2 A = c.A(t, x);
            const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
            if (std::abs(A(0, 1) - A(1, 0)) > 1e-12 * scale) {
                d.ok = false;
                d.offending_element = t;
                d.message = "A is not symmetric on element " + std::to_string(t) +
                            " (asymmetry " + format_g12(std::abs(A(0, 1) - A(1, 0))) + ")";
                return d;
            }
            const Vec2 ev = sym_eigenvalues(A);
            if (ev(0) <= 0.0) {
                d.ok = false;
                d.offending_element = t;
                d.alpha_lo = ev(0);
                d.message = "A has non-positive eigenvalue " + format_g12(ev(0)) +
                            " on element " + std::to_string(t);
                return d;
            }
            d.alpha_lo = std::min(d.alpha_lo, ev(0));
            d.alpha_hi = std::max(d.alpha_hi, ev(1));
            d.b_sup = std::max(d.b_sup, c.b(t, x).norm());
            d.gamma_sup = std::max(d.gamma_sup, std::abs(c.gamma(t, x)));
        }
    }
    return d;
}

double coefficient_bound_M1(const CoefficientSet& c, const Triangulation& mesh,
                            const Quadrature& quad) {
    double sup2 = 1.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 x = mesh.map_to_physical(t, quad.ref_point(q));
            const Vec2 w = spd_inverse_sqrt(c.A(t, x)) * c.b(t, x);
            const double g = c.gamma(t, x) - 1.0;
            sup2 = std::max(sup2, w.squaredNorm() + g * g + 1.0);
        }
    }
    return std::sqrt(sup2);
}

MatrixField checkerboard_field(const Triangulation& mesh, double v1, double v2, int blocks) {
    if (blocks < 1) throw Error("checkerboard: blocks must be >= 1");
    std::vector<Mat2> per_elem(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const Vec2 c = mesh.centroid(t);
        const int ix = std::min(blocks - 1, static_cast<int>(std::floor(c.x() * blocks)));
        const int iy = std::min(blocks - 1, static_cast<int>(std::floor(c.y() * blocks)));
        per_elem[t] = (((ix + iy) % 2 == 0) ? v1 : v2) * Mat2::Identity();
    }
    return MatrixField::per_element(std::move(per_elem));
}

}  // namespace femlab
