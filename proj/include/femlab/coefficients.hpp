#ifndef FEMLAB_COEFFICIENTS_HPP
#define FEMLAB_COEFFICIENTS_HPP

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "femlab/mesh.hpp"
#include "femlab/quadrature.hpp"

namespace femlab {

/// L-infinity coefficient fields come in three flavours: globally constant,
/// constant per mesh element (the rough, mesh-aligned case) or an analytic
/// callback sampled at quadrature points.
template <typename Value>
class Field {
public:
    using Callback = std::function<Value(const Vec2&)>;

    static Field constant(Value v) { return Field(std::move(v)); }
    static Field per_element(std::vector<Value> v) { return Field(std::move(v)); }
    static Field callback(Callback f) { return Field(std::move(f)); }

    Value operator()(int element, const Vec2& x) const {
        if (const Value* c = std::get_if<Value>(&data_)) return *c;
        if (const auto* pe = std::get_if<std::vector<Value>>(&data_)) return (*pe)[element];
        return std::get<Callback>(data_)(x);
    }

    bool spatially_constant() const { return std::holds_alternative<Value>(data_); }

private:
    explicit Field(std::variant<Value, std::vector<Value>, Callback> d) : data_(std::move(d)) {}
    std::variant<Value, std::vector<Value>, Callback> data_;
};

using ScalarField = Field<double>;
using VectorField = Field<Vec2>;
using MatrixField = Field<Mat2>;

/// eigenvalues (ascending) of a symmetric 2x2 matrix
Vec2 sym_eigenvalues(const Mat2& A);
/// inverse of the SPD square root, via the closed-form 2x2 spectral decomposition
Mat2 spd_inverse_sqrt(const Mat2& A);

enum class Formulation { Conservative, Divergence, General };

std::string to_string(Formulation f);

/// PDE data (A, b, gamma) plus the formulation choice that fixes the derived
/// convection fields: conservative keeps b1 = A^-1 b, b2 = 0; divergence
/// keeps b1 = 0, b2 = A^-1 b (A symmetric). General carries explicit b1, b2.
struct CoefficientSet {
    MatrixField A = MatrixField::constant(Mat2::Identity());
    VectorField b = VectorField::constant(Vec2::Zero());
    ScalarField gamma = ScalarField::constant(0.0);
    Formulation formulation = Formulation::Conservative;
    VectorField b1_explicit = VectorField::constant(Vec2::Zero());
    VectorField b2_explicit = VectorField::constant(Vec2::Zero());

    static CoefficientSet conservative(MatrixField A, VectorField b, ScalarField gamma);
    static CoefficientSet divergence(MatrixField A, VectorField b, ScalarField gamma);
    static CoefficientSet general(MatrixField A, VectorField b1, VectorField b2, ScalarField gamma);

    Mat2 A_inv(int element, const Vec2& x) const { return A(element, x).inverse(); }
    Vec2 b1(int element, const Vec2& x) const;
    Vec2 b2(int element, const Vec2& x) const;

    /// same data, other formulation
    CoefficientSet with_formulation(Formulation f) const;
};

/// Sampled Assumption (A) diagnostics: extreme eigenvalues of A and sup
/// norms of b and gamma over all quadrature points. `ok` is false when a
/// sample has min eigenvalue <= 0 or asymmetry beyond 1e-12.
struct AssumptionADiagnostics {
    bool ok = true;
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
    double b_sup = 0.0;
    double gamma_sup = 0.0;
    int offending_element = -1;
    std::string message;
};

AssumptionADiagnostics validate_assumption_A(const CoefficientSet& c, const Triangulation& mesh,
                                             const Quadrature& quad);

/// Sampled essential supremum of sqrt(|A^-1/2 b|^2 + |gamma - 1|^2 + 1);
/// always >= 1.
double coefficient_bound_M1(const CoefficientSet& c, const Triangulation& mesh,
                            const Quadrature& quad);

/// Checkerboard diffusion v*Identity alternating between v1 and v2 on a
/// blocks x blocks grid over the unit square, materialized per element
/// (lookup by centroid).
MatrixField checkerboard_field(const Triangulation& mesh, double v1, double v2, int blocks);

}  // namespace femlab

#endif
