#include <doctest.h>

#include <cmath>

#include "femlab/coefficients.hpp"

using namespace femlab;

namespace {
const Quadrature& quad6() { return Quadrature::triangle_degree6(); }
}

TEST_SUITE("coefficients") {

TEST_CASE("symmetric eigenvalues, closed form") {
    Mat2 A;
    A << 1, 2, 2, 1;
    const Vec2 ev = sym_eigenvalues(A);
    CHECK(ev(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(ev(1) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("assumption (A) diagnostics: identity and checkerboard") {
    const Triangulation mesh = Triangulation::structured(4);

    const auto id = validate_assumption_A(
        CoefficientSet::conservative(MatrixField::constant(Mat2::Identity()),
                                     VectorField::constant(Vec2::Zero()),
                                     ScalarField::constant(1.0)),
        mesh, quad6());
    CHECK(id.ok);
    CHECK(id.alpha_lo == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(id.alpha_hi == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(id.b_sup == 0.0);
    CHECK(id.gamma_sup == doctest::Approx(1.0));

    const auto cb = validate_assumption_A(
        CoefficientSet::conservative(checkerboard_field(mesh, 1.0, 100.0, 2),
                                     VectorField::constant(Vec2(1, 1)),
                                     ScalarField::constant(0.0)),
        mesh, quad6());
    CHECK(cb.ok);
    CHECK(cb.alpha_lo == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cb.alpha_hi == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(cb.b_sup == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("assumption (A) failure: indefinite and asymmetric samples") {
    const Triangulation mesh = Triangulation::structured(1);
    Mat2 indef;
    indef << 1, 2, 2, 1;  // eigenvalues -1, 3
    const auto bad = validate_assumption_A(
        CoefficientSet::conservative(MatrixField::constant(indef),
                                     VectorField::constant(Vec2::Zero()),
                                     ScalarField::constant(0.0)),
        mesh, quad6());
    CHECK_FALSE(bad.ok);
    CHECK(bad.offending_element >= 0);
    CHECK(bad.message.find("non-positive") != std::string::npos);

    Mat2 asym;
    asym << 1, 0.5, 0.4999, 1;
    const auto skew = validate_assumption_A(
        CoefficientSet::conservative(MatrixField::constant(asym),
                                     VectorField::constant(Vec2::Zero()),
                                     ScalarField::constant(0.0)),
        mesh, quad6());
    CHECK_FALSE(skew.ok);
    CHECK(skew.message.find("symmetric") != std::string::npos);
}

TEST_CASE("coefficient bound M1") {
    const Triangulation mesh = Triangulation::structured(2);
    auto M1 = [&](Mat2 A, Vec2 b, double g) {
        return coefficient_bound_M1(
            CoefficientSet::conservative(MatrixField::constant(A), VectorField::constant(b),
                                         ScalarField::constant(g)),
            mesh, quad6());
    };
    CHECK(M1(Mat2::Identity(), Vec2::Zero(), 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(M1(Mat2::Identity(), Vec2(1, 0), 0.0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(M1(4 * Mat2::Identity(), Vec2(2, 0), 1.0) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    // M1 >= 1 always
    CHECK(M1(Mat2::Identity(), Vec2::Zero(), 1.0) >= 1.0);
}

TEST_CASE("conservative and divergence variants swap b1 and b2") {
    const Triangulation mesh = Triangulation::structured(4);
    const MatrixField A = checkerboard_field(mesh, 1.0, 100.0, 2);
    const VectorField b = VectorField::constant(Vec2(1.0, -2.0));
    const ScalarField gamma = ScalarField::constant(-10.0);
    const CoefficientSet cons = CoefficientSet::conservative(A, b, gamma);
    const CoefficientSet divf = CoefficientSet::divergence(A, b, gamma);

    for (int t = 0; t < mesh.n_triangles(); ++t) {
        for (std::size_t q = 0; q < quad6().size(); ++q) {
            const Vec2 x = mesh.map_to_physical(t, quad6().ref_point(q));
            CHECK((cons.b1(t, x) - divf.b2(t, x)).norm() < 1e-13);
            CHECK(cons.b2(t, x).norm() == 0.0);
            CHECK(divf.b1(t, x).norm() == 0.0);
        }
    }
}

TEST_CASE("general formulation carries explicit convection fields") {
    const Triangulation mesh = Triangulation::structured(1);
    const CoefficientSet g = CoefficientSet::general(
        MatrixField::constant(Mat2::Identity()),
        VectorField::callback([](const Vec2& x) { return Vec2(x.y(), 0.0); }),
        VectorField::constant(Vec2(0.5, 0.5)), ScalarField::constant(2.0));
    const Vec2 x(0.25, 0.75);
    CHECK((g.b1(0, x) - Vec2(0.75, 0.0)).norm() < 1e-15);
    CHECK((g.b2(0, x) - Vec2(0.5, 0.5)).norm() < 1e-15);
}

TEST_CASE("per-element constants reproduce exactly at quadrature points") {
    const Triangulation mesh = Triangulation::structured(2);
    std::vector<double> vals(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) vals[t] = 1.0 + 0.25 * t;
    const ScalarField f = ScalarField::per_element(vals);
    for (int t = 0; t < mesh.n_triangles(); ++t)
        for (std::size_t q = 0; q < quad6().size(); ++q)
            CHECK(f(t, mesh.map_to_physical(t, quad6().ref_point(q))) == vals[t]);
}

TEST_CASE("checkerboard field is mesh-aligned for matching block counts") {
    const Triangulation mesh = Triangulation::structured(4);
    const MatrixField A = checkerboard_field(mesh, 1.0, 100.0, 2);
    // the four quadrants of the unit square alternate 1, 100
    auto value_at = [&](double cx, double cy) {
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const Vec2 c = mesh.centroid(t);
            if (std::abs(c.x() - cx) < 0.2 && std::abs(c.y() - cy) < 0.2) return A(t, c)(0, 0);
        }
        return -1.0;
    };
    CHECK(value_at(0.25, 0.25) == 1.0);
    CHECK(value_at(0.75, 0.25) == 100.0);
    CHECK(value_at(0.25, 0.75) == 100.0);
    CHECK(value_at(0.75, 0.75) == 1.0);
}

TEST_CASE("inverse square root of an SPD matrix") {
    Mat2 A;
    A << 4, 1, 1, 3;
    const Mat2 R = spd_inverse_sqrt(A);
    CHECK((R * A * R - Mat2::Identity()).norm() < 1e-13);
    Mat2 indef;
    indef << 1, 2, 2, 1;
    CHECK_THROWS_AS((void)spd_inverse_sqrt(indef), Error);
}

}  // TEST_SUITE
