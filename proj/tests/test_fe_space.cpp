#include <doctest.h>

#include <cmath>

#include "femlab/campaign.hpp"
#include "femlab/fe_space.hpp"

using namespace femlab;

namespace {

const Quadrature& quad6() { return Quadrature::triangle_degree6(); }

Triangulation reference_triangle() {
    return Triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
}

// reference coordinates of a physical point inside element t
Vec2 pull_back(const Triangulation& mesh, int t, const Vec2& x) {
    return mesh.jacobian(t).inverse() * (x - mesh.vertex_of(t, 0));
}

// max normal-trace jump of the FE function with coefficients c over all
// interior edges, sampled at the edge Gauss points
double max_normal_jump(const FeSpace& space, const Eigen::VectorXd& c) {
    const Triangulation& mesh = space.mesh();
    double worst = 0;
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        if (edge.on_boundary()) continue;
        const Vec2 a = mesh.vertices()[edge.a];
        const Vec2 d = mesh.vertices()[edge.b] - a;
        for (const auto& g : EdgeRule::gauss4()) {
            const Vec2 x = a + g.t * d;
            const Vec2 rp = pull_back(mesh, edge.tri_plus, x);
            const Vec2 rm = pull_back(mesh, edge.tri_minus, x);
            const double vp = eval_flux(space, c, edge.tri_plus, {&rp, 1}).value[0].dot(edge.normal);
            const double vm = eval_flux(space, c, edge.tri_minus, {&rm, 1}).value[0].dot(edge.normal);
            worst = std::max(worst, std::abs(vp - vm));
        }
    }
    return worst;
}

}  // namespace

TEST_SUITE("fe_space") {

TEST_CASE("local dimensions") {
    const Triangulation tri = reference_triangle();
    CHECK(FeSpace(tri, SpaceKind::RT, 0).local_dof_count() == 3);
    CHECK(FeSpace(tri, SpaceKind::RT, 1).local_dof_count() == 8);
    CHECK(FeSpace(tri, SpaceKind::BDM, 1).local_dof_count() == 6);
    CHECK(FeSpace(tri, SpaceKind::DG, 0).local_dof_count() == 1);
    CHECK(FeSpace(tri, SpaceKind::DG, 1).local_dof_count() == 3);
    CHECK_THROWS_AS(FeSpace(tri, SpaceKind::BDM, 0), Error);
    CHECK_THROWS_AS(FeSpace(tri, SpaceKind::RT, 2), Error);
}

TEST_CASE("global dof counts and pairing degrees") {
    const Triangulation mesh = Triangulation::structured(2);  // 16 edges, 8 triangles
    CHECK(FeSpace(mesh, SpaceKind::RT, 0).global_dof_count() == 16);
    CHECK(FeSpace(mesh, SpaceKind::BDM, 1).global_dof_count() == 32);
    CHECK(FeSpace(mesh, SpaceKind::RT, 1).global_dof_count() == 32 + 16);
    CHECK(FeSpace(mesh, SpaceKind::DG, 1).global_dof_count() == 24);
    CHECK(FeSpace(mesh, SpaceKind::RT, 0).pairing_degree() == 0);
    CHECK(FeSpace(mesh, SpaceKind::RT, 1).pairing_degree() == 1);
    CHECK(FeSpace(mesh, SpaceKind::BDM, 1).pairing_degree() == 0);
}

TEST_CASE("RT0 reference shapes are x - p_i with divergence 2") {
    const ReferenceBasis rt0(SpaceKind::RT, 0);
    const Vec2 corners[3] = {{0, 0}, {1, 0}, {0, 1}};
    Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        double a = rng.uniform(), b = rng.uniform(0, 1 - a);
        const Vec2 p(a, b);
        Eigen::Matrix2Xd vals;
        Eigen::VectorXd divs;
        rt0.evaluate(p, vals, divs);
        for (int i = 0; i < 3; ++i) {
            CHECK((vals.col(i) - (p - corners[i])).norm() < 1e-13);
            CHECK(divs(i) == doctest::Approx(2.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("DG P0 basis is the indicator") {
    const Triangulation mesh = Triangulation::structured(2);
    const FeSpace dg0(mesh, SpaceKind::DG, 0);
    const auto eval = dg0.evaluate_at_quadrature(3, quad6());
    for (std::size_t q = 0; q < quad6().size(); ++q)
        CHECK(eval.scalars(0, q) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("canonical dof interpolation recovers space members") {
    const Triangulation mesh = Triangulation::structured(3);
    Rng rng(11);
    for (SpaceKind kind : {SpaceKind::RT, SpaceKind::BDM}) {
        for (int deg = (kind == SpaceKind::BDM ? 1 : 0); deg <= 1; ++deg) {
            const FeSpace sp(mesh, kind, deg);
            Eigen::VectorXd c(sp.global_dof_count());
            for (int i = 0; i < c.size(); ++i) c(i) = rng.normal();

            // view the FE function as an analytic field by locating the
            // element of each sample point, then re-apply the dof functionals
            const Eigen::VectorXd back = interpolate_dofs(sp, [&](const Vec2& x) {
                for (int t = 0; t < mesh.n_triangles(); ++t) {
                    const Vec2 r = pull_back(mesh, t, x);
                    if (r.x() >= -1e-12 && r.y() >= -1e-12 && r.x() + r.y() <= 1 + 1e-12)
                        return eval_flux(sp, c, t, {&r, 1}).value[0];
                }
                throw Error("point not located");
            });
            CHECK((back - c).cwiseAbs().maxCoeff() < 1e-11 * c.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("H(div) conformity: continuous normal traces across interior edges") {
    Triangulation mesh = Triangulation::structured(2).refined();
    Rng rng(3);
    for (SpaceKind kind : {SpaceKind::RT, SpaceKind::BDM}) {
        for (int deg = (kind == SpaceKind::BDM ? 1 : 0); deg <= 1; ++deg) {
            const FeSpace sp(mesh, kind, deg);
            Eigen::VectorXd c(sp.global_dof_count());
            for (int i = 0; i < c.size(); ++i) c(i) = rng.normal();
            const double scale = c.cwiseAbs().maxCoeff();
            CHECK(max_normal_jump(sp, c) < 1e-12 * scale);
        }
    }
}

TEST_CASE("partition of edge moments: signed RT0 normal moments cancel") {
    const Triangulation mesh = Triangulation::structured(2);
    const FeSpace rt0(mesh, SpaceKind::RT, 0);
    for (int e = 0; e < mesh.n_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        if (edge.on_boundary()) continue;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(rt0.global_dof_count());
        c(e) = 1.0;
        const Vec2 a = mesh.vertices()[edge.a];
        const Vec2 d = mesh.vertices()[edge.b] - a;
        double sum = 0;  // moments against the two outward normals
        for (int tri : {edge.tri_plus, edge.tri_minus}) {
            const double sign = tri == edge.tri_plus ? 1.0 : -1.0;
            double m = 0;
            for (const auto& g : EdgeRule::gauss4()) {
                const Vec2 r = pull_back(mesh, tri, a + g.t * d);
                m += g.w * d.norm() *
                     eval_flux(rt0, c, tri, {&r, 1}).value[0].dot(sign * edge.normal);
            }
            sum += m;
        }
        CHECK(std::abs(sum) < 1e-13);
    }
}

TEST_CASE("divergence of the interpolated field lies in P_k") {
    const Triangulation mesh = Triangulation::structured(2);
    for (int deg = 0; deg <= 1; ++deg) {
        const FeSpace sp(mesh, SpaceKind::RT, deg);
        Rng rng(5);
        Eigen::VectorXd c(sp.global_dof_count());
        for (int i = 0; i < c.size(); ++i) c(i) = rng.normal();
        const DgField proj = l2_project(
            mesh, deg,
            [&](int t, const Vec2& ref, const Vec2&) {
                return eval_flux(sp, c, t, {&ref, 1}).div[0];
            },
            quad6());
        double worst = 0;
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            for (std::size_t q = 0; q < quad6().size(); ++q) {
                const Vec2 ref = quad6().ref_point(q);
                worst = std::max(worst, std::abs(proj.eval(t, ref) -
                                                 eval_flux(sp, c, t, {&ref, 1}).div[0]));
            }
        }
        CHECK(worst < 1e-12 * c.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("L2 projection: fixed points, mean value, orthogonality") {
    const Triangulation ref = reference_triangle();

    // constants are reproduced for any k
    for (int k = 0; k <= 1; ++k) {
        const DgField p = l2_project(ref, k, pointwise([](const Vec2&) { return 3.25; }), quad6());
        CHECK(p.eval(0, Vec2(0.3, 0.2)) == doctest::Approx(3.25).epsilon(1e-14));
    }

    // mean of x over the reference triangle is 1/3
    const DgField mean =
        l2_project(ref, 0, pointwise([](const Vec2& x) { return x.x(); }), quad6());
    CHECK(mean.eval(0, Vec2(0.1, 0.1)) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    // P_1 data is reproduced at k=1
    const Triangulation mesh = Triangulation::structured(2);
    const DgField lin = l2_project(
        mesh, 1, pointwise([](const Vec2& x) { return 0.3 + 1.7 * x.x() - 2.2 * x.y(); }), quad6());
    double worst = 0;
    for (int t = 0; t < mesh.n_triangles(); ++t)
        for (std::size_t q = 0; q < quad6().size(); ++q) {
            const Vec2 r = quad6().ref_point(q);
            const Vec2 x = mesh.map_to_physical(t, r);
            worst = std::max(worst, std::abs(lin.eval(t, r) - (0.3 + 1.7 * x.x() - 2.2 * x.y())));
        }
    CHECK(worst < 1e-13);

    // (f - Pi_k f) _|_ P_k elementwise
    auto f = [](const Vec2& x) { return std::sin(3 * x.x()) * std::exp(x.y()); };
    for (int k = 0; k <= 1; ++k) {
        const DgField p = l2_project(mesh, k, pointwise(f), quad6());
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const double detJ = mesh.det_jacobian(t);
            Eigen::VectorXd resid = Eigen::VectorXd::Zero(DgField::nloc(k));
            double fnorm2 = 0, qnorm2 = 0;
            for (std::size_t q = 0; q < quad6().size(); ++q) {
                const Vec2 r = quad6().ref_point(q);
                const Vec2 x = mesh.map_to_physical(t, r);
                const double w = quad6().points()[q].w * detJ;
                const double def = f(x) - p.eval(t, r);
                Eigen::VectorXd chi(DgField::nloc(k));
                if (k == 0)
                    chi << 1.0;
                else
                    chi << 1.0, r.x(), r.y();
                resid += w * def * chi;
                fnorm2 += w * f(x) * f(x);
                qnorm2 += w * chi.squaredNorm();
            }
            CHECK(resid.cwiseAbs().maxCoeff() <=
                  1e-12 * std::sqrt(fnorm2) * std::sqrt(qnorm2) + 1e-15);
        }
    }
}

TEST_CASE("best flux interpolation: recovery, first-order rate, weight scaling") {
    const Triangulation mesh = Triangulation::structured(2);
    const FeSpace rt0(mesh, SpaceKind::RT, 0);
    // smooth global field inside RT0: constant plus a multiple of x
    auto member = [](const Vec2& x) { return Vec2(0.4 - 0.8 * x.x(), 1.1 - 0.8 * x.y()); };
    const auto rec = interpolate_best_flux(rt0, MatrixField::constant(Mat2::Identity()), member,
                                           quad6());
    CHECK(rec.distance < 1e-12);

    // dist(grad(sin sin), RT0) decreases with slope ~ 1
    auto sigma = [](const Vec2& x) {
        return Vec2(M_PI * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y()),
                    M_PI * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()));
    };
    std::vector<double> hs, dists;
    Triangulation m = Triangulation::structured(2);
    for (int level = 0; level < 3; ++level) {
        const FeSpace sp(m, SpaceKind::RT, 0);
        hs.push_back(m.h_max());
        dists.push_back(
            interpolate_best_flux(sp, MatrixField::constant(Mat2::Identity()), sigma, quad6())
                .distance);
        m = m.refined();
    }
    const double slope = fit_slope_last3(hs, dists);
    CHECK(slope > 0.85);
    CHECK(slope < 1.15);

    // A = 2 I scales the distance by 1/sqrt(2)
    const auto d1 = interpolate_best_flux(rt0, MatrixField::constant(Mat2::Identity()), sigma,
                                          quad6());
    const auto d2 = interpolate_best_flux(rt0, MatrixField::constant(2 * Mat2::Identity()), sigma,
                                          quad6());
    CHECK(d2.distance == doctest::Approx(d1.distance / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("evaluate rejects bad element indices") {
    const Triangulation mesh = Triangulation::structured(1);
    const FeSpace rt0(mesh, SpaceKind::RT, 0);
    const Vec2 p(0.25, 0.25);
    CHECK_THROWS_AS((void)rt0.evaluate(2, {&p, 1}), Error);
}

}  // TEST_SUITE
