#include "femlab/assembly.hpp"

#include <cmath>
#include <fstream>

namespace femlab {

AssembledSystem assemble_b(const FeSpace& flux_space, const FeSpace& scalar_space,
                           const CoefficientSet& coeffs, const Quadrature& quad) {
    if (&flux_space.mesh() != &scalar_space.mesh())
        throw Error("assemble_b: flux and scalar spaces live on different meshes");
    if (!flux_space.vector_valued() || scalar_space.vector_valued())
        throw Error("assemble_b: expected (vector, scalar) space pair");

    const Triangulation& mesh = flux_space.mesh();
    const Eigen::Index nf = flux_space.global_dof_count();
    const Eigen::Index ns = scalar_space.global_dof_count();
    const int nfl = flux_space.local_dof_count();
    const int nsl = scalar_space.local_dof_count();

    AssembledSystem sys;
    sys.n_flux = nf;
    sys.n_scalar = ns;
    sys.formulation = coeffs.formulation;
    sys.h_max = mesh.h_max();
    sys.B = Eigen::MatrixXd::Zero(nf + ns, nf + ns);
    sys.M_H = Eigen::MatrixXd::Zero(nf + ns, nf + ns);
    sys.M_L = Eigen::MatrixXd::Zero(nf + ns, nf + ns);
    sys.rhs = Eigen::VectorXd::Zero(nf + ns);

    Eigen::MatrixXd Bff(nfl, nfl), Bfu(nfl, nsl), Bsf(nsl, nfl), Bsu(nsl, nsl);
    Eigen::MatrixXd Mdiv(nfl, nfl), Ms(nsl, nsl);

    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto fb = flux_space.evaluate_at_quadrature(t, quad);
        const auto sb = scalar_space.evaluate_at_quadrature(t, quad);
        const double detJ = mesh.det_jacobian(t);
        Bff.setZero();
        Bfu.setZero();
        Bsf.setZero();
        Bsu.setZero();
        Mdiv.setZero();
        Ms.setZero();

        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 ref = quad.ref_point(q);
            const Vec2 x = mesh.map_to_physical(t, ref);
            const double w = quad.points()[q].w * detJ;
            const Mat2 Ainv = coeffs.A_inv(t, x);
            const Vec2 b1 = coeffs.b1(t, x);
            const Vec2 b2 = coeffs.b2(t, x);
            const double gamma = coeffs.gamma(t, x);

            const Eigen::Matrix2Xd& phi = fb.values[q];
            const auto dphi = fb.divs.col(q);
            const auto chi = sb.scalars.col(q);

            const Eigen::MatrixXd gram = w * phi.transpose() * (Ainv * phi);
            Bff += gram;
            Mdiv += w * dphi * dphi.transpose();
            Ms += w * chi * chi.transpose();

            // test flux row i, trial scalar col j: -(u_j, div phi_i) + (u_j, b1.phi_i)
            Bfu += w * (b1.transpose() * phi - dphi.transpose()).transpose() * chi.transpose();
            // test scalar row i, trial flux col j: (v_i, div phi_j) - (v_i, b2.phi_j)
            Bsf += w * chi * (dphi.transpose() - b2.transpose() * phi);
            Bsu += (w * gamma) * chi * chi.transpose();
        }

        const auto fdofs = flux_space.element_dofs(t);
        const auto sdofs = scalar_space.element_dofs(t);
        for (int i = 0; i < nfl; ++i) {
            const int gi = fdofs[i].global;
            for (int j = 0; j < nfl; ++j) {
                const int gj = fdofs[j].global;
                sys.B(gi, gj) += Bff(i, j);
                sys.M_H(gi, gj) += Bff(i, j) + Mdiv(i, j);
                sys.M_L(gi, gj) += Bff(i, j);
            }
            for (int j = 0; j < nsl; ++j) sys.B(gi, nf + sdofs[j].global) += Bfu(i, j);
        }
        for (int i = 0; i < nsl; ++i) {
            const int gi = sdofs[i].global;
            for (int j = 0; j < nfl; ++j) sys.B(nf + gi, fdofs[j].global) += Bsf(i, j);
            for (int j = 0; j < nsl; ++j) {
                const int gj = sdofs[j].global;
                sys.B(nf + gi, nf + gj) += Bsu(i, j);
                sys.M_H(nf + gi, nf + gj) += Ms(i, j);
                sys.M_L(nf + gi, nf + gj) += Ms(i, j);
            }
        }
    }

    // note: M_H, M_L are assembled from symmetric element contributions;
    // the A^-1 gram uses the exact same products in B's flux block
    return sys;
}

Eigen::VectorXd assemble_rhs(const FeSpace& scalar_space,
                             const std::function<double(const Vec2&)>& f, const Quadrature& quad) {
    if (scalar_space.vector_valued()) throw Error("assemble_rhs: scalar space required");
    const Triangulation& mesh = scalar_space.mesh();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(scalar_space.global_dof_count());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto sb = scalar_space.evaluate_at_quadrature(t, quad);
        const auto dofs = scalar_space.element_dofs(t);
        const double detJ = mesh.det_jacobian(t);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const double w = quad.points()[q].w * detJ;
            const double fx = f(mesh.map_to_physical(t, quad.ref_point(q)));
            for (int j = 0; j < scalar_space.local_dof_count(); ++j)
                rhs(dofs[j].global) += w * fx * sb.scalars(j, q);
        }
    }
    return rhs;
}

void set_rhs(AssembledSystem& sys, const Eigen::VectorXd& scalar_load) {
    if (scalar_load.size() != sys.n_scalar)
        throw Error("set_rhs: scalar load size mismatch");
    sys.rhs.setZero(sys.size());
    sys.rhs.tail(sys.n_scalar) = scalar_load;
}

Eigen::MatrixXd assemble_flux_gram(const FeSpace& flux_space, const MatrixField& A,
                                   const Quadrature& quad) {
    const Triangulation& mesh = flux_space.mesh();
    const int n = flux_space.global_dof_count();
    const int nloc = flux_space.local_dof_count();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto fb = flux_space.evaluate_at_quadrature(t, quad);
        const auto dofs = flux_space.element_dofs(t);
        const double detJ = mesh.det_jacobian(t);
        Eigen::MatrixXd Gl = Eigen::MatrixXd::Zero(nloc, nloc);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 x = mesh.map_to_physical(t, quad.ref_point(q));
            const double w = quad.points()[q].w * detJ;
            Gl += w * fb.values[q].transpose() * (A(t, x).inverse() * fb.values[q]);
        }
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) G(dofs[i].global, dofs[j].global) += Gl(i, j);
    }
    return G;
}

Eigen::MatrixXd assemble_div_coupling(const FeSpace& flux_space, int k, const Quadrature& quad) {
    const Triangulation& mesh = flux_space.mesh();
    const int nloc = flux_space.local_dof_count();
    const int ns = DgField::nloc(k);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns) * mesh.n_triangles(),
                                              flux_space.global_dof_count());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto fb = flux_space.evaluate_at_quadrature(t, quad);
        const auto dofs = flux_space.element_dofs(t);
        const double detJ = mesh.det_jacobian(t);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 ref = quad.ref_point(q);
            const double w = quad.points()[q].w * detJ;
            Eigen::VectorXd chi(ns);
            if (k == 0)
                chi << 1.0;
            else
                chi << 1.0, ref.x(), ref.y();
            for (int i = 0; i < ns; ++i)
                for (int j = 0; j < nloc; ++j)
                    D(static_cast<Eigen::Index>(ns) * t + i, dofs[j].global) +=
                        w * chi(i) * fb.divs(j, q);
        }
    }
    return D;
}

ExactScalar exact_sinsin() {
    ExactScalar u;
    u.value = [](const Vec2& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); };
    u.grad = [](const Vec2& x) {
        return Vec2(M_PI * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y()),
                    M_PI * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()));
    };
    u.hess = [](const Vec2& x) {
        const double pi2 = M_PI * M_PI;
        const double s = std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
        const double c = std::cos(M_PI * x.x()) * std::cos(M_PI * x.y());
        Mat2 H;
        H << -pi2 * s, pi2 * c, pi2 * c, -pi2 * s;
        return H;
    };
    return u;
}

ExactScalar exact_bubble() {
    ExactScalar u;
    u.value = [](const Vec2& p) {
        return p.x() * (1 - p.x()) * p.y() * (1 - p.y());
    };
    u.grad = [](const Vec2& p) {
        return Vec2((1 - 2 * p.x()) * p.y() * (1 - p.y()), p.x() * (1 - p.x()) * (1 - 2 * p.y()));
    };
    u.hess = [](const Vec2& p) {
        Mat2 H;
        H << -2 * p.y() * (1 - p.y()), (1 - 2 * p.x()) * (1 - 2 * p.y()),
            (1 - 2 * p.x()) * (1 - 2 * p.y()), -2 * p.x() * (1 - p.x());
        return H;
    };
    return u;
}

ManufacturedProblem manufactured_problem(const ExactScalar& u, const CoefficientSet& coeffs) {
    if (!coeffs.A.spatially_constant())
        throw Error("manufactured_problem: A must be spatially constant");
    if (!coeffs.b.spatially_constant())
        throw Error("manufactured_problem: b must be spatially constant");
    if (coeffs.formulation == Formulation::General)
        throw Error("manufactured_problem: pick conservative or divergence formulation");
    if (!u.value || !u.grad || !u.hess)
        throw Error("manufactured_problem: missing derivative callbacks");

    const Mat2 A = coeffs.A(0, Vec2::Zero());
    const Vec2 b = coeffs.b(0, Vec2::Zero());
    const bool conservative = coeffs.formulation == Formulation::Conservative;
    const ScalarField gamma = coeffs.gamma;

    ManufacturedProblem p;
    p.u = u.value;
    p.grad_u = u.grad;
    // second-order part A : hess(u), identical in both formulations for constant A
    auto diffusion = [A, u](const Vec2& x) { return (A * u.hess(x)).trace(); };

    if (conservative) {
        p.sigma = [A, b, u](const Vec2& x) {
            return Vec2(-A * u.grad(x) - u.value(x) * b);
        };
        p.f = [diffusion, b, gamma, u](const Vec2& x) {
            return -diffusion(x) - b.dot(u.grad(x)) + gamma(0, x) * u.value(x);
        };
        p.div_sigma = [diffusion, b, u](const Vec2& x) {
            return -diffusion(x) - b.dot(u.grad(x));
        };
    } else {
        p.sigma = [A, u](const Vec2& x) { return Vec2(-A * u.grad(x)); };
        p.f = [diffusion, b, gamma, u](const Vec2& x) {
            return -diffusion(x) + b.dot(u.grad(x)) + gamma(0, x) * u.value(x);
        };
        p.div_sigma = [diffusion](const Vec2& x) { return -diffusion(x); };
    }
    return p;
}

void write_matrix_market(const std::string& path, const Eigen::MatrixXd& M) {
    std::ofstream out(path);
    if (!out) throw Error("write_matrix_market: cannot open '" + path + "'");
    Eigen::Index nnz = 0;
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            if (M(i, j) != 0.0) ++nnz;
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << M.rows() << " " << M.cols() << " " << nnz << "\n";
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            if (M(i, j) != 0.0)
                out << (i + 1) << " " << (j + 1) << " " << format_g12(M(i, j)) << "\n";
}

}  // namespace femlab
