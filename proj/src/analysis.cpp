#include "femlab/analysis.hpp"

#include <cmath>
#include <limits>

namespace femlab {

InfSupResult compute_inf_sup(const AssembledSystem& sys) {
    Eigen::LLT<Eigen::MatrixXd> llt(sys.M_H);
    if (llt.info() != Eigen::Success)
        throw Error("compute_inf_sup: Cholesky of M_H failed (Gram not SPD)");
    const auto L = llt.matrixL();
    const Eigen::MatrixXd X = L.solve(sys.B);
    const Eigen::MatrixXd W = L.solve(X.transpose()).transpose();  // L^-1 B L^-T
    const Eigen::MatrixXd N = W.transpose() * W;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N);
    if (es.info() != Eigen::Success) throw Error("compute_inf_sup: eigensolver did not converge");
    const Eigen::VectorXd& ev = es.eigenvalues();
    double lam = ev(0);
    const double lam_max = std::max(std::abs(ev(ev.size() - 1)), 1e-300);
    if (lam < 0.0) lam = 0.0;  // rounding below zero

    InfSupResult out;
    out.report.h_max = sys.h_max;
    out.report.mesh_level = sys.mesh_level;
    out.report.formulation = sys.formulation;
    out.report.beta_h = std::sqrt(lam);
    const Eigen::VectorXd q = es.eigenvectors().col(0);
    out.report.eigenvalue_residual = (N * q - ev(0) * q).norm() / lam_max;
    out.minimizer = L.transpose().solve(q);
    return out;
}

Eigen::VectorXd solve_mixed(const AssembledSystem& sys) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.B);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14))
        throw Error("solve_mixed: B numerically singular (rcond " + format_g12(rcond) +
                    "); unstable discretization or ill-posed data");
    Eigen::VectorXd x = lu.solve(sys.rhs);
    x += lu.solve(sys.rhs - sys.B * x);
    const double rhs_norm = sys.rhs.norm();
    if (rhs_norm > 0.0) {
        const double rel = (sys.B * x - sys.rhs).norm() / rhs_norm;
        if (rel > 1e-11)
            throw Error("solve_mixed: relative residual " + format_g12(rel) +
                        " exceeds 1e-11 (rcond " + format_g12(rcond) + ")");
    }
    return x;
}

double spd_condition(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(M.rows() - 1) / es.eigenvalues()(0);
}

ErrorReport compute_errors(const Eigen::VectorXd& x_h, const ManufacturedProblem& exact,
                           const FeSpace& flux_space, const FeSpace& scalar_space,
                           const CoefficientSet& coeffs, const Quadrature& quad) {
    const Triangulation& mesh = flux_space.mesh();
    const int k = scalar_space.degree();
    const Eigen::VectorXd sigma_c = x_h.head(flux_space.global_dof_count());
    const Eigen::VectorXd u_c = x_h.tail(scalar_space.global_dof_count());

    const DgField proj_u = l2_project(mesh, k, pointwise(exact.u), quad);
    const DgField proj_div = l2_project(mesh, k, pointwise(exact.div_sigma), quad);

    ErrorReport rep;
    rep.h_max = mesh.h_max();
    double flux2 = 0, scalar2 = 0, osc_div2 = 0, osc_u2 = 0, proj_u2 = 0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto fb = flux_space.evaluate_at_quadrature(t, quad);
        const auto sb = scalar_space.evaluate_at_quadrature(t, quad);
        const auto fdofs = flux_space.element_dofs(t);
        const auto sdofs = scalar_space.element_dofs(t);
        Eigen::VectorXd fl(flux_space.local_dof_count()), sl(scalar_space.local_dof_count());
        for (int j = 0; j < fl.size(); ++j) fl(j) = sigma_c(fdofs[j].global);
        for (int j = 0; j < sl.size(); ++j) sl(j) = u_c(sdofs[j].global);

        const double detJ = mesh.det_jacobian(t);
        const double hT = mesh.h(t);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 ref = quad.ref_point(q);
            const Vec2 x = mesh.map_to_physical(t, ref);
            const double w = quad.points()[q].w * detJ;

            const Vec2 dsig = exact.sigma(x) - fb.values[q] * fl;
            flux2 += w * dsig.dot(coeffs.A_inv(t, x) * dsig);

            const double du = exact.u(x) - sb.scalars.col(q).dot(sl);
            scalar2 += w * du * du;

            const double dproj = exact.u(x) - proj_u.eval(t, ref);
            proj_u2 += w * dproj * dproj;
            osc_u2 += w * hT * hT * dproj * dproj;

            const double ddiv = exact.div_sigma(x) - proj_div.eval(t, ref);
            osc_div2 += w * hT * hT * ddiv * ddiv;
        }
    }
    rep.flux_error = std::sqrt(flux2);
    rep.scalar_error = std::sqrt(scalar2);
    rep.proj_error_u = std::sqrt(proj_u2);
    rep.osc_u = std::sqrt(osc_u2);
    rep.osc_div = std::sqrt(osc_div2);
    rep.best_flux = interpolate_best_flux(flux_space, coeffs.A, exact.sigma, quad).distance;
    return rep;
}

ConstrainedProjectionResult constrained_flux_projection(
    const std::function<Vec2(const Vec2&)>& p, const std::function<double(const Vec2&)>& div_p,
    const FeSpace& flux_space, const MatrixField& A, const Quadrature& quad) {
    const Triangulation& mesh = flux_space.mesh();
    const int k = flux_space.pairing_degree();
    const int nloc = flux_space.local_dof_count();

    const Eigen::MatrixXd G = assemble_flux_gram(flux_space, A, quad);
    const Eigen::MatrixXd D = assemble_div_coupling(flux_space, k, quad);

    // right-hand sides: r_i = (A^-1 p, phi_i), g_q = (div p, chi_q)
    Eigen::VectorXd r = Eigen::VectorXd::Zero(flux_space.global_dof_count());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(D.rows());
    const int ndg = DgField::nloc(k);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto fb = flux_space.evaluate_at_quadrature(t, quad);
        const auto dofs = flux_space.element_dofs(t);
        const double detJ = mesh.det_jacobian(t);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 ref = quad.ref_point(q);
            const Vec2 x = mesh.map_to_physical(t, ref);
            const double w = quad.points()[q].w * detJ;
            const Vec2 Ap = A(t, x).inverse() * p(x);
            for (int j = 0; j < nloc; ++j) r(dofs[j].global) += w * Ap.dot(fb.values[q].col(j));
            Eigen::VectorXd chi(ndg);
            if (k == 0)
                chi << 1.0;
            else
                chi << 1.0, ref.x(), ref.y();
            g.segment(static_cast<Eigen::Index>(ndg) * t, ndg) += w * div_p(x) * chi;
        }
    }

    Eigen::LLT<Eigen::MatrixXd> Gllt(G);
    if (Gllt.info() != Eigen::Success)
        throw Error("constrained_flux_projection: flux Gram not SPD");
    const Eigen::MatrixXd GinvDt = Gllt.solve(D.transpose());
    Eigen::LLT<Eigen::MatrixXd> Sllt(D * GinvDt);
    if (Sllt.info() != Eigen::Success)
        throw Error("constrained_flux_projection: KKT system singular (constraint dofs inconsistent)");
    const Eigen::VectorXd lambda = Sllt.solve(D * Gllt.solve(r) - g);
    ConstrainedProjectionResult out;
    out.coefficients = Gllt.solve(r - D.transpose() * lambda);

    // coefficient-level constraint: DG coefficients of div p_h vs Pi_k div p
    const Eigen::VectorXd Dc = D * out.coefficients;
    double max_dev = 0.0, scale = 0.0;
    {
        // local DG mass on element t is detJ * reference Gram
        Eigen::MatrixXd Gref = Eigen::MatrixXd::Zero(ndg, ndg);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            Eigen::VectorXd chi(ndg);
            const Vec2 ref = quad.ref_point(q);
            if (k == 0)
                chi << 1.0;
            else
                chi << 1.0, ref.x(), ref.y();
            Gref += quad.points()[q].w * chi * chi.transpose();
        }
        Eigen::LLT<Eigen::MatrixXd> Gref_llt(Gref);
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const double detJ = mesh.det_jacobian(t);
            const Eigen::VectorXd dh =
                Gref_llt.solve(Dc.segment(static_cast<Eigen::Index>(ndg) * t, ndg)) / detJ;
            const Eigen::VectorXd pk =
                Gref_llt.solve(g.segment(static_cast<Eigen::Index>(ndg) * t, ndg)) / detJ;
            max_dev = std::max(max_dev, (dh - pk).cwiseAbs().maxCoeff());
            scale = std::max(scale, pk.cwiseAbs().maxCoeff());
        }
    }
    out.constraint_residual = max_dev / std::max(1.0, scale);

    double obj2 = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto fb = flux_space.evaluate_at_quadrature(t, quad);
        const auto dofs = flux_space.element_dofs(t);
        Eigen::VectorXd local(nloc);
        for (int j = 0; j < nloc; ++j) local(j) = out.coefficients(dofs[j].global);
        const double detJ = mesh.det_jacobian(t);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 x = mesh.map_to_physical(t, quad.ref_point(q));
            const Vec2 res = p(x) - fb.values[q] * local;
            obj2 += quad.points()[q].w * detJ * res.dot(A(t, x).inverse() * res);
        }
    }
    out.objective = std::sqrt(std::max(0.0, obj2));

    out.dist_unconstrained = interpolate_best_flux(flux_space, A, p, quad).distance;
    const DgField proj_div = l2_project(mesh, k, pointwise(div_p), quad);
    double osc2 = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double detJ = mesh.det_jacobian(t);
        const double hT = mesh.h(t);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 ref = quad.ref_point(q);
            const double d = div_p(mesh.map_to_physical(t, ref)) - proj_div.eval(t, ref);
            osc2 += quad.points()[q].w * detJ * hT * hT * d * d;
        }
    }
    out.osc_div = std::sqrt(osc2);

    const double denom = out.dist_unconstrained + out.osc_div;
    out.ratio = denom > 1e-15 ? out.objective / denom
                              : (out.objective < 1e-12 ? 0.0
                                                       : std::numeric_limits<double>::infinity());
    return out;
}

namespace {

struct Lemma4Terms {
    double lhs;
    double div_norm;
    double identity_residual;
    double field_scale;
};

// lhs = || tau - Pi_k tau ||_{L2(T)} with the componentwise projection onto
// P_k(T)^2, plus the pointwise defect of the RT identity
// (2+k)(1-Pi_k)tau = (1-Pi_k)((div tau)(x - c)).
Lemma4Terms lemma4_terms(const FeSpace& space, int element, const Eigen::VectorXd& local_coeffs,
                         int k) {
    const Triangulation& mesh = space.mesh();
    const auto& quad = Quadrature::triangle_degree6();
    const auto basis = space.evaluate_at_quadrature(element, quad);
    const int nloc = space.local_dof_count();
    if (local_coeffs.size() != nloc) throw Error("lemma4: local coefficient size mismatch");

    const int ndg = DgField::nloc(k);
    const double detJ = mesh.det_jacobian(element);
    const Vec2 c = mesh.centroid(element);

    // values of tau, div tau and w = (div tau)(x - c) at quadrature points
    std::vector<Vec2> tau(quad.size()), wfield(quad.size());
    std::vector<double> dtau(quad.size());
    Eigen::MatrixXd chi(ndg, quad.size());
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const Vec2 ref = quad.ref_point(q);
        tau[q] = basis.values[q] * local_coeffs;
        dtau[q] = basis.divs.col(q).dot(local_coeffs);
        wfield[q] = dtau[q] * (mesh.map_to_physical(element, ref) - c);
        if (k == 0)
            chi.col(q) << 1.0;
        else
            chi.col(q) << 1.0, ref.x(), ref.y();
    }

    Eigen::MatrixXd Gref = Eigen::MatrixXd::Zero(ndg, ndg);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ndg, 4);  // tau_x tau_y w_x w_y
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const double w = quad.points()[q].w;
        Gref += w * chi.col(q) * chi.col(q).transpose();
        rhs.col(0) += w * tau[q].x() * chi.col(q);
        rhs.col(1) += w * tau[q].y() * chi.col(q);
        rhs.col(2) += w * wfield[q].x() * chi.col(q);
        rhs.col(3) += w * wfield[q].y() * chi.col(q);
    }
    const Eigen::MatrixXd proj = Eigen::LLT<Eigen::MatrixXd>(Gref).solve(rhs);

    Lemma4Terms out{0.0, 0.0, 0.0, 0.0};
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const double w = quad.points()[q].w * detJ;
        const Vec2 ptau(proj.col(0).dot(chi.col(q)), proj.col(1).dot(chi.col(q)));
        const Vec2 pw(proj.col(2).dot(chi.col(q)), proj.col(3).dot(chi.col(q)));
        const Vec2 dev = tau[q] - ptau;
        out.lhs += w * dev.squaredNorm();
        out.div_norm += w * dtau[q] * dtau[q];
        out.field_scale = std::max(out.field_scale, tau[q].norm());
        const Vec2 id_res = (2.0 + k) * dev - (wfield[q] - pw);
        out.identity_residual = std::max(out.identity_residual, id_res.norm());
    }
    out.lhs = std::sqrt(std::max(0.0, out.lhs));
    out.div_norm = std::sqrt(std::max(0.0, out.div_norm));
    out.identity_residual /= std::max(1.0, out.field_scale);
    return out;
}

}  // namespace

Lemma4Result verify_lemma4(const FeSpace& space, int element, const Eigen::VectorXd& local_coeffs,
                           int projection_degree) {
    const int k = projection_degree >= 0 ? projection_degree : space.pairing_degree();
    const auto terms = lemma4_terms(space, element, local_coeffs, k);
    Lemma4Result out;
    out.lhs = terms.lhs;
    out.rhs = 2.0 / (3.0 * (2.0 + k)) * space.mesh().h(element) * terms.div_norm;
    out.identity_residual = terms.identity_residual;
    if (out.rhs > 0.0)
        out.ratio = out.lhs / out.rhs;
    else
        out.ratio = out.lhs <= 1e-13 * std::max(1.0, terms.field_scale)
                        ? 0.0
                        : std::numeric_limits<double>::infinity();
    return out;
}

BdmSearchResult bdm_counterexample_search(const FeSpace& space, int element, int trials,
                                          std::uint64_t seed, int projection_degree) {
    const int k = projection_degree >= 0 ? projection_degree : space.pairing_degree();
    BdmSearchResult out;
    Rng rng(seed);
    for (int trial = 0; trial < trials; ++trial) {
        Eigen::VectorXd c(space.local_dof_count());
        for (int j = 0; j < c.size(); ++j) c(j) = rng.normal();
        const Lemma4Result r = verify_lemma4(space, element, c, k);
        out.best_ratio = std::max(out.best_ratio, r.ratio);
    }

    if (space.kind() == SpaceKind::BDM) {
        // divergence-free rotation field; lies in P_1^2 = BDM_1 but has a
        // nonzero component orthogonal to P_0^2
        const Vec2 c0 = space.mesh().centroid(element);
        const Eigen::VectorXd wc = interpolate_dofs(
            space, [&](const Vec2& x) { return Vec2(-(x.y() - c0.y()), x.x() - c0.x()); });
        Eigen::VectorXd local(space.local_dof_count());
        const auto dofs = space.element_dofs(element);
        for (int j = 0; j < local.size(); ++j) local(j) = wc(dofs[j].global);
        const Lemma4Result r = verify_lemma4(space, element, local, k);
        const double h = space.mesh().h(element);
        if (r.lhs > 1e-12 * h && r.rhs <= 1e-12 * h) {
            out.witness_found = true;
            out.witness_lhs = r.lhs;
            out.witness_div_norm = r.rhs;
            out.best_ratio = std::numeric_limits<double>::infinity();
        }
    }
    return out;
}

DualCheckResult discrete_dual_check(const AssembledSystem& sys, const Eigen::VectorXd& x_h,
                                    double beta_h) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.B.transpose());
    if (!(lu.rcond() > 1e-14)) throw Error("discrete_dual_check: B^T numerically singular");
    const Eigen::VectorXd rhs = sys.M_H * x_h;
    Eigen::VectorXd y = lu.solve(rhs);
    y += lu.solve(rhs - sys.B.transpose() * y);
    DualCheckResult out;
    out.y = y;
    out.y_norm_H = std::sqrt(y.dot(sys.M_H * y));
    out.norm_ratio = out.y_norm_H * beta_h;
    return out;
}

}  // namespace femlab
