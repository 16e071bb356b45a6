#include "femlab/fe_space.hpp"

#include <array>
#include <cmath>

namespace femlab {

namespace {

// reference triangle corners and edge data; edge i is opposite vertex i,
// oriented from vertex (i+1)%3 to vertex (i+2)%3, normals outward
const std::array<Vec2, 3> kRefVertex = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};

struct RefEdge {
    Vec2 start, dir, normal;
    double length;
};

std::array<RefEdge, 3> ref_edges() {
    std::array<RefEdge, 3> e;
    for (int i = 0; i < 3; ++i) {
        const Vec2 a = kRefVertex[(i + 1) % 3];
        const Vec2 b = kRefVertex[(i + 2) % 3];
        const Vec2 d = b - a;
        e[i] = RefEdge{a, d, Vec2(d.y(), -d.x()).normalized(), d.norm()};
    }
    return e;
}

int monomial_count(SpaceKind kind, int degree) {
    if (kind == SpaceKind::RT) return degree == 0 ? 3 : 8;
    if (kind == SpaceKind::BDM) return 6;
    return (degree + 1) * (degree + 2) / 2;
}

// vector monomials spanning RT_k / BDM_k on the reference triangle
void eval_monomials(SpaceKind kind, int degree, const Vec2& p, Eigen::Matrix2Xd& vals,
                    Eigen::VectorXd& divs) {
    const double x = p.x(), y = p.y();
    const int n = monomial_count(kind, degree);
    vals.resize(2, n);
    divs.resize(n);
    if (kind == SpaceKind::RT && degree == 0) {
        vals.col(0) << 1, 0;
        vals.col(1) << 0, 1;
        vals.col(2) << x, y;
        divs << 0, 0, 2;
        return;
    }
    // P_1^2 block shared by BDM_1 and RT_1
    vals.col(0) << 1, 0;
    vals.col(1) << x, 0;
    vals.col(2) << y, 0;
    vals.col(3) << 0, 1;
    vals.col(4) << 0, x;
    vals.col(5) << 0, y;
    divs.head(6) << 0, 1, 0, 0, 0, 1;
    if (kind == SpaceKind::RT) {
        vals.col(6) << x * x, x * y;
        vals.col(7) << x * y, y * y;
        divs(6) = 3 * x;
        divs(7) = 3 * y;
    }
}

}  // namespace

std::string to_string(SpaceKind k) {
    switch (k) {
        case SpaceKind::RT: return "RT";
        case SpaceKind::BDM: return "BDM";
        case SpaceKind::DG: return "DG";
    }
    return "?";
}

ReferenceBasis::ReferenceBasis(SpaceKind kind, int degree) : kind_(kind), degree_(degree) {
    if (degree < 0 || degree > 1) throw Error("ReferenceBasis: only degrees 0 and 1 are supported");
    if (kind == SpaceKind::BDM && degree < 1) throw Error("ReferenceBasis: BDM requires degree >= 1");

    if (kind == SpaceKind::DG) {
        n_dofs_ = (degree + 1) * (degree + 2) / 2;
        return;
    }

    const int n = monomial_count(kind, degree);
    n_dofs_ = n;
    const int moments_per_edge = (degree == 0 && kind == SpaceKind::RT) ? 1 : 2;

    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n);
    const auto edges = ref_edges();
    Eigen::Matrix2Xd mv;
    Eigen::VectorXd md;
    for (int i = 0; i < 3; ++i) {
        for (const auto& g : EdgeRule::gauss4()) {
            const Vec2 p = edges[i].start + g.t * edges[i].dir;
            eval_monomials(kind, degree, p, mv, md);
            const Eigen::RowVectorXd ndotv = edges[i].normal.transpose() * mv;
            const double common = g.w * edges[i].length;
            V.row(moments_per_edge * i) += common * ndotv;
            if (moments_per_edge == 2)
                V.row(moments_per_edge * i + 1) += common * (2.0 * g.t - 1.0) * ndotv;
        }
    }
    if (kind == SpaceKind::RT && degree == 1) {
        const auto& quad = Quadrature::triangle_degree6();
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const auto& pt = quad.points()[q];
            eval_monomials(kind, degree, Vec2(pt.l2, pt.l3), mv, md);
            V.row(6) += pt.w * mv.row(0);
            V.row(7) += pt.w * mv.row(1);
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    if (lu.rank() < n) throw Error("ReferenceBasis: dof set is not unisolvent");
    coeff_ = lu.inverse();
}

void ReferenceBasis::evaluate(const Vec2& p, Eigen::Matrix2Xd& values, Eigen::VectorXd& divs) const {
    if (kind_ == SpaceKind::DG) throw Error("ReferenceBasis::evaluate: scalar space");
    Eigen::Matrix2Xd mv;
    Eigen::VectorXd md;
    eval_monomials(kind_, degree_, p, mv, md);
    values = mv * coeff_;
    divs = coeff_.transpose() * md;
}

Eigen::VectorXd ReferenceBasis::evaluate_scalar(const Vec2& p) const {
    if (kind_ != SpaceKind::DG) throw Error("ReferenceBasis::evaluate_scalar: vector space");
    Eigen::VectorXd v(n_dofs_);
    if (degree_ == 0)
        v << 1.0;
    else
        v << 1.0, p.x(), p.y();
    return v;
}

FeSpace::FeSpace(const Triangulation& mesh, SpaceKind kind, int degree)
    : mesh_(&mesh), kind_(kind), degree_(degree), ref_(kind, degree) {
    build_dof_map();

    const auto& quad = Quadrature::triangle_degree6();
    const int nq = static_cast<int>(quad.size());
    if (vector_valued()) {
        qp_values_.resize(nq);
        qp_divs_.resize(ref_.dim(), nq);
        Eigen::VectorXd d;
        for (int q = 0; q < nq; ++q) {
            ref_.evaluate(quad.ref_point(q), qp_values_[q], d);
            qp_divs_.col(q) = d;
        }
    } else {
        qp_scalars_.resize(ref_.dim(), nq);
        for (int q = 0; q < nq; ++q) qp_scalars_.col(q) = ref_.evaluate_scalar(quad.ref_point(q));
    }
}

void FeSpace::build_dof_map() {
    const int nt = mesh_->n_triangles();
    const int ne = mesh_->n_edges();
    const int nloc = ref_.dim();
    dofs_.resize(static_cast<std::size_t>(nt) * nloc);

    if (kind_ == SpaceKind::DG) {
        n_global_ = nloc * nt;
        for (int t = 0; t < nt; ++t)
            for (int q = 0; q < nloc; ++q)
                dofs_[static_cast<std::size_t>(t) * nloc + q] = LocalDof{t * nloc + q, 1.0};
        return;
    }

    const int moments_per_edge = (kind_ == SpaceKind::RT && degree_ == 0) ? 1 : 2;
    n_global_ = moments_per_edge * ne;
    if (kind_ == SpaceKind::RT && degree_ == 1) n_global_ += 2 * nt;

    for (int t = 0; t < nt; ++t) {
        LocalDof* ld = dofs_.data() + static_cast<std::size_t>(t) * nloc;
        for (int i = 0; i < 3; ++i) {
            const TriEdge& te = mesh_->triangle_edges(t)[i];
            // zeroth moment flips with the normal; the first moment flips
            // with both normal and direction, which cancel
            const double s = te.is_plus ? 1.0 : -1.0;
            ld[moments_per_edge * i] = LocalDof{moments_per_edge * te.edge, s};
            if (moments_per_edge == 2)
                ld[moments_per_edge * i + 1] = LocalDof{moments_per_edge * te.edge + 1, 1.0};
        }
        if (kind_ == SpaceKind::RT && degree_ == 1) {
            ld[6] = LocalDof{2 * ne + 2 * t, 1.0};
            ld[7] = LocalDof{2 * ne + 2 * t + 1, 1.0};
        }
    }
}

int FeSpace::pairing_degree() const {
    if (kind_ == SpaceKind::BDM) return degree_ - 1;
    return degree_;
}

FeSpace::Evaluation FeSpace::evaluate(int t, std::span<const Vec2> ref_points) const {
    if (t < 0 || t >= mesh_->n_triangles())
        throw Error("FeSpace::evaluate: element index out of range");
    Evaluation out;
    const int nloc = ref_.dim();
    const int np = static_cast<int>(ref_points.size());
    if (!vector_valued()) {
        out.scalars.resize(nloc, np);
        for (int p = 0; p < np; ++p) out.scalars.col(p) = ref_.evaluate_scalar(ref_points[p]);
        return out;
    }
    const Mat2 J = mesh_->jacobian(t);
    const double detJ = mesh_->det_jacobian(t);
    if (!(detJ > 0.0)) throw Error("FeSpace::evaluate: degenerate element Jacobian");
    const auto dofs = element_dofs(t);
    out.values.resize(np);
    out.divs.resize(nloc, np);
    Eigen::Matrix2Xd v;
    Eigen::VectorXd d;
    for (int p = 0; p < np; ++p) {
        ref_.evaluate(ref_points[p], v, d);
        out.values[p] = (J * v) / detJ;
        out.divs.col(p) = d / detJ;
        for (int j = 0; j < nloc; ++j) {
            out.values[p].col(j) *= dofs[j].sign;
            out.divs(j, p) *= dofs[j].sign;
        }
    }
    return out;
}

FeSpace::Evaluation FeSpace::evaluate_at_quadrature(int t, const Quadrature& quad) const {
    if (t < 0 || t >= mesh_->n_triangles())
        throw Error("FeSpace::evaluate_at_quadrature: element index out of range");
    if (&quad != &Quadrature::triangle_degree6()) {
        // cache only covers the standard rule; fall back to the generic path
        std::vector<Vec2> pts(quad.size());
        for (std::size_t q = 0; q < quad.size(); ++q) pts[q] = quad.ref_point(q);
        return evaluate(t, pts);
    }
    Evaluation out;
    const int nloc = ref_.dim();
    const int nq = static_cast<int>(quad.size());
    if (!vector_valued()) {
        out.scalars = qp_scalars_;
        return out;
    }
    const Mat2 J = mesh_->jacobian(t);
    const double detJ = mesh_->det_jacobian(t);
    const auto dofs = element_dofs(t);
    out.values.resize(nq);
    out.divs.resize(nloc, nq);
    for (int q = 0; q < nq; ++q) {
        out.values[q] = (J * qp_values_[q]) / detJ;
        out.divs.col(q) = qp_divs_.col(q) / detJ;
        for (int j = 0; j < nloc; ++j) {
            out.values[q].col(j) *= dofs[j].sign;
            out.divs(j, q) *= dofs[j].sign;
        }
    }
    return out;
}

FluxValues eval_flux(const FeSpace& space, const Eigen::VectorXd& global_coeffs, int t,
                     std::span<const Vec2> ref_points) {
    if (!space.vector_valued()) throw Error("eval_flux: scalar space");
    const auto basis = space.evaluate(t, ref_points);
    const auto dofs = space.element_dofs(t);
    Eigen::VectorXd local(space.local_dof_count());
    for (int j = 0; j < space.local_dof_count(); ++j) local(j) = global_coeffs(dofs[j].global);
    FluxValues out;
    out.value.resize(ref_points.size());
    out.div.resize(ref_points.size());
    for (std::size_t p = 0; p < ref_points.size(); ++p) {
        out.value[p] = basis.values[p] * local;
        out.div[p] = basis.divs.col(p).dot(local);
    }
    return out;
}

std::vector<double> eval_scalar(const FeSpace& space, const Eigen::VectorXd& global_coeffs, int t,
                                std::span<const Vec2> ref_points) {
    if (space.vector_valued()) throw Error("eval_scalar: vector space");
    const auto basis = space.evaluate(t, ref_points);
    const auto dofs = space.element_dofs(t);
    Eigen::VectorXd local(space.local_dof_count());
    for (int j = 0; j < space.local_dof_count(); ++j) local(j) = global_coeffs(dofs[j].global);
    std::vector<double> out(ref_points.size());
    for (std::size_t p = 0; p < ref_points.size(); ++p) out[p] = basis.scalars.col(p).dot(local);
    return out;
}

Eigen::VectorXd interpolate_dofs(const FeSpace& space, const std::function<Vec2(const Vec2&)>& f) {
    if (!space.vector_valued()) throw Error("interpolate_dofs: scalar space");
    const Triangulation& mesh = space.mesh();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(space.global_dof_count());
    const int moments = (space.kind() == SpaceKind::RT && space.degree() == 0) ? 1 : 2;

    for (int e = 0; e < mesh.n_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        const Vec2 a = mesh.vertices()[edge.a];
        const Vec2 d = mesh.vertices()[edge.b] - a;
        const double len = d.norm();
        double m0 = 0.0, m1 = 0.0;
        for (const auto& gn : EdgeRule::gauss4()) {
            const double fn = f(a + gn.t * d).dot(edge.normal);
            m0 += gn.w * len * fn;
            m1 += gn.w * len * (2.0 * gn.t - 1.0) * fn;
        }
        g(moments * e) = m0;
        if (moments == 2) g(moments * e + 1) = m1;
    }

    if (space.kind() == SpaceKind::RT && space.degree() == 1) {
        // interior moments do not commute with the Piola map: the functional
        // dual to the mapped interior shapes is J^-1 * int_T v dx
        const auto& quad = Quadrature::triangle_degree6();
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const double detJ = mesh.det_jacobian(t);
            Vec2 m = Vec2::Zero();
            for (std::size_t q = 0; q < quad.size(); ++q)
                m += quad.points()[q].w * detJ * f(mesh.map_to_physical(t, quad.ref_point(q)));
            m = mesh.jacobian(t).inverse() * m;
            g(2 * mesh.n_edges() + 2 * t) = m.x();
            g(2 * mesh.n_edges() + 2 * t + 1) = m.y();
        }
    }
    return g;
}

namespace {

Eigen::VectorXd dg_monomials(int degree, const Vec2& ref) {
    Eigen::VectorXd v(DgField::nloc(degree));
    if (degree == 0)
        v << 1.0;
    else
        v << 1.0, ref.x(), ref.y();
    return v;
}

// reference Gram of the DG monomials, shared by every element up to detJ
Eigen::MatrixXd dg_reference_gram(int degree, const Quadrature& quad) {
    const int n = DgField::nloc(degree);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const Eigen::VectorXd chi = dg_monomials(degree, quad.ref_point(q));
        G += quad.points()[q].w * chi * chi.transpose();
    }
    return G;
}

}  // namespace

double DgField::eval(int t, const Vec2& ref) const {
    return coef.row(t).head(nloc(degree)).dot(dg_monomials(degree, ref));
}

Vec2 DgField::eval_vec(int t, const Vec2& ref) const {
    const int n = nloc(degree);
    const Eigen::VectorXd chi = dg_monomials(degree, ref);
    return Vec2(coef.row(t).segment(0, n).dot(chi), coef.row(t).segment(n, n).dot(chi));
}

DgField l2_project(const Triangulation& mesh, int k, const ElementScalarFn& f,
                   const Quadrature& quad) {
    if (k < 0 || k > 1) throw Error("l2_project: only degrees 0 and 1 are supported");
    const int n = DgField::nloc(k);
    DgField out;
    out.degree = k;
    out.coef.resize(mesh.n_triangles(), n);
    const Eigen::LLT<Eigen::MatrixXd> gram(dg_reference_gram(k, quad));
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 ref = quad.ref_point(q);
            rhs += quad.points()[q].w * f(t, ref, mesh.map_to_physical(t, ref)) *
                   dg_monomials(k, ref);
        }
        out.coef.row(t) = gram.solve(rhs).transpose();  // detJ cancels
    }
    return out;
}

DgField l2_project_vector(const Triangulation& mesh, int k, const ElementVectorFn& f,
                          const Quadrature& quad) {
    if (k < 0 || k > 1) throw Error("l2_project_vector: only degrees 0 and 1 are supported");
    const int n = DgField::nloc(k);
    DgField out;
    out.degree = k;
    out.vector = true;
    out.coef.resize(mesh.n_triangles(), 2 * n);
    const Eigen::LLT<Eigen::MatrixXd> gram(dg_reference_gram(k, quad));
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        Eigen::VectorXd rx = Eigen::VectorXd::Zero(n), ry = Eigen::VectorXd::Zero(n);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 ref = quad.ref_point(q);
            const Vec2 v = f(t, ref, mesh.map_to_physical(t, ref));
            const Eigen::VectorXd chi = quad.points()[q].w * dg_monomials(k, ref);
            rx += v.x() * chi;
            ry += v.y() * chi;
        }
        out.coef.row(t).segment(0, n) = gram.solve(rx).transpose();
        out.coef.row(t).segment(n, n) = gram.solve(ry).transpose();
    }
    return out;
}

BestFluxResult interpolate_best_flux(const FeSpace& flux_space, const MatrixField& A,
                                     const std::function<Vec2(const Vec2&)>& sigma,
                                     const Quadrature& quad) {
    if (!flux_space.vector_valued()) throw Error("interpolate_best_flux: flux space required");
    const Triangulation& mesh = flux_space.mesh();
    const int n = flux_space.global_dof_count();
    const int nloc = flux_space.local_dof_count();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);

    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto basis = flux_space.evaluate_at_quadrature(t, quad);
        const auto dofs = flux_space.element_dofs(t);
        const double detJ = mesh.det_jacobian(t);
        Eigen::MatrixXd Gl = Eigen::MatrixXd::Zero(nloc, nloc);
        Eigen::VectorXd rl = Eigen::VectorXd::Zero(nloc);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 ref = quad.ref_point(q);
            const Vec2 x = mesh.map_to_physical(t, ref);
            const Mat2 Ainv = A(t, x).inverse();
            const double w = quad.points()[q].w * detJ;
            const Eigen::Matrix2Xd Aphi = Ainv * basis.values[q];
            Gl += w * basis.values[q].transpose() * Aphi;
            rl += w * Aphi.transpose() * sigma(x);
        }
        for (int i = 0; i < nloc; ++i) {
            r(dofs[i].global) += rl(i);
            for (int j = 0; j < nloc; ++j) G(dofs[i].global, dofs[j].global) += Gl(i, j);
        }
    }

    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw Error("interpolate_best_flux: singular weighted Gram matrix");
    BestFluxResult out;
    out.coefficients = llt.solve(r);

    double dist2 = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto basis = flux_space.evaluate_at_quadrature(t, quad);
        const auto dofs = flux_space.element_dofs(t);
        Eigen::VectorXd local(nloc);
        for (int j = 0; j < nloc; ++j) local(j) = out.coefficients(dofs[j].global);
        const double detJ = mesh.det_jacobian(t);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec2 x = mesh.map_to_physical(t, quad.ref_point(q));
            const Vec2 res = sigma(x) - basis.values[q] * local;
            dist2 += quad.points()[q].w * detJ * res.dot(A(t, x).inverse() * res);
        }
    }
    out.distance = std::sqrt(std::max(0.0, dist2));
    return out;
}

}  // namespace femlab
