#ifndef FEMLAB_FE_SPACE_HPP
#define FEMLAB_FE_SPACE_HPP

#include <functional>
#include <span>
#include <vector>

#include "femlab/coefficients.hpp"
#include "femlab/mesh.hpp"
#include "femlab/quadrature.hpp"

namespace femlab {

enum class SpaceKind { RT, BDM, DG };

std::string to_string(SpaceKind k);

/// Shape functions on the reference triangle (0,0),(1,0),(0,1).
///
/// RT_k = P_k^2 + x * (homogeneous P_k), BDM_k = P_k^2. Degrees of freedom
/// are edge moments of the normal trace against Legendre polynomials on the
/// edge (constant and, for k=1 spaces, linear), plus two interior moments
/// against constant vectors for RT_1. The shape functions are recovered by
/// inverting the dof-by-monomial matrix. DG spaces are plain monomials
/// {1} and {1, x, y}; they carry no continuity, so no dual basis is needed.
class ReferenceBasis {
public:
    ReferenceBasis(SpaceKind kind, int degree);

    int dim() const { return n_dofs_; }
    bool vector_valued() const { return kind_ != SpaceKind::DG; }
    SpaceKind kind() const { return kind_; }
    int degree() const { return degree_; }

    /// vector spaces: values is 2 x dim, divs is dim
    void evaluate(const Vec2& p, Eigen::Matrix2Xd& values, Eigen::VectorXd& divs) const;
    /// DG spaces
    Eigen::VectorXd evaluate_scalar(const Vec2& p) const;

private:
    SpaceKind kind_;
    int degree_;
    int n_dofs_;
    Eigen::MatrixXd coeff_;  // n_monomials x n_dofs (vector spaces)
};

struct LocalDof {
    int global = -1;
    double sign = 1.0;
};

/// A discrete space over a triangulation: RT_k or BDM_k (H(div)-conforming
/// via the contravariant Piola transform and globally oriented edge dofs)
/// or discontinuous P_k. Immutable after construction.
class FeSpace {
public:
    FeSpace(const Triangulation& mesh, SpaceKind kind, int degree);

    const Triangulation& mesh() const { return *mesh_; }
    SpaceKind kind() const { return kind_; }
    int degree() const { return degree_; }
    bool vector_valued() const { return kind_ != SpaceKind::DG; }

    int global_dof_count() const { return n_global_; }
    int local_dof_count() const { return ref_.dim(); }
    std::span<const LocalDof> element_dofs(int t) const {
        return {dofs_.data() + static_cast<std::size_t>(t) * ref_.dim(),
                static_cast<std::size_t>(ref_.dim())};
    }

    /// Degree of the discontinuous scalar space this flux space pairs with
    /// (the image of the divergence): RT_k -> k, BDM_k -> k-1. DG spaces
    /// return their own degree.
    int pairing_degree() const;

    const ReferenceBasis& reference_basis() const { return ref_; }

    /// Physical basis on element t at arbitrary reference points. Vector
    /// spaces are mapped by the contravariant Piola transform
    /// (value (1/detJ) J v, divergence (1/detJ) div v), scalar spaces by
    /// composition with the affine map. Dof orientation signs are applied,
    /// so column j is the restriction of the global basis function
    /// element_dofs(t)[j].global.
    struct Evaluation {
        std::vector<Eigen::Matrix2Xd> values;  // per point: 2 x nloc
        Eigen::MatrixXd divs;                  // nloc x npts
        Eigen::MatrixXd scalars;               // nloc x npts
    };
    Evaluation evaluate(int t, std::span<const Vec2> ref_points) const;

    /// evaluate() at the volume quadrature points (cached reference values)
    Evaluation evaluate_at_quadrature(int t, const Quadrature& quad) const;

private:
    void build_dof_map();

    const Triangulation* mesh_;
    SpaceKind kind_;
    int degree_;
    ReferenceBasis ref_;
    int n_global_ = 0;
    std::vector<LocalDof> dofs_;  // n_triangles * nloc

    // reference basis values cached at the degree-6 rule's points
    std::vector<Eigen::Matrix2Xd> qp_values_;
    Eigen::MatrixXd qp_divs_;
    Eigen::MatrixXd qp_scalars_;
};

/// value/divergence samples of a flux-space FE function on one element
struct FluxValues {
    std::vector<Vec2> value;
    std::vector<double> div;
};
FluxValues eval_flux(const FeSpace& space, const Eigen::VectorXd& global_coeffs, int t,
                     std::span<const Vec2> ref_points);
std::vector<double> eval_scalar(const FeSpace& space, const Eigen::VectorXd& global_coeffs, int t,
                                std::span<const Vec2> ref_points);

/// Canonical dof interpolation: applies the global dof functionals (edge
/// moments with the mesh's fixed edge normals and directions, interior
/// moments for RT_1) to an analytic field.
Eigen::VectorXd interpolate_dofs(const FeSpace& space, const std::function<Vec2(const Vec2&)>& f);

/// Elementwise polynomial data: coefficients of the DG monomial basis
/// {1} (k=0) or {1,x,y} (k=1) per element; vector fields store the two
/// components in consecutive blocks.
struct DgField {
    int degree = 0;
    bool vector = false;
    Eigen::MatrixXd coef;  // n_elements x nloc, or n_elements x 2*nloc

    double eval(int t, const Vec2& ref) const;
    Vec2 eval_vec(int t, const Vec2& ref) const;
    static int nloc(int degree) { return (degree + 1) * (degree + 2) / 2; }
};

using ElementScalarFn = std::function<double(int t, const Vec2& ref, const Vec2& x)>;
using ElementVectorFn = std::function<Vec2(int t, const Vec2& ref, const Vec2& x)>;

/// Elementwise L2 projection onto P_k; exact for polynomial integrands
/// within the quadrature degree, reproduces P_k.
DgField l2_project(const Triangulation& mesh, int k, const ElementScalarFn& f,
                   const Quadrature& quad);
DgField l2_project_vector(const Triangulation& mesh, int k, const ElementVectorFn& f,
                          const Quadrature& quad);

inline ElementScalarFn pointwise(std::function<double(const Vec2&)> f) {
    return [f = std::move(f)](int, const Vec2&, const Vec2& x) { return f(x); };
}
inline ElementVectorFn pointwise_vec(std::function<Vec2(const Vec2&)> f) {
    return [f = std::move(f)](int, const Vec2&, const Vec2& x) { return f(x); };
}

/// Global minimizer of || sigma - tau_h ||_{A^-1} over the flux space
/// (weighted normal equations); `distance` is the attained minimum,
/// evaluated by quadrature of the pointwise residual.
struct BestFluxResult {
    Eigen::VectorXd coefficients;
    double distance = 0.0;
};
BestFluxResult interpolate_best_flux(const FeSpace& flux_space, const MatrixField& A,
                                     const std::function<Vec2(const Vec2&)>& sigma,
                                     const Quadrature& quad);

}  // namespace femlab

#endif
