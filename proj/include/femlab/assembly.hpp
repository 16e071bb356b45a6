#ifndef FEMLAB_ASSEMBLY_HPP
#define FEMLAB_ASSEMBLY_HPP

#include <functional>
#include <string>

#include "femlab/fe_space.hpp"

namespace femlab {

/// Dense saddle-point system over the combined basis (flux dofs first,
/// scalar dofs after). B[i][j] = b(phi_j, psi_i) with trial phi_j and test
/// psi_i; M_H is the Gram of ||tau||_{A^-1}^2 + ||div tau||^2 + ||v||^2 and
/// M_L the Gram of the weighted L2 norm without the div term.
struct AssembledSystem {
    Eigen::MatrixXd B;
    Eigen::MatrixXd M_H;
    Eigen::MatrixXd M_L;
    Eigen::VectorXd rhs;
    Eigen::Index n_flux = 0;
    Eigen::Index n_scalar = 0;
    Formulation formulation = Formulation::Conservative;
    double h_max = 0.0;
    int mesh_level = -1;
    Eigen::Index size() const { return n_flux + n_scalar; }
};

/// Assembles all six terms of
///   b((sigma,u),(tau,v)) = (sigma,tau)_{A^-1} - (u,div tau) + (v,div sigma)
///                        + (u,b1.tau) - (v,b2.sigma) + (gamma u,v)
/// by elementwise quadrature, together with M_H, M_L. rhs is zero-initialized.
AssembledSystem assemble_b(const FeSpace& flux_space, const FeSpace& scalar_space,
                           const CoefficientSet& coeffs, const Quadrature& quad);

/// Load vector entries (f, v_i) over the scalar space only.
Eigen::VectorXd assemble_rhs(const FeSpace& scalar_space,
                             const std::function<double(const Vec2&)>& f, const Quadrature& quad);

/// Embeds the scalar-block load into sys.rhs (flux block zero).
void set_rhs(AssembledSystem& sys, const Eigen::VectorXd& scalar_load);

/// (A^-1 phi_j, phi_i) over the flux space
Eigen::MatrixXd assemble_flux_gram(const FeSpace& flux_space, const MatrixField& A,
                                   const Quadrature& quad);

/// (div phi_j, chi_q) with chi the DG monomial basis of degree k
Eigen::MatrixXd assemble_div_coupling(const FeSpace& flux_space, int k, const Quadrature& quad);

/// Smooth manufactured solution with closed-form derivatives.
struct ExactScalar {
    std::function<double(const Vec2&)> value;
    std::function<Vec2(const Vec2&)> grad;
    std::function<Mat2(const Vec2&)> hess;
};

/// u(x,y) = sin(pi x) sin(pi y)
ExactScalar exact_sinsin();
/// u(x,y) = x(1-x) y(1-y)
ExactScalar exact_bubble();

struct ManufacturedProblem {
    std::function<double(const Vec2&)> f;
    std::function<double(const Vec2&)> u;
    std::function<Vec2(const Vec2&)> grad_u;
    std::function<Vec2(const Vec2&)> sigma;
    std::function<double(const Vec2&)> div_sigma;
};

/// Right-hand side and exact flux for L_j u = f. Conservative:
/// sigma = -A grad u - u b, div sigma = f - gamma u. Divergence:
/// sigma = -A grad u, div sigma = f - b.grad u - gamma u. Requires
/// spatially constant A and b (gamma may vary).
ManufacturedProblem manufactured_problem(const ExactScalar& u, const CoefficientSet& coeffs);

/// Plain-text export in matrix-market coordinate format.
void write_matrix_market(const std::string& path, const Eigen::MatrixXd& M);

}  // namespace femlab

#endif
