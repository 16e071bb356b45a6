#ifndef FEMLAB_ANALYSIS_HPP
#define FEMLAB_ANALYSIS_HPP

#include <cstdint>

#include "femlab/assembly.hpp"

namespace femlab {

struct StabilityReport {
    int mesh_level = -1;
    double h_max = 0.0;
    double beta_h = 0.0;
    Formulation formulation = Formulation::Conservative;
    double eigenvalue_residual = 0.0;
};

struct InfSupResult {
    StabilityReport report;
    /// trial vector attaining the inf, normalized to ||x||_{M_H} = 1
    Eigen::VectorXd minimizer;
};

/// Discrete inf-sup constant beta_h = smallest singular value of
/// L^-1 B L^-T for the Cholesky factor M_H = L L^T, computed as the square
/// root of the smallest eigenvalue of the whitened normal matrix W^T W
/// (clamped at zero within rounding).
InfSupResult compute_inf_sup(const AssembledSystem& sys);

/// Solves B x = rhs (rows indexed by test functions). Performs one step of
/// iterative refinement; throws with a condition estimate when B is
/// numerically singular or the relative residual stays above 1e-11.
Eigen::VectorXd solve_mixed(const AssembledSystem& sys);

/// lambda_max / lambda_min of an SPD matrix
double spd_condition(const Eigen::MatrixXd& M);

struct ErrorReport {
    double flux_error = 0.0;    // ||sigma - sigma_h||_{A^-1}
    double scalar_error = 0.0;  // ||u - u_h||
    double best_flux = 0.0;     // dist(sigma, M_k) in the A^-1 norm
    double proj_error_u = 0.0;  // ||u - Pi_k u||
    double osc_div = 0.0;       // ||h_T (1 - Pi_k) div sigma||
    double osc_u = 0.0;         // ||h_T (u - Pi_k u)||
    double h_max = 0.0;
};

/// All functionals by quadrature; the oscillation terms carry the
/// per-element h_T inside the norm. Pi_k uses the scalar space's degree.
ErrorReport compute_errors(const Eigen::VectorXd& x_h, const ManufacturedProblem& exact,
                           const FeSpace& flux_space, const FeSpace& scalar_space,
                           const CoefficientSet& coeffs, const Quadrature& quad);

struct ConstrainedProjectionResult {
    Eigen::VectorXd coefficients;
    double objective = 0.0;            // ||p - p_h||_{A^-1}
    double constraint_residual = 0.0;  // coefficient-level div p_h vs Pi_k div p
    double dist_unconstrained = 0.0;   // dist(p, M_k)
    double osc_div = 0.0;              // ||h_T (1 - Pi_k) div p||
    double ratio = 0.0;                // objective / (dist + osc)
};

/// Minimizer of ||p - p_h||_{A^-1} subject to div p_h = Pi_k div p
/// (k = the flux space's pairing degree), via the Schur complement of the
/// KKT system. The constraint holds at coefficient level.
ConstrainedProjectionResult constrained_flux_projection(
    const std::function<Vec2(const Vec2&)>& p, const std::function<double(const Vec2&)>& div_p,
    const FeSpace& flux_space, const MatrixField& A, const Quadrature& quad);

struct Lemma4Result {
    double lhs = 0.0;    // ||tau - Pi_k tau||
    double rhs = 0.0;    // (n/((n+1)(n+k))) ||h_T div tau||, n = 2
    double ratio = 0.0;  // lhs / rhs (infinite when rhs vanishes but lhs does not)
    /// pointwise residual of (n+k)(1-Pi_k)tau = (1-Pi_k)((div tau)(x-c)),
    /// scaled; only meaningful for RT spaces
    double identity_residual = 0.0;
};

/// Evaluates the RT inner-approximation bound on one element for the field
/// with the given local dof values. `projection_degree` < 0 means the
/// space's pairing degree.
Lemma4Result verify_lemma4(const FeSpace& space, int element, const Eigen::VectorXd& local_coeffs,
                           int projection_degree = -1);

struct BdmSearchResult {
    double best_ratio = 0.0;
    bool witness_found = false;
    double witness_lhs = 0.0;       // ||tau - Pi_k tau|| of the witness
    double witness_div_norm = 0.0;  // ||div tau|| of the witness (zero)
};

/// Random sweep over coefficient vectors of `space` on one element against
/// the RT bound at `projection_degree` (< 0: pairing degree). For BDM
/// spaces a deterministic divergence-free witness with nonzero projection
/// defect is constructed as well; it violates the bound outright.
BdmSearchResult bdm_counterexample_search(const FeSpace& space, int element, int trials,
                                          std::uint64_t seed, int projection_degree = -1);

struct DualCheckResult {
    Eigen::VectorXd y;
    double y_norm_H = 0.0;
    double norm_ratio = 0.0;  // ||y||_H * beta_h, <= 1 up to rounding when ||x||_H = 1
};

/// Solves the discrete dual problem <x_h, .>_H = b(., y_h), i.e.
/// B^T y = M_H x.
DualCheckResult discrete_dual_check(const AssembledSystem& sys, const Eigen::VectorXd& x_h,
                                    double beta_h);

}  // namespace femlab

#endif
