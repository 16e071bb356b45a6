#ifndef FEMLAB_CONFIG_HPP
#define FEMLAB_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "femlab/coefficients.hpp"
#include "femlab/fe_space.hpp"

namespace femlab {

/// Mesh-independent description of a coefficient set; materialized per
/// refinement level (checkerboard fields are element-aligned lookups).
struct CoefficientSpec {
    enum class AKind { Identity, Diag, Checkerboard };
    AKind a_kind = AKind::Identity;
    double a11 = 1.0, a22 = 1.0;
    double cb_v1 = 1.0, cb_v2 = 1.0;
    int cb_blocks = 2;
    Vec2 b_const = Vec2::Zero();
    enum class GammaKind { Const, Lipschitz };  // lipschitz preset: 1 + x1
    GammaKind gamma_kind = GammaKind::Const;
    double gamma_const = 0.0;
    Formulation formulation = Formulation::Divergence;

    CoefficientSet materialize(const Triangulation& mesh) const;
    CoefficientSet materialize(const Triangulation& mesh, Formulation f) const;
};

enum class CampaignKind { Stability, Convergence, Lemma4, Duality, BestApprox };

std::string to_string(CampaignKind k);

struct SlopeWindow {
    bool enabled = false;
    double lo = 0.0, hi = 0.0;
};

struct Campaign {
    std::string name;
    CampaignKind kind = CampaignKind::Stability;
    int base_m = 2;
    int levels = 1;
    SpaceKind space_kind = SpaceKind::RT;
    int degree = 0;
    CoefficientSpec coeffs;
    std::string u_exact = "sinsin";  // sinsin | bubble
    std::string output;              // CSV path; empty = no file
    std::uint64_t seed = 42;
    int samples = 10000;          // lemma4
    double stability_tol = 0.2;   // consecutive relative change bound
    SlopeWindow flux_slope, scalar_slope, best_flux_slope, osc_div_slope, osc_u_slope;

    void validate() const;
};

struct Config {
    std::vector<Campaign> campaigns;
};

/// Plain-text key-value config, one [section] per campaign. Throws Error
/// with the offending line number on parse failures.
Config parse_config(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& origin);

}  // namespace femlab

#endif
