#ifndef FEMLAB_CAMPAIGN_HPP
#define FEMLAB_CAMPAIGN_HPP

#include <optional>

#include "femlab/analysis.hpp"
#include "femlab/config.hpp"

namespace femlab {

/// One CSV row; absent values print as empty cells. Schema:
/// campaign,level,h_max,n_dof,beta_h,flux_err,scalar_err,best_flux,osc_div,osc_u,runtime_s
struct CsvRow {
    std::string campaign;
    int level = 0;
    std::optional<double> h_max;
    std::optional<int> n_dof;
    std::optional<double> beta_h;
    std::optional<double> flux_err;
    std::optional<double> scalar_err;
    std::optional<double> best_flux;
    std::optional<double> osc_div;
    std::optional<double> osc_u;
    std::optional<double> runtime_s;
};

std::string csv_header();
std::string to_csv_line(const CsvRow& row);

struct CampaignResult {
    bool ok = true;
    std::vector<std::string> failures;  // per-level assertion failures
    std::vector<CsvRow> rows;
    std::string csv_text;  // header + rows, in level order
    std::string summary;   // human-readable report
};

/// Runs every level of the campaign (levels may execute in parallel, capped
/// by FEMLAB_MAX_WORKERS; rows are emitted in level order). runtime cells
/// are left empty unless `with_timings` is set, so that identical
/// config + seed reproduce byte-identical CSV output.
CampaignResult run_campaign(const Campaign& campaign, bool with_timings = false);

/// Parses the config, runs all campaigns (or only the duality ones),
/// writes CSV artifacts and prints summaries. Returns a process exit
/// status: 0 iff every campaign assertion passed.
int run_config_file(const std::string& path, bool with_timings = false,
                    bool duality_only = false);

/// least-squares slope of log(err) against log(h) over the last
/// min(3, n) samples
double fit_slope_last3(const std::vector<double>& h, const std::vector<double>& err);

struct Lemma4Sweep {
    double max_ratio = 0.0;
    double max_excess = 0.0;  // max over trials of lhs - rhs
    double max_identity_residual = 0.0;
    int trials = 0;
};

/// Seeded sweep of random RT_k coefficient vectors on random well-shaped
/// triangles against the degree-k bound.
Lemma4Sweep lemma4_sweep(int degree, int samples, std::uint64_t seed);

/// Random well-shaped triangle (bounded aspect, random position/scale),
/// as a one-element mesh.
Triangulation random_triangle(Rng& rng);

}  // namespace femlab

#endif
