#include "femlab/campaign.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

namespace femlab {

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_g12(*v) : ""; }

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int worker_cap(int levels) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("FEMLAB_MAX_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) cap = n;
    }
    return std::min(cap, levels);
}

ExactScalar exact_by_name(const std::string& name) {
    if (name == "sinsin") return exact_sinsin();
    if (name == "bubble") return exact_bubble();
    throw Error("unknown u_exact preset '" + name + "'");
}

struct LevelData {
    CsvRow row;
    std::vector<std::string> failures;
    double beta_cons = 0.0, beta_div = 0.0, duality_defect = 0.0;
    double gram_condition = 0.0;
};

void check_window(const SlopeWindow& w, const char* what, double slope,
                  std::vector<std::string>& failures) {
    if (!w.enabled) return;
    if (!(slope >= w.lo && slope <= w.hi)) {
        std::ostringstream os;
        os << what << " slope " << format_g12(slope) << " outside [" << format_g12(w.lo) << ","
           << format_g12(w.hi) << "]";
        failures.push_back(os.str());
    }
}

}  // namespace

std::string csv_header() {
    return "campaign,level,h_max,n_dof,beta_h,flux_err,scalar_err,best_flux,osc_div,osc_u,"
           "runtime_s";
}

std::string to_csv_line(const CsvRow& r) {
    std::ostringstream os;
    os << r.campaign << "," << r.level << "," << cell(r.h_max) << ","
       << (r.n_dof ? std::to_string(*r.n_dof) : "") << "," << cell(r.beta_h) << ","
       << cell(r.flux_err) << "," << cell(r.scalar_err) << "," << cell(r.best_flux) << ","
       << cell(r.osc_div) << "," << cell(r.osc_u) << "," << cell(r.runtime_s);
    return os.str();
}

double fit_slope_last3(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() != err.size() || h.size() < 2)
        throw Error("fit_slope_last3: need at least two samples");
    const std::size_t n = std::min<std::size_t>(3, h.size());
    const std::size_t off = h.size() - n;
    double mx = 0, my = 0;
    for (std::size_t i = off; i < h.size(); ++i) {
        if (!(h[i] > 0) || !(err[i] > 0)) return std::numeric_limits<double>::quiet_NaN();
        mx += std::log(h[i]);
        my += std::log(err[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = off; i < h.size(); ++i) {
        const double dx = std::log(h[i]) - mx;
        sxy += dx * (std::log(err[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

Triangulation random_triangle(Rng& rng) {
    for (;;) {
        const double scale = rng.uniform(0.05, 2.0);
        const double theta = rng.uniform(0.0, 2.0 * M_PI);
        const double phi = rng.uniform(M_PI / 6.0, 5.0 * M_PI / 6.0);
        const double r1 = rng.uniform(0.3, 1.2), r2 = rng.uniform(0.3, 1.2);
        const Vec2 v0(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        const Vec2 v1 = v0 + scale * r1 * Vec2(std::cos(theta), std::sin(theta));
        const Vec2 v2 = v0 + scale * r2 * Vec2(std::cos(theta + phi), std::sin(theta + phi));
        try {
            Triangulation tri({v0, v1, v2}, {{0, 1, 2}});
            if (tri.shape_regularity() < 8.0) return tri;
        } catch (const Error&) {
            // degenerate draw; resample
        }
    }
}

Lemma4Sweep lemma4_sweep(int degree, int samples, std::uint64_t seed) {
    if (degree < 0 || degree > 1) throw Error("lemma4_sweep: degree must be 0 or 1");
    Lemma4Sweep sweep;
    Rng rng(seed);
    for (int i = 0; i < samples; ++i) {
        const Triangulation tri = random_triangle(rng);
        const FeSpace rt(tri, SpaceKind::RT, degree);
        Eigen::VectorXd c(rt.local_dof_count());
        for (int j = 0; j < c.size(); ++j) c(j) = rng.normal();
        const Lemma4Result r = verify_lemma4(rt, 0, c);
        if (r.rhs > 0.0) sweep.max_ratio = std::max(sweep.max_ratio, r.ratio);
        sweep.max_excess = std::max(sweep.max_excess, r.lhs - r.rhs);
        sweep.max_identity_residual = std::max(sweep.max_identity_residual, r.identity_residual);
        ++sweep.trials;
    }
    return sweep;
}

namespace {

LevelData run_level(const Campaign& c, const Triangulation& mesh, int level, bool with_timings) {
    const auto t0 = std::chrono::steady_clock::now();
    LevelData out;
    out.row.campaign = c.name;
    out.row.level = level;
    out.row.h_max = mesh.h_max();

    const auto& quad = Quadrature::triangle_degree6();

    if (c.kind == CampaignKind::Lemma4) {
        const Lemma4Sweep sweep = lemma4_sweep(c.degree, c.samples, c.seed);
        out.row.h_max.reset();
        if (!(sweep.max_ratio <= 1.0 + 1e-10))
            out.failures.push_back("lemma4 max ratio " + format_g12(sweep.max_ratio) +
                                   " exceeds 1+1e-10");
        if (!(sweep.max_identity_residual <= 1e-12))
            out.failures.push_back("lemma4 identity residual " +
                                   format_g12(sweep.max_identity_residual) + " exceeds 1e-12");
        if (with_timings) out.row.runtime_s = elapsed_s(t0);
        return out;
    }

    const FeSpace flux(mesh, c.space_kind, c.degree);
    const FeSpace scalar(mesh, SpaceKind::DG, flux.pairing_degree());
    out.row.n_dof = flux.global_dof_count() + scalar.global_dof_count();

    switch (c.kind) {
        case CampaignKind::Stability: {
            const CoefficientSet coeffs = c.coeffs.materialize(mesh);
            AssembledSystem sys = assemble_b(flux, scalar, coeffs, quad);
            sys.mesh_level = level;
            const InfSupResult r = compute_inf_sup(sys);
            out.row.beta_h = r.report.beta_h;
            out.gram_condition = spd_condition(sys.M_H);
            if (!(r.report.beta_h > 0.0)) out.failures.push_back("beta_h is not positive");
            break;
        }
        case CampaignKind::Duality: {
            const CoefficientSet cons = c.coeffs.materialize(mesh, Formulation::Conservative);
            const CoefficientSet divf = c.coeffs.materialize(mesh, Formulation::Divergence);
            AssembledSystem sys_c = assemble_b(flux, scalar, cons, quad);
            AssembledSystem sys_d = assemble_b(flux, scalar, divf, quad);
            sys_c.mesh_level = sys_d.mesh_level = level;

            // B_div = S B_cons^T S with S = diag(+I_flux, -I_scalar)
            Eigen::VectorXd s(sys_c.size());
            s.head(sys_c.n_flux).setOnes();
            s.tail(sys_c.n_scalar).setConstant(-1.0);
            const Eigen::MatrixXd predicted =
                s.asDiagonal() * sys_c.B.transpose() * s.asDiagonal();
            const double scale = sys_c.B.cwiseAbs().maxCoeff();
            out.duality_defect = (sys_d.B - predicted).cwiseAbs().maxCoeff() / scale;
            if (!(out.duality_defect <= 1e-13))
                out.failures.push_back("duality identity defect " +
                                       format_g12(out.duality_defect) + " exceeds 1e-13");

            out.beta_cons = compute_inf_sup(sys_c).report.beta_h;
            out.beta_div = compute_inf_sup(sys_d).report.beta_h;
            out.row.beta_h = out.beta_cons;
            if (!(std::abs(out.beta_cons - out.beta_div) <= 1e-9))
                out.failures.push_back("inf-sup mismatch |beta_cons - beta_div| = " +
                                       format_g12(std::abs(out.beta_cons - out.beta_div)));
            break;
        }
        case CampaignKind::Convergence:
        case CampaignKind::BestApprox: {
            const CoefficientSet coeffs = c.coeffs.materialize(mesh);
            const ManufacturedProblem mp = manufactured_problem(exact_by_name(c.u_exact), coeffs);
            if (c.kind == CampaignKind::Convergence) {
                AssembledSystem sys = assemble_b(flux, scalar, coeffs, quad);
                sys.mesh_level = level;
                set_rhs(sys, assemble_rhs(scalar, mp.f, quad));
                const Eigen::VectorXd x = solve_mixed(sys);
                const ErrorReport er = compute_errors(x, mp, flux, scalar, coeffs, quad);
                out.row.flux_err = er.flux_error;
                out.row.scalar_err = er.scalar_error;
                out.row.best_flux = er.best_flux;
                out.row.osc_div = er.osc_div;
                out.row.osc_u = er.osc_u;
            } else {
                const BestFluxResult bf = interpolate_best_flux(flux, coeffs.A, mp.sigma, quad);
                out.row.best_flux = bf.distance;
                // projection-only diagnostics at the pairing degree
                const int k = scalar.degree();
                const DgField pu = l2_project(mesh, k, pointwise(mp.u), quad);
                const DgField pd = l2_project(mesh, k, pointwise(mp.div_sigma), quad);
                double osc_u2 = 0, osc_div2 = 0;
                for (int t = 0; t < mesh.n_triangles(); ++t) {
                    const double detJ = mesh.det_jacobian(t);
                    const double hT = mesh.h(t);
                    for (std::size_t q = 0; q < quad.size(); ++q) {
                        const Vec2 ref = quad.ref_point(q);
                        const Vec2 x = mesh.map_to_physical(t, ref);
                        const double du = mp.u(x) - pu.eval(t, ref);
                        const double dd = mp.div_sigma(x) - pd.eval(t, ref);
                        osc_u2 += quad.points()[q].w * detJ * hT * hT * du * du;
                        osc_div2 += quad.points()[q].w * detJ * hT * hT * dd * dd;
                    }
                }
                out.row.osc_u = std::sqrt(osc_u2);
                out.row.osc_div = std::sqrt(osc_div2);
            }
            break;
        }
        case CampaignKind::Lemma4:
            break;  // handled above
    }

    if (with_timings) out.row.runtime_s = elapsed_s(t0);
    return out;
}

}  // namespace

CampaignResult run_campaign(const Campaign& campaign, bool with_timings) {
    campaign.validate();
    CampaignResult result;

    const int levels = campaign.kind == CampaignKind::Lemma4 ? 1 : campaign.levels;

    // meshes are built up front (cheap) so levels can run concurrently
    std::vector<Triangulation> meshes;
    meshes.reserve(levels);
    meshes.push_back(Triangulation::structured(campaign.base_m));
    for (int l = 1; l < levels; ++l) meshes.push_back(meshes.back().refined());

    std::vector<LevelData> data(levels);
    const int cap = worker_cap(levels);
    if (cap <= 1) {
        for (int l = 0; l < levels; ++l)
            data[l] = run_level(campaign, meshes[l], l, with_timings);
    } else {
        std::vector<std::future<LevelData>> futs(levels);
        int next = 0;
        std::vector<int> running;
        while (next < levels || !running.empty()) {
            while (next < levels && static_cast<int>(running.size()) < cap) {
                futs[next] = std::async(std::launch::async, [&campaign, &meshes, next,
                                                             with_timings]() {
                    return run_level(campaign, meshes[next], next, with_timings);
                });
                running.push_back(next++);
            }
            const int l = running.front();
            running.erase(running.begin());
            data[l] = futs[l].get();
        }
    }

    std::ostringstream summary;
    summary << "campaign '" << campaign.name << "' (" << to_string(campaign.kind) << ")\n";

    std::vector<double> hs, flux, scal, best, oscd, oscu, betas;
    for (int l = 0; l < levels; ++l) {
        const CsvRow& r = data[l].row;
        result.rows.push_back(r);
        for (const std::string& f : data[l].failures)
            result.failures.push_back("level " + std::to_string(l) + ": " + f);
        if (r.h_max) hs.push_back(*r.h_max);
        if (r.beta_h) betas.push_back(*r.beta_h);
        if (r.flux_err) flux.push_back(*r.flux_err);
        if (r.scalar_err) scal.push_back(*r.scalar_err);
        if (r.best_flux) best.push_back(*r.best_flux);
        if (r.osc_div) oscd.push_back(*r.osc_div);
        if (r.osc_u) oscu.push_back(*r.osc_u);
        summary << "  level " << l;
        if (r.h_max) summary << "  h_max " << format_g12(*r.h_max);
        if (r.n_dof) summary << "  n_dof " << *r.n_dof;
        if (r.beta_h) summary << "  beta_h " << format_g12(*r.beta_h);
        if (campaign.kind == CampaignKind::Duality)
            summary << "  |beta_cons-beta_div| "
                    << format_g12(std::abs(data[l].beta_cons - data[l].beta_div))
                    << "  identity_defect " << format_g12(data[l].duality_defect);
        if (campaign.kind == CampaignKind::Stability)
            summary << "  cond(M_H) " << format_g12(data[l].gram_condition);
        if (r.flux_err) summary << "  flux_err " << format_g12(*r.flux_err);
        if (r.scalar_err) summary << "  scalar_err " << format_g12(*r.scalar_err);
        if (r.best_flux) summary << "  best_flux " << format_g12(*r.best_flux);
        summary << "\n";
    }

    if (campaign.kind == CampaignKind::Stability && betas.size() >= 2) {
        for (std::size_t l = 1; l < betas.size(); ++l) {
            const double change = std::abs(betas[l] - betas[l - 1]) / betas[l - 1];
            if (!(change <= campaign.stability_tol))
                result.failures.push_back("level " + std::to_string(l) +
                                          ": beta_h relative change " + format_g12(change) +
                                          " exceeds " + format_g12(campaign.stability_tol));
        }
        summary << "  beta_h last-level relative change "
                << format_g12(std::abs(betas.back() - betas[betas.size() - 2]) /
                              betas[betas.size() - 2])
                << "\n";
    }

    if ((campaign.kind == CampaignKind::Convergence || campaign.kind == CampaignKind::BestApprox) &&
        hs.size() >= 2) {
        auto report_slope = [&](const char* what, const std::vector<double>& e,
                                const SlopeWindow& w) {
            if (e.size() != hs.size()) return;
            const double s = fit_slope_last3(hs, e);
            summary << "  fitted " << what << " slope " << format_g12(s) << " (last "
                    << std::min<std::size_t>(3, hs.size()) << " levels)\n";
            check_window(w, what, s, result.failures);
        };
        report_slope("flux_err", flux, campaign.flux_slope);
        report_slope("scalar_err", scal, campaign.scalar_slope);
        report_slope("best_flux", best, campaign.best_flux_slope);
        report_slope("osc_div", oscd, campaign.osc_div_slope);
        report_slope("osc_u", oscu, campaign.osc_u_slope);
    }

    std::ostringstream csv;
    csv << csv_header() << "\n";
    for (const CsvRow& r : result.rows) csv << to_csv_line(r) << "\n";
    result.csv_text = csv.str();

    result.ok = result.failures.empty();
    for (const std::string& f : result.failures) summary << "  FAILED: " << f << "\n";
    summary << (result.ok ? "  status: ok" : "  status: FAILED") << "\n";
    result.summary = summary.str();
    return result;
}

int run_config_file(const std::string& path, bool with_timings, bool duality_only) {
    const Config cfg = parse_config(path);
    bool all_ok = true;
    int ran = 0;
    for (const Campaign& c : cfg.campaigns) {
        if (duality_only && c.kind != CampaignKind::Duality) continue;
        ++ran;
        const CampaignResult r = run_campaign(c, with_timings);
        std::cout << r.summary;
        if (!c.output.empty()) {
            const std::filesystem::path out(c.output);
            if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
            std::ofstream f(out);
            if (!f) throw Error("cannot write CSV to '" + c.output + "'");
            f << r.csv_text;
            std::cout << "  csv: " << c.output << "\n";
        }
        all_ok = all_ok && r.ok;
    }
    if (ran == 0) {
        std::cerr << "no matching campaigns in " << path << "\n";
        return 2;
    }
    return all_ok ? 0 : 1;
}

}  // namespace femlab
