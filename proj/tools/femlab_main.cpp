#include <CLI11.hpp>
#include <iostream>

#include "femlab/campaign.hpp"

using namespace femlab;

int main(int argc, char** argv) {
    CLI::App app{"femlab - mixed finite element laboratory for RT/BDM saddle-point systems"};
    app.require_subcommand(1);

    std::string config_path;
    bool timings = false;
    auto* run = app.add_subcommand("run", "run all campaigns of a config file");
    run->add_option("config", config_path, "config file path")->required();
    run->add_flag("--timings", timings, "fill the runtime_s CSV column (off by default so "
                                        "identical config+seed give byte-identical CSVs)");

    int k = 0;
    int samples = 10000;
    std::uint64_t seed = 42;
    auto* lemma4 = app.add_subcommand("lemma4",
                                      "random sweep of the RT inner-approximation bound");
    lemma4->add_option("--k", k, "RT degree (0 or 1)")->check(CLI::Range(0, 1));
    lemma4->add_option("--samples", samples, "number of random trials")->check(CLI::PositiveNumber);
    lemma4->add_option("--seed", seed, "rng seed");

    std::string duality_config;
    auto* duality = app.add_subcommand("duality",
                                       "run the duality campaigns of a config file");
    duality->add_option("config", duality_config, "config file path")->required();

    std::string mesh_path;
    auto* mesh_info = app.add_subcommand("mesh-info", "validate and describe a mesh file");
    mesh_info->add_option("mesh", mesh_path, "plain-text mesh file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_config_file(config_path, timings);
        if (duality->parsed()) return run_config_file(duality_config, false, true);
        if (lemma4->parsed()) {
            const Lemma4Sweep sweep = lemma4_sweep(k, samples, seed);
            std::cout << "trials " << sweep.trials << "\n"
                      << "max ratio " << format_g12(sweep.max_ratio) << "\n"
                      << "max identity residual " << format_g12(sweep.max_identity_residual)
                      << "\n";
            const bool ok = sweep.max_ratio <= 1.0 + 1e-10 && sweep.max_identity_residual <= 1e-12;
            std::cout << (ok ? "ok" : "FAILED") << "\n";
            return ok ? 0 : 1;
        }
        if (mesh_info->parsed()) {
            const Triangulation mesh = Triangulation::from_file(mesh_path);
            std::cout << "vertices " << mesh.n_vertices() << "\n"
                      << "triangles " << mesh.n_triangles() << "\n"
                      << "edges " << mesh.n_edges() << "\n";
            int nb = 0;
            for (int e = 0; e < mesh.n_edges(); ++e) nb += mesh.boundary_edge(e) ? 1 : 0;
            std::cout << "boundary_edges " << nb << "\n"
                      << "h_max " << format_g12(mesh.h_max()) << "\n"
                      << "shape_regularity " << format_g12(mesh.shape_regularity()) << "\n"
                      << "area " << format_g12(mesh.total_area()) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
