#pragma once

// Command line front end: gen / gadget / solve / oracle / sweep.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "loadrelay/harness.hpp"
#include "loadrelay/io.hpp"
#include "loadrelay/optimizer.hpp"
#include "loadrelay/scenario.hpp"

namespace loadrelay {

namespace detail {

struct algo_flags {
    double tol = fp_options{}.tol;
    int max_iter = fp_options{}.max_iter;
    int eta = algorithm_config{}.eta;
    double eps1 = algorithm_config{}.eps1;
    double eps2 = algorithm_config{}.eps2;
    std::string policy = "all";
    bool update_reference = true;
    bool refine_rejected = true;

    void attach(CLI::App& app) {
        app.add_option("--tol", tol, "fixed-point convergence tolerance");
        app.add_option("--max-iter", max_iter, "fixed-point iteration cap");
        app.add_option("--eta", eta, "maximum relay-selection rounds");
        app.add_option("--eps1", eps1, "energy comparison slack");
        app.add_option("--eps2", eps2, "frozen-entry growth slack");
        app.add_option("--subset-policy", policy, "update set choice: exact_l|all")
            ->check(CLI::IsMember({"exact_l", "all"}));
        app.add_flag("--update-reference,!--no-update-reference", update_reference,
                     "rebase the comparison on each accepted association");
        app.add_flag("--refine,!--no-refine", refine_rejected,
                     "retry rejected joint moves one endpoint at a time");
    }

    algorithm_config config() const {
        algorithm_config c;
        c.fp.tol = tol;
        c.fp.max_iter = max_iter;
        c.eta = eta;
        c.eps1 = eps1;
        c.eps2 = eps2;
        c.policy = io::subset_policy_from_string(policy);
        c.update_reference = update_reference;
        c.refine_rejected = refine_rejected;
        return c;
    }
};

inline io::json solve_to_json(const scenario& s, const association& a, const fixed_point_result& r) {
    return io::json{{"energy", r.energy},
                    {"feasible", r.feasible},
                    {"converged", r.converged},
                    {"iterations", r.iterations},
                    {"cell_load", r.cell_load},
                    {"association", io::to_json(s, a)}};
}

inline void print_solve(const scenario& s, const association& a, const fixed_point_result& r,
                        const std::string& out_path) {
    std::cout << "energy=" << r.energy << " feasible=" << (r.feasible ? "yes" : "no")
              << " converged=" << (r.converged ? "yes" : "no") << " iterations=" << r.iterations
              << "\n";
    if (!out_path.empty()) io::save_json(out_path, solve_to_json(s, a, r));
}

}  // namespace detail

/// Entry point behind main(); returns the process exit code.
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"load-coupled relay selection simulator"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a hexagonal HetNet scenario file");
    hexnet_params params;
    std::string gen_out;
    std::uint64_t seed = params.rng_seed;
    gen->add_option("--seed", seed, "RNG seed");
    gen->add_option("--mc-sites", params.num_mc_sites, "number of MC sites");
    gen->add_option("--isd", params.inter_site_distance_m, "inter-site distance [m]");
    gen->add_option("--rcs-per-region", params.rcs_per_region, "RCs per hexagonal region");
    gen->add_option("--ues-per-region", params.ues_per_region, "UEs per hexagonal region");
    gen->add_option("--candidates", params.candidate_set_size, "candidate set size");
    gen->add_option("--demand", params.ue_demand_bps, "uniform UE demand [bit/s]");
    gen->add_option("--out", gen_out, "output scenario file")->required();

    // gadget
    auto* gadget_cmd = app.add_subcommand("gadget", "map a graph file onto a gadget scenario");
    std::string gadget_graph, gadget_out;
    double gadget_eps = gadget::default_eps;
    gadget_cmd->add_option("--graph", gadget_graph, "input graph file")->required();
    gadget_cmd->add_option("--eps", gadget_eps, "edge cross gain");
    gadget_cmd->add_option("--out", gadget_out, "output scenario file")->required();

    // solve
    auto* solve = app.add_subcommand("solve", "solve the load fixed point for an association");
    std::string solve_scenario, solve_assoc, solve_out;
    bool solve_baseline = false, solve_algo = false;
    detail::algo_flags solve_flags;
    solve->add_option("--scenario", solve_scenario, "scenario file")->required();
    solve->add_option("--assoc", solve_assoc, "association file");
    solve->add_flag("--baseline", solve_baseline, "use the best-received-power association");
    solve->add_flag("--algo", solve_algo, "run relay selection from the baseline association");
    solve_flags.attach(*solve);
    solve->add_option("--out", solve_out, "write the result as JSON");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "exhaustive minimum-energy association");
    std::string oracle_scenario, oracle_out;
    oracle->add_option("--scenario", oracle_scenario, "scenario file")->required();
    oracle->add_option("--out", oracle_out, "write the result as JSON");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "demand sweep comparing algorithm vs baseline");
    std::string sweep_spec_path, sweep_out;
    int sweep_threads = 0;
    std::optional<std::uint64_t> sweep_seed;
    sweep->add_option("--spec", sweep_spec_path, "sweep spec file")->required();
    sweep->add_option("--out", sweep_out, "output CSV file")->required();
    sweep->add_option("--threads", sweep_threads, "worker threads (default: hardware)");
    sweep->add_option("--seed", sweep_seed, "override the spec's seed base");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) {
            params.rng_seed = seed;
            io::save_json(gen_out, io::to_json(generate_hexnet(params)));
            std::cout << "wrote " << gen_out << "\n";
        } else if (*gadget_cmd) {
            const graph_instance g = io::graph_from_json(io::load_json(gadget_graph));
            io::save_json(gadget_out, io::to_json(mis_gadget(g, gadget_eps)));
            std::cout << "wrote " << gadget_out << "\n";
        } else if (*solve) {
            if (static_cast<int>(!solve_assoc.empty()) + solve_baseline + solve_algo != 1)
                throw std::runtime_error("solve: pick exactly one of --assoc, --baseline, --algo");
            const scenario s = io::scenario_from_json(io::load_json(solve_scenario));
            const algorithm_config cfg = solve_flags.config();
            association a;
            if (!solve_assoc.empty()) a = io::association_from_json(s, io::load_json(solve_assoc));
            else a = baseline_association(s);
            if (solve_algo) {
                // fall back to a relays-off start when best power overloads a cell
                if (!fixed_point(s, a, {}, cfg.fp).feasible) a = macro_only_association(s);
                a = relay_selection(s, a, cfg);
            }
            detail::print_solve(s, a, fixed_point(s, a, {}, cfg.fp), solve_out);
        } else if (*oracle) {
            const scenario s = io::scenario_from_json(io::load_json(oracle_scenario));
            const brute_force_result r = brute_force(s);
            if (!r.feasible) throw std::runtime_error("oracle: no feasible association exists");
            std::cout << "energy=" << r.energy << " enumerated=" << r.enumerated << "\n";
            if (!oracle_out.empty())
                io::save_json(oracle_out, io::json{{"energy", r.energy},
                                                   {"enumerated", r.enumerated},
                                                   {"feasible_count", r.feasible_count},
                                                   {"association", io::to_json(s, r.best)}});
        } else if (*sweep) {
            sweep_spec spec = io::sweep_spec_from_json(io::load_json(sweep_spec_path));
            if (spec.scenario_file)
                spec.fixed_scenario = io::scenario_from_json(io::load_json(*spec.scenario_file));
            if (sweep_seed) spec.seed_base = *sweep_seed;
            const sweep_report report = run_sweep(spec, sweep_threads);
            io::save_text(sweep_out, io::to_csv(report));
            std::cout << "wrote " << sweep_out << " (config " << report.config_hash << ")\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace loadrelay
