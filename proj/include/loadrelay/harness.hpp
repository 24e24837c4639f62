#pragma once

// Experiment runner: seeded demand sweeps comparing the relay selection
// algorithm against the best-received-power baseline.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "loadrelay/coupling.hpp"
#include "loadrelay/optimizer.hpp"
#include "loadrelay/scenario.hpp"

namespace loadrelay {

inline algorithm_config default_sweep_config() {
    algorithm_config c;
    // sweeps compare full candidate energies; the restricted update set is too
    // conservative to certify moves that add backhaul demand
    c.policy = subset_policy::all;
    c.update_reference = true;
    c.refine_rejected = true;
    return c;
}

struct sweep_spec {
    hexnet_params hexnet{};                    // per-trial scenarios seeded from seed_base
    std::optional<scenario> fixed_scenario;    // overrides hexnet when set
    std::optional<std::string> scenario_file;  // provenance label only
    // light load up to the saturation edge: best-power baselines on default
    // hexnets start breaching full load beyond ~1.5 Mbit/s per UE
    std::vector<double> demand_grid_bps = {0.5e6, 0.75e6, 1.0e6, 1.25e6, 1.5e6};
    int trials = 20;
    std::uint64_t seed_base = 1;
    algorithm_config algo = default_sweep_config();
};

inline void validate(const sweep_spec& s) {
    auto fail = [](const std::string& m) { throw std::invalid_argument("sweep_spec: " + m); };
    if (s.trials < 1) fail("trials must be >= 1");
    if (s.demand_grid_bps.empty()) fail("demand grid must be nonempty");
    double prev = 0.0;
    for (double d : s.demand_grid_bps) {
        if (!(d > prev)) fail("demand grid must be strictly increasing and positive");
        prev = d;
    }
    if (!s.fixed_scenario) validate(s.hexnet);
}

struct sweep_point {
    double demand_bps = 0.0;
    int trials_ok = 0;          // trials with both arms feasible
    int infeasible_trials = 0;  // trials_ok + infeasible_trials == trials
    double baseline_energy_mean = 0.0;
    double algo_energy_mean = 0.0;
    double improvement_pct = 0.0;  // 100*(baseline-algo)/baseline over the means
};

struct sweep_report {
    std::vector<sweep_point> points;
    std::uint64_t seed_base = 0;
    int trials = 0;
    std::string config_hash;
};

namespace detail {

inline void fnv_mix(std::uint64_t& h, std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
        h ^= (v >> (8 * byte)) & 0xffu;
        h *= 1099511628211ull;
    }
}

inline void fnv_mix(std::uint64_t& h, double v) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof bits);
    fnv_mix(h, bits);
}

inline std::string config_hash(const sweep_spec& s) {
    std::uint64_t h = 1469598103934665603ull;
    if (s.fixed_scenario) {
        const scenario& sc = *s.fixed_scenario;
        fnv_mix(h, static_cast<std::uint64_t>(sc.num_mcs));
        fnv_mix(h, static_cast<std::uint64_t>(sc.num_endpoints()));
        for (double g : sc.gain.data()) fnv_mix(h, g);
        for (double p : sc.power_w) fnv_mix(h, p);
        fnv_mix(h, sc.noise_w);
    } else {
        const hexnet_params& p = s.hexnet;
        fnv_mix(h, static_cast<std::uint64_t>(p.num_mc_sites));
        fnv_mix(h, p.inter_site_distance_m);
        fnv_mix(h, static_cast<std::uint64_t>(p.rcs_per_region));
        fnv_mix(h, static_cast<std::uint64_t>(p.ues_per_region));
        fnv_mix(h, p.carrier_hz);
        fnv_mix(h, p.ru_bandwidth_hz);
        fnv_mix(h, p.cell_bandwidth_hz);
        fnv_mix(h, p.noise_dbm_per_hz);
        fnv_mix(h, p.mc_power_mw_per_ru);
        fnv_mix(h, p.rc_power_mw_per_ru);
        fnv_mix(h, p.shadowing_std_db_mc);
        fnv_mix(h, p.shadowing_std_db_rc);
        fnv_mix(h, static_cast<std::uint64_t>(p.candidate_set_size));
    }
    for (double d : s.demand_grid_bps) fnv_mix(h, d);
    fnv_mix(h, static_cast<std::uint64_t>(s.trials));
    fnv_mix(h, s.seed_base);
    fnv_mix(h, static_cast<std::uint64_t>(s.algo.eta));
    fnv_mix(h, s.algo.eps1);
    fnv_mix(h, s.algo.eps2);
    fnv_mix(h, static_cast<std::uint64_t>(s.algo.policy == subset_policy::all ? 1 : 0));
    fnv_mix(h, static_cast<std::uint64_t>(s.algo.update_reference ? 1 : 0));
    fnv_mix(h, s.algo.fp.tol);
    fnv_mix(h, static_cast<std::uint64_t>(s.algo.fp.max_iter));
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct trial_record {
    bool ok = false;
    double baseline_energy = 0.0;
    double algo_energy = 0.0;
};

}  // namespace detail

/// Run one seeded trial at one demand point. Both arms must be feasible for
/// the pair to count; the algorithm arm is re-verified by a from-scratch
/// fixed-point solve of the returned association.
inline detail::trial_record run_trial(const scenario& s, const algorithm_config& cfg) {
    detail::trial_record rec;
    const association base = baseline_association(s);
    const fixed_point_result base_res = fixed_point(s, base, {}, cfg.fp);
    if (!base_res.feasible) return rec;
    const association tuned = relay_selection(s, base, cfg);
    const fixed_point_result tuned_res = fixed_point(s, tuned, {}, cfg.fp);
    if (!tuned_res.feasible) return rec;
    rec.ok = true;
    rec.baseline_energy = base_res.energy;
    rec.algo_energy = tuned_res.energy;
    return rec;
}

/// Deterministic sweep over the demand grid: per trial a fresh seeded
/// scenario (seed_base + trial), swept across every demand point. Trials run
/// concurrently; the reduction is ordered by (point, trial).
inline sweep_report run_sweep(const sweep_spec& spec, int num_threads = 0) {
    validate(spec);
    const int points = static_cast<int>(spec.demand_grid_bps.size());
    std::vector<std::vector<detail::trial_record>> records(
        spec.trials, std::vector<detail::trial_record>(points));

    auto run_one_trial = [&](int trial) {
        const scenario base = spec.fixed_scenario
                                  ? *spec.fixed_scenario
                                  : [&] {
                                        hexnet_params p = spec.hexnet;
                                        p.rng_seed = spec.seed_base + static_cast<std::uint64_t>(trial);
                                        return generate_hexnet(p);
                                    }();
        for (int pi = 0; pi < points; ++pi) {
            const scenario s = with_uniform_demand(base, spec.demand_grid_bps[pi]);
            records[trial][pi] = run_trial(s, spec.algo);
        }
    };

    if (num_threads <= 0) num_threads = static_cast<int>(std::thread::hardware_concurrency());
    num_threads = std::max(1, std::min(num_threads, spec.trials));
    if (num_threads == 1) {
        for (int trial = 0; trial < spec.trials; ++trial) run_one_trial(trial);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(num_threads);
        for (int w = 0; w < num_threads; ++w)
            pool.emplace_back([&] {
                for (int trial = next.fetch_add(1); trial < spec.trials; trial = next.fetch_add(1))
                    run_one_trial(trial);
            });
        for (auto& th : pool) th.join();
    }

    sweep_report report;
    report.seed_base = spec.seed_base;
    report.trials = spec.trials;
    report.config_hash = detail::config_hash(spec);
    report.points.resize(points);
    for (int pi = 0; pi < points; ++pi) {
        sweep_point& pt = report.points[pi];
        pt.demand_bps = spec.demand_grid_bps[pi];
        double base_sum = 0.0, algo_sum = 0.0;
        for (int trial = 0; trial < spec.trials; ++trial) {
            const auto& rec = records[trial][pi];
            if (!rec.ok) {
                ++pt.infeasible_trials;
                continue;
            }
            ++pt.trials_ok;
            base_sum += rec.baseline_energy;
            algo_sum += rec.algo_energy;
        }
        if (pt.trials_ok > 0) {
            pt.baseline_energy_mean = base_sum / pt.trials_ok;
            pt.algo_energy_mean = algo_sum / pt.trials_ok;
            if (pt.baseline_energy_mean > 0.0)
                pt.improvement_pct =
                    100.0 * (pt.baseline_energy_mean - pt.algo_energy_mean) / pt.baseline_energy_mean;
        } else {
            pt.baseline_energy_mean = std::nan("");
            pt.algo_energy_mean = std::nan("");
            pt.improvement_pct = std::nan("");
        }
    }
    return report;
}

}  // namespace loadrelay
