#pragma once

// File formats: scenario / association / graph / sweep files as JSON, sweep
// reports as CSV.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "loadrelay/coupling.hpp"
#include "loadrelay/harness.hpp"
#include "loadrelay/optimizer.hpp"
#include "loadrelay/scenario.hpp"

namespace loadrelay::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// scenario
// ---------------------------------------------------------------------------

inline json to_json(const scenario& s) {
    json cells = json::array();
    for (cell_id c = 0; c < s.num_cells(); ++c)
        cells.push_back({{"id", c},
                         {"kind", s.is_mc(c) ? "mc" : "rc"},
                         {"pos_m", {s.cell_pos[c].x, s.cell_pos[c].y}}});
    json ues = json::array();
    for (int u = 0; u < s.num_ues(); ++u)
        ues.push_back({{"id", u},
                       {"pos_m", {s.ue_pos[u].x, s.ue_pos[u].y}},
                       {"demand_bps", s.demand_bps[u]}});

    json rx_ues = json::array(), rx_rcs = json::array(), tx_cells = json::array();
    for (int u = 0; u < s.num_ues(); ++u) rx_ues.push_back(u);
    for (cell_id c = s.num_mcs; c < s.num_cells(); ++c) rx_rcs.push_back(c);
    for (cell_id c = 0; c < s.num_cells(); ++c) tx_cells.push_back(c);

    json cand_ues = json::array(), cand_rcs = json::array();
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e)
        (s.is_ue(e) ? cand_ues : cand_rcs).push_back(s.candidates[e]);

    return json{{"cells", cells},
                {"ues", ues},
                {"power", s.power_w},
                {"noise_w", s.noise_w},
                {"num_ru", s.num_ru},
                {"ru_bandwidth_hz", s.ru_bandwidth_hz},
                {"gain",
                 {{"tx_cells", tx_cells},
                  {"rx_ues", rx_ues},
                  {"rx_rcs", rx_rcs},
                  {"values", s.gain.data()}}},
                {"candidates", {{"ues", cand_ues}, {"rcs", cand_rcs}}}};
}

inline scenario scenario_from_json(const json& j) {
    scenario s;
    const auto& cells = j.at("cells");
    for (const auto& c : cells) {
        if (c.at("kind") == "mc") ++s.num_mcs;
        s.cell_pos.push_back({c.at("pos_m").at(0).get<double>(), c.at("pos_m").at(1).get<double>()});
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].at("id").get<int>() != static_cast<int>(i))
            throw std::invalid_argument("scenario file: cell ids must be 0..n-1 with MCs first");
        if ((cells[i].at("kind") == "mc") != (static_cast<int>(i) < s.num_mcs))
            throw std::invalid_argument("scenario file: MCs must precede RCs");
    }
    for (const auto& u : j.at("ues")) {
        s.ue_pos.push_back({u.at("pos_m").at(0).get<double>(), u.at("pos_m").at(1).get<double>()});
        s.demand_bps.push_back(u.at("demand_bps").get<double>());
    }
    s.power_w = j.at("power").get<std::vector<double>>();
    s.noise_w = j.at("noise_w").get<double>();
    s.num_ru = j.at("num_ru").get<int>();
    s.ru_bandwidth_hz = j.at("ru_bandwidth_hz").get<double>();

    const auto& g = j.at("gain");
    const auto values = g.at("values").get<std::vector<double>>();
    const int rows = static_cast<int>(g.at("tx_cells").size());
    const int cols = static_cast<int>(g.at("rx_ues").size() + g.at("rx_rcs").size());
    if (values.size() != static_cast<std::size_t>(rows) * cols)
        throw std::invalid_argument("scenario file: gain size mismatch");
    s.gain = gain_matrix(rows, cols);
    s.gain.data() = values;

    for (const auto& cs : j.at("candidates").at("ues"))
        s.candidates.push_back(cs.get<std::vector<cell_id>>());
    for (const auto& cs : j.at("candidates").at("rcs"))
        s.candidates.push_back(cs.get<std::vector<cell_id>>());

    validate(s);
    return s;
}

// ---------------------------------------------------------------------------
// association
// ---------------------------------------------------------------------------

inline json to_json(const scenario& s, const association& a) {
    json ues = json::array(), rcs = json::array();
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e)
        (s.is_ue(e) ? ues : rcs).push_back(a.serving[e]);
    return json{{"ues", ues}, {"rcs", rcs}};
}

inline association association_from_json(const scenario& s, const json& j) {
    association a;
    for (const auto& c : j.at("ues")) a.serving.push_back(c.get<cell_id>());
    for (const auto& c : j.at("rcs")) a.serving.push_back(c.get<cell_id>());
    validate(s, a);
    return a;
}

// ---------------------------------------------------------------------------
// graph
// ---------------------------------------------------------------------------

inline json to_json(const graph_instance& g) {
    json edges = json::array();
    for (auto [u, v] : g.edges) edges.push_back({u, v});
    return json{{"num_nodes", g.num_nodes}, {"edges", edges}};
}

inline graph_instance graph_from_json(const json& j) {
    graph_instance g;
    g.num_nodes = j.at("num_nodes").get<int>();
    for (const auto& e : j.at("edges"))
        g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    validate(g);
    return g;
}

// ---------------------------------------------------------------------------
// hexnet params, algorithm config, sweep spec
// ---------------------------------------------------------------------------

inline json to_json(const hexnet_params& p) {
    return json{{"num_mc_sites", p.num_mc_sites},
                {"inter_site_distance_m", p.inter_site_distance_m},
                {"rcs_per_region", p.rcs_per_region},
                {"ues_per_region", p.ues_per_region},
                {"carrier_hz", p.carrier_hz},
                {"ru_bandwidth_hz", p.ru_bandwidth_hz},
                {"cell_bandwidth_hz", p.cell_bandwidth_hz},
                {"noise_dbm_per_hz", p.noise_dbm_per_hz},
                {"mc_power_mw_per_ru", p.mc_power_mw_per_ru},
                {"rc_power_mw_per_ru", p.rc_power_mw_per_ru},
                {"shadowing_std_db_mc", p.shadowing_std_db_mc},
                {"shadowing_std_db_rc", p.shadowing_std_db_rc},
                {"candidate_set_size", p.candidate_set_size},
                {"rng_seed", p.rng_seed},
                {"ue_demand_bps", p.ue_demand_bps}};
}

inline hexnet_params hexnet_params_from_json(const json& j) {
    hexnet_params p;
    p.num_mc_sites = j.value("num_mc_sites", p.num_mc_sites);
    p.inter_site_distance_m = j.value("inter_site_distance_m", p.inter_site_distance_m);
    p.rcs_per_region = j.value("rcs_per_region", p.rcs_per_region);
    p.ues_per_region = j.value("ues_per_region", p.ues_per_region);
    p.carrier_hz = j.value("carrier_hz", p.carrier_hz);
    p.ru_bandwidth_hz = j.value("ru_bandwidth_hz", p.ru_bandwidth_hz);
    p.cell_bandwidth_hz = j.value("cell_bandwidth_hz", p.cell_bandwidth_hz);
    p.noise_dbm_per_hz = j.value("noise_dbm_per_hz", p.noise_dbm_per_hz);
    p.mc_power_mw_per_ru = j.value("mc_power_mw_per_ru", p.mc_power_mw_per_ru);
    p.rc_power_mw_per_ru = j.value("rc_power_mw_per_ru", p.rc_power_mw_per_ru);
    p.shadowing_std_db_mc = j.value("shadowing_std_db_mc", p.shadowing_std_db_mc);
    p.shadowing_std_db_rc = j.value("shadowing_std_db_rc", p.shadowing_std_db_rc);
    p.candidate_set_size = j.value("candidate_set_size", p.candidate_set_size);
    p.rng_seed = j.value("rng_seed", p.rng_seed);
    p.ue_demand_bps = j.value("ue_demand_bps", p.ue_demand_bps);
    validate(p);
    return p;
}

inline json to_json(const algorithm_config& c) {
    return json{{"eta", c.eta},
                {"eps1", c.eps1},
                {"eps2", c.eps2},
                {"subset_policy", c.policy == subset_policy::exact_l ? "exact_l" : "all"},
                {"update_reference", c.update_reference},
                {"refine_rejected", c.refine_rejected},
                {"tol", c.fp.tol},
                {"max_iter", c.fp.max_iter}};
}

inline subset_policy subset_policy_from_string(const std::string& s) {
    if (s == "exact_l") return subset_policy::exact_l;
    if (s == "all") return subset_policy::all;
    throw std::invalid_argument("unknown subset policy: " + s);
}

inline algorithm_config algorithm_config_from_json(const json& j, algorithm_config c = {}) {
    c.eta = j.value("eta", c.eta);
    c.eps1 = j.value("eps1", c.eps1);
    c.eps2 = j.value("eps2", c.eps2);
    if (j.contains("subset_policy")) c.policy = subset_policy_from_string(j.at("subset_policy"));
    c.update_reference = j.value("update_reference", c.update_reference);
    c.refine_rejected = j.value("refine_rejected", c.refine_rejected);
    c.fp.tol = j.value("tol", c.fp.tol);
    c.fp.max_iter = j.value("max_iter", c.fp.max_iter);
    return c;
}

inline json to_json(const sweep_spec& s) {
    json j{{"demand_grid_bps", s.demand_grid_bps},
           {"trials", s.trials},
           {"seed_base", s.seed_base},
           {"algorithm", to_json(s.algo)}};
    if (s.scenario_file) j["scenario_file"] = *s.scenario_file;
    else j["hexnet"] = to_json(s.hexnet);
    return j;
}

inline sweep_spec sweep_spec_from_json(const json& j) {
    sweep_spec s;
    if (j.contains("scenario_file")) s.scenario_file = j.at("scenario_file").get<std::string>();
    else s.hexnet = hexnet_params_from_json(j.at("hexnet"));
    s.demand_grid_bps = j.at("demand_grid_bps").get<std::vector<double>>();
    s.trials = j.value("trials", s.trials);
    s.seed_base = j.value("seed_base", s.seed_base);
    if (j.contains("algorithm")) s.algo = algorithm_config_from_json(j.at("algorithm"), s.algo);
    validate(s);
    return s;
}

// ---------------------------------------------------------------------------
// sweep report -> CSV
// ---------------------------------------------------------------------------

inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string to_csv(const sweep_report& r) {
    std::ostringstream out;
    out << "demand_bps,trials_ok,baseline_energy_mean,algo_energy_mean,improvement_pct\n";
    for (const auto& p : r.points)
        out << csv_number(p.demand_bps) << ',' << p.trials_ok << ','
            << csv_number(p.baseline_energy_mean) << ',' << csv_number(p.algo_energy_mean) << ','
            << csv_number(p.improvement_pct) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
}

inline void save_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

inline void save_json(const std::string& path, const json& j) { save_text(path, j.dump(2) + "\n"); }

}  // namespace loadrelay::io
