#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here stays deliberately separate from the solver implementation paths it
// cross-checks.

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "loadrelay/coupling.hpp"
#include "loadrelay/optimizer.hpp"
#include "loadrelay/scenario.hpp"

namespace testutil {

using namespace loadrelay;

// ---------------------------------------------------------------------------
// hand-built instances
// ---------------------------------------------------------------------------

// One MC, one RC and two UEs: UE 0 served by the RC, UE 1 by the MC, with
// every link inside the candidate space. Gains chosen to keep loads moderate.
inline scenario make_relay_pair_instance() {
    scenario s;
    s.num_mcs = 1;
    s.cell_pos = {{0.0, 0.0}, {100.0, 0.0}};
    s.ue_pos = {{120.0, 0.0}, {30.0, 0.0}};
    s.demand_bps = {1.0, 1.0};
    s.power_w = {1.0, 0.5};
    s.noise_w = 1.0;
    s.num_ru = 1;
    s.ru_bandwidth_hz = 1.0;
    s.gain = gain_matrix(2, 3);
    // receivers: UE0, UE1, RC endpoint
    s.gain.at(0, 0) = 0.8;   // MC -> UE0
    s.gain.at(0, 1) = 4.0;   // MC -> UE1
    s.gain.at(0, 2) = 6.0;   // MC -> RC
    s.gain.at(1, 0) = 9.0;   // RC -> UE0
    s.gain.at(1, 1) = 0.7;   // RC -> UE1
    s.candidates = {{0, 1}, {0, 1}, {0}};
    validate(s);
    return s;
}

inline association relay_pair_association() { return association{{1, 0, 0}}; }

// Two isolated single-UE macro cells whose links interfere mutually.
inline scenario make_two_cell_instance(double p, double g_direct, double g_cross, double noise,
                                       double demand, int num_ru = 1, double ru_bw = 1.0) {
    scenario s;
    s.num_mcs = 2;
    s.cell_pos = {{0.0, 0.0}, {500.0, 0.0}};
    s.ue_pos = {{10.0, 0.0}, {490.0, 0.0}};
    s.demand_bps = {demand, demand};
    s.power_w = {p, p};
    s.noise_w = noise;
    s.num_ru = num_ru;
    s.ru_bandwidth_hz = ru_bw;
    s.gain = gain_matrix(2, 2);
    s.gain.at(0, 0) = g_direct;
    s.gain.at(0, 1) = g_cross;
    s.gain.at(1, 0) = g_cross;
    s.gain.at(1, 1) = g_direct;
    s.candidates = {{0, 1}, {0, 1}};
    validate(s);
    return s;
}

// ---------------------------------------------------------------------------
// randomized small instances
// ---------------------------------------------------------------------------

struct random_instance_shape {
    int num_mcs = 3;
    int num_rcs = 2;
    int num_ues = 6;
    int candidate_k = 3;
};

// Geometry-driven random instance with macro/micro path-loss gains and
// demands scaled until the baseline association is comfortably feasible.
inline scenario make_random_instance(std::uint64_t seed, random_instance_shape shape = {}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.0, 600.0);
    std::uniform_int_distribution<int> mc_count(1, shape.num_mcs);
    std::uniform_int_distribution<int> rc_count(0, shape.num_rcs);
    std::uniform_int_distribution<int> ue_count(1, shape.num_ues);

    scenario s;
    s.num_mcs = mc_count(rng);
    const int n_rcs = rc_count(rng);
    const int n_ues = ue_count(rng);
    for (int i = 0; i < s.num_mcs + n_rcs; ++i) s.cell_pos.push_back({coord(rng), coord(rng)});
    for (int i = 0; i < n_ues; ++i) s.ue_pos.push_back({coord(rng), coord(rng)});
    s.demand_bps.assign(n_ues, 1.0e6);
    for (int c = 0; c < s.num_mcs + n_rcs; ++c) s.power_w.push_back(c < s.num_mcs ? 0.8 : 0.05);
    s.noise_w = 7.2e-16;
    s.num_ru = 100;
    s.ru_bandwidth_hz = 180.0e3;

    const int n_eps = n_ues + n_rcs;
    s.gain = gain_matrix(s.num_cells(), n_eps);
    auto endpoint_pos = [&](endpoint_id e) {
        return e < n_ues ? s.ue_pos[e] : s.cell_pos[s.num_mcs + (e - n_ues)];
    };
    for (cell_id c = 0; c < s.num_cells(); ++c)
        for (endpoint_id e = 0; e < n_eps; ++e) {
            if (e >= n_ues && s.num_mcs + (e - n_ues) == c) continue;
            const auto model =
                c < s.num_mcs ? path_loss_model::urban_macro : path_loss_model::urban_micro;
            const double pl = path_loss_db(model, distance_m(s.cell_pos[c], endpoint_pos(e)));
            s.gain.at(c, e) = std::pow(10.0, -pl / 10.0);
        }

    for (endpoint_id e = 0; e < n_eps; ++e) {
        std::vector<cell_id> order;
        for (cell_id c = 0; c < (e < n_ues ? s.num_cells() : s.num_mcs); ++c)
            if (s.gain(c, e) > 0.0) order.push_back(c);
        std::stable_sort(order.begin(), order.end(), [&](cell_id a, cell_id b) {
            return s.power_w[a] * s.gain(a, e) > s.power_w[b] * s.gain(b, e);
        });
        if (static_cast<int>(order.size()) > shape.candidate_k) order.resize(shape.candidate_k);
        std::sort(order.begin(), order.end());
        s.candidates.push_back(order);
    }
    validate(s);

    // halve demands until the baseline fixed point is feasible with headroom
    for (int attempt = 0; attempt < 60; ++attempt) {
        const fixed_point_result r = fixed_point(s, baseline_association(s));
        if (r.feasible &&
            *std::max_element(r.cell_load.begin(), r.cell_load.end()) < 0.8)
            break;
        for (double& d : s.demand_bps) d *= 0.5;
    }
    return s;
}

// Uniformly random association over the candidate sets.
inline association random_association(const scenario& s, std::mt19937_64& rng) {
    association a;
    for (const auto& cs : s.candidates) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(cs.size()) - 1);
        a.serving.push_back(cs[pick(rng)]);
    }
    return a;
}

// ---------------------------------------------------------------------------
// independent oracles
// ---------------------------------------------------------------------------

// Exhaustive maximum-independent-set enumerator over subsets.
inline bool is_independent_set(const graph_instance& g, const std::set<int>& nodes) {
    for (auto [u, v] : g.edges)
        if (nodes.count(u) && nodes.count(v)) return false;
    return true;
}

inline int max_independent_set_size(const graph_instance& g) {
    int best = 0;
    for (std::uint32_t mask = 0; mask < (1u << g.num_nodes); ++mask) {
        std::set<int> nodes;
        for (int v = 0; v < g.num_nodes; ++v)
            if (mask & (1u << v)) nodes.insert(v);
        if (is_independent_set(g, nodes)) best = std::max(best, static_cast<int>(nodes.size()));
    }
    return best;
}

// Active relays of an association on a gadget scenario (relay k active iff
// some UE is served by cell n+k).
inline std::set<int> active_relay_nodes(const scenario& s, const association& a) {
    std::set<int> nodes;
    for (endpoint_id e = 0; e < s.num_ues(); ++e)
        if (!s.is_mc(a.serving[e])) nodes.insert(a.serving[e] - s.num_mcs);
    return nodes;
}

// Scalar bisection for the symmetric two-cell load equation
// x = r / (M*B*log2(1 + p*g/(p*h*x + noise))).
inline double bisect_symmetric_load(double r, double m_b, double p, double g_direct, double g_cross,
                                    double noise) {
    auto f = [&](double x) {
        const double sinr = p * g_direct / (p * g_cross * x + noise);
        return r / (m_b * std::log2(1.0 + sinr)) - x;
    };
    double lo = 0.0, hi = 1.0;
    while (f(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// All labeled connected graphs on n nodes (n small).
inline std::vector<graph_instance> connected_graphs(int n) {
    std::vector<std::pair<int, int>> all_edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) all_edges.emplace_back(u, v);
    const int m = static_cast<int>(all_edges.size());

    auto connected = [&](const graph_instance& g) {
        std::vector<std::vector<int>> adj(n);
        for (auto [u, v] : g.edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int reached = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : adj[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    ++reached;
                    stack.push_back(v);
                }
        }
        return reached == n;
    };

    std::vector<graph_instance> out;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        graph_instance g;
        g.num_nodes = n;
        for (int e = 0; e < m; ++e)
            if (mask & (1u << e)) g.edges.push_back(all_edges[e]);
        if (connected(g)) out.push_back(std::move(g));
    }
    return out;
}

// Random connected graph: a random spanning tree plus random extra edges.
inline graph_instance random_connected_graph(int n, std::mt19937_64& rng) {
    graph_instance g;
    g.num_nodes = n;
    std::set<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v) {
        std::uniform_int_distribution<int> parent(0, v - 1);
        const int u = parent(rng);
        edges.emplace(std::min(u, v), std::max(u, v));
    }
    std::uniform_int_distribution<int> extra(0, n * (n - 1) / 2);
    std::uniform_int_distribution<int> node(0, n - 1);
    for (int tries = extra(rng); tries > 0; --tries) {
        const int u = node(rng), v = node(rng);
        if (u != v) edges.emplace(std::min(u, v), std::max(u, v));
    }
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

}  // namespace testutil
