#pragma once

// Network instance construction: randomized hexagonal HetNets, hand-built
// instances, and the graph-derived gadget family used as a correctness corpus.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace loadrelay {

using cell_id = int;      // cells: [0, num_mcs) are MCs, the rest are RCs
using endpoint_id = int;  // endpoints: [0, num_ues) are UEs, the rest are RC receivers

struct position {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const position&) const = default;
};

inline double distance_m(position a, position b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Dense power-gain matrix, rows = transmitting cells, cols = receiving endpoints.
class gain_matrix {
  public:
    gain_matrix() = default;
    gain_matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols, fill) {}

    double operator()(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
    double& at(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const std::vector<double>& data() const { return v_; }
    std::vector<double>& data() { return v_; }

    bool operator==(const gain_matrix&) const = default;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> v_;
};

/// Immutable network instance. Cells are MCs followed by RCs; endpoints are
/// UEs followed by RC receivers (an RC appears once as a transmitter in the
/// cell id space and once as a backhaul receiver in the endpoint id space).
struct scenario {
    int num_mcs = 0;
    std::vector<position> cell_pos;              // per cell
    std::vector<position> ue_pos;                // per UE
    std::vector<double> demand_bps;              // per UE, d_j > 0
    std::vector<double> power_w;                 // per cell, transmit power per RU
    gain_matrix gain;                            // linear power gain, cell -> endpoint
    double noise_w = 0.0;                        // noise power per RU
    int num_ru = 1;                              // RUs per cell
    double ru_bandwidth_hz = 1.0;                // bandwidth per RU
    std::vector<std::vector<cell_id>> candidates;  // per endpoint, sorted ascending

    int num_cells() const { return static_cast<int>(cell_pos.size()); }
    int num_rcs() const { return num_cells() - num_mcs; }
    int num_ues() const { return static_cast<int>(ue_pos.size()); }
    int num_endpoints() const { return num_ues() + num_rcs(); }

    bool is_mc(cell_id c) const { return c < num_mcs; }
    bool is_ue(endpoint_id e) const { return e < num_ues(); }

    // RC k is cell (num_mcs + k) and endpoint (num_ues + k).
    cell_id rc_cell(endpoint_id e) const { return num_mcs + (e - num_ues()); }
    endpoint_id rc_endpoint(cell_id c) const { return num_ues() + (c - num_mcs); }

    double demand_of(endpoint_id e) const { return is_ue(e) ? demand_bps[e] : 0.0; }

    bool operator==(const scenario&) const = default;
};

/// Throws std::invalid_argument when a structural invariant is violated.
inline void validate(const scenario& s) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("scenario: " + msg); };
    if (s.num_mcs <= 0) fail("at least one MC required");
    if (s.num_cells() < s.num_mcs) fail("cell positions shorter than MC count");
    if (s.num_ru < 1) fail("num_ru must be >= 1");
    if (!(s.ru_bandwidth_hz > 0.0)) fail("ru_bandwidth_hz must be positive");
    if (!(s.noise_w > 0.0)) fail("noise_w must be positive");
    if (static_cast<int>(s.power_w.size()) != s.num_cells()) fail("power size mismatch");
    for (double p : s.power_w)
        if (!(p > 0.0)) fail("powers must be positive");
    if (static_cast<int>(s.demand_bps.size()) != s.num_ues()) fail("demand size mismatch");
    for (double d : s.demand_bps)
        if (!(d > 0.0)) fail("demands must be positive");
    if (s.gain.rows() != s.num_cells() || s.gain.cols() != s.num_endpoints())
        fail("gain matrix dimensions mismatch");
    for (double g : s.gain.data())
        if (!(g >= 0.0)) fail("gains must be nonnegative");
    if (static_cast<int>(s.candidates.size()) != s.num_endpoints()) fail("candidate list size mismatch");
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e) {
        const auto& cs = s.candidates[e];
        if (cs.empty()) fail("empty candidate set");
        for (cell_id c : cs) {
            if (c < 0 || c >= s.num_cells()) fail("candidate cell out of range");
            if (!s.is_ue(e) && !s.is_mc(c)) fail("relay candidate must be an MC");
            if (!s.is_ue(e) && c == s.rc_cell(e)) fail("relay cannot serve itself");
        }
        if (!std::is_sorted(cs.begin(), cs.end())) fail("candidate sets must be sorted");
        if (std::adjacent_find(cs.begin(), cs.end()) != cs.end()) fail("duplicate candidate");
    }
}

/// Copy of a scenario with every UE demand replaced by d_bps.
inline scenario with_uniform_demand(scenario s, double d_bps) {
    if (!(d_bps > 0.0)) throw std::invalid_argument("demand must be positive");
    std::fill(s.demand_bps.begin(), s.demand_bps.end(), d_bps);
    return s;
}

// ---------------------------------------------------------------------------
// Path loss
// ---------------------------------------------------------------------------

enum class path_loss_model { urban_macro, urban_micro };

/// 2 GHz urban path loss in dB; distance clamped to >= 10 m.
inline double path_loss_db(path_loss_model kind, double distance_m) {
    const double d_km = std::max(distance_m, 10.0) / 1000.0;
    if (kind == path_loss_model::urban_macro) return 128.1 + 37.6 * std::log10(d_km);
    return 140.7 + 36.7 * std::log10(d_km);
}

// ---------------------------------------------------------------------------
// Hexagonal HetNet generator
// ---------------------------------------------------------------------------

struct hexnet_params {
    int num_mc_sites = 7;
    double inter_site_distance_m = 500.0;
    int rcs_per_region = 2;
    int ues_per_region = 20;
    double carrier_hz = 2.0e9;
    double ru_bandwidth_hz = 180.0e3;
    double cell_bandwidth_hz = 20.0e6;
    double noise_dbm_per_hz = -174.0;
    double mc_power_mw_per_ru = 800.0;
    double rc_power_mw_per_ru = 50.0;
    double shadowing_std_db_mc = 6.0;
    double shadowing_std_db_rc = 3.0;
    int candidate_set_size = 4;
    std::uint64_t rng_seed = 1;
    double ue_demand_bps = 1.0e6;

    bool operator==(const hexnet_params&) const = default;
};

inline void validate(const hexnet_params& p) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("hexnet_params: " + msg); };
    if (p.num_mc_sites < 1) fail("num_mc_sites must be >= 1");
    if (!(p.inter_site_distance_m > 0.0)) fail("inter_site_distance_m must be positive");
    if (p.rcs_per_region < 1 || p.rcs_per_region > 8) fail("rcs_per_region must be in 1..8");
    if (p.ues_per_region < 1) fail("ues_per_region must be >= 1");
    if (!(p.carrier_hz > 0.0) || !(p.ru_bandwidth_hz > 0.0) || !(p.cell_bandwidth_hz > 0.0))
        fail("frequencies must be positive");
    if (!(p.ru_bandwidth_hz <= p.cell_bandwidth_hz)) fail("RU wider than cell bandwidth");
    if (!(p.mc_power_mw_per_ru > 0.0) || !(p.rc_power_mw_per_ru > 0.0)) fail("powers must be positive");
    if (!(p.shadowing_std_db_mc >= 0.0) || !(p.shadowing_std_db_rc >= 0.0))
        fail("shadowing std must be nonnegative");
    if (p.candidate_set_size < 2) fail("candidate_set_size must be >= 2");
    if (!(p.ue_demand_bps > 0.0)) fail("ue_demand_bps must be positive");
}

namespace detail {

// Hex region around `center`: the Voronoi cell of a triangular lattice whose
// nearest neighbors sit at multiples of 60 degrees at distance isd.
inline bool point_in_hex_region(position center, double isd, position p) {
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    const double half = isd / 2.0 + 1e-9;
    const double c60 = 0.5, s60 = std::sqrt(3.0) / 2.0;
    return std::abs(dx) <= half && std::abs(dx * c60 + dy * s60) <= half &&
           std::abs(-dx * c60 + dy * s60) <= half;
}

// Lattice sites in spiral order: center, then rings of 6k sites.
inline std::vector<position> hex_lattice_sites(int count, double isd) {
    std::vector<position> sites;
    sites.push_back({0.0, 0.0});
    // axial -> cartesian for a lattice with neighbors at 0, 60, ..., 300 degrees
    auto to_xy = [isd](int q, int r) {
        return position{isd * (q + 0.5 * r), isd * (std::sqrt(3.0) / 2.0) * r};
    };
    const int dq[6] = {1, 0, -1, -1, 0, 1};
    const int dr[6] = {0, 1, 1, 0, -1, -1};
    for (int ring = 1; static_cast<int>(sites.size()) < count; ++ring) {
        int q = ring, r = -ring;  // start corner of the ring
        for (int side = 0; side < 6; ++side) {
            for (int step = 0; step < ring; ++step) {
                sites.push_back(to_xy(q, r));
                q += dq[side];
                r += dr[side];
                if (static_cast<int>(sites.size()) == count) return sites;
            }
        }
    }
    sites.resize(count);
    return sites;
}

inline position sample_in_hex(std::mt19937_64& rng, position center, double isd) {
    const double circumradius = isd / std::sqrt(3.0);
    std::uniform_real_distribution<double> u(-circumradius, circumradius);
    for (;;) {
        position p{center.x + u(rng), center.y + u(rng)};
        if (point_in_hex_region(center, isd, p)) return p;
    }
}

}  // namespace detail

/// Randomized hexagonal HetNet per the configured layout. Pure function of
/// params (seed included): repeated calls produce bit-identical scenarios.
inline scenario generate_hexnet(const hexnet_params& p) {
    validate(p);
    std::mt19937_64 rng(p.rng_seed);

    scenario s;
    s.num_mcs = p.num_mc_sites;
    s.cell_pos = detail::hex_lattice_sites(p.num_mc_sites, p.inter_site_distance_m);

    std::vector<int> rc_region;  // region index per RC, used only during generation
    for (int site = 0; site < p.num_mc_sites; ++site)
        for (int k = 0; k < p.rcs_per_region; ++k) {
            s.cell_pos.push_back(detail::sample_in_hex(rng, s.cell_pos[site], p.inter_site_distance_m));
            rc_region.push_back(site);
        }
    for (int site = 0; site < p.num_mc_sites; ++site)
        for (int k = 0; k < p.ues_per_region; ++k)
            s.ue_pos.push_back(detail::sample_in_hex(rng, s.cell_pos[site], p.inter_site_distance_m));

    const int n_cells = s.num_cells();
    const int n_ues = s.num_ues();
    const int n_eps = s.num_endpoints();

    s.demand_bps.assign(n_ues, p.ue_demand_bps);
    s.power_w.resize(n_cells);
    for (cell_id c = 0; c < n_cells; ++c)
        s.power_w[c] = (s.is_mc(c) ? p.mc_power_mw_per_ru : p.rc_power_mw_per_ru) / 1000.0;

    s.noise_w = std::pow(10.0, (p.noise_dbm_per_hz - 30.0) / 10.0) * p.ru_bandwidth_hz;
    s.ru_bandwidth_hz = p.ru_bandwidth_hz;
    // usable RUs after guard bands, ~90% of the raw subcarrier count
    s.num_ru = static_cast<int>(std::lround(0.9 * p.cell_bandwidth_hz / p.ru_bandwidth_hz));

    auto endpoint_pos = [&](endpoint_id e) {
        return s.is_ue(e) ? s.ue_pos[e] : s.cell_pos[s.rc_cell(e)];
    };

    s.gain = gain_matrix(n_cells, n_eps);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    for (cell_id c = 0; c < n_cells; ++c) {
        const bool mc = s.is_mc(c);
        const auto model = mc ? path_loss_model::urban_macro : path_loss_model::urban_micro;
        const double shadow_std = mc ? p.shadowing_std_db_mc : p.shadowing_std_db_rc;
        for (endpoint_id e = 0; e < n_eps; ++e) {
            if (!s.is_ue(e) && s.rc_cell(e) == c) continue;  // an RC does not reach its own receiver
            const double pl = path_loss_db(model, distance_m(s.cell_pos[c], endpoint_pos(e)));
            const double shadow_db = shadow_std * unit_normal(rng);
            s.gain.at(c, e) = std::pow(10.0, -(pl + shadow_db) / 10.0);
        }
    }

    const int k_set = p.candidate_set_size;
    auto strongest = [&](endpoint_id e, bool mcs_only) {
        std::vector<cell_id> order;
        for (cell_id c = 0; c < (mcs_only ? s.num_mcs : n_cells); ++c)
            if (s.gain(c, e) > 0.0) order.push_back(c);
        std::stable_sort(order.begin(), order.end(), [&](cell_id a, cell_id b) {
            return s.power_w[a] * s.gain(a, e) > s.power_w[b] * s.gain(b, e);
        });
        if (static_cast<int>(order.size()) > k_set) order.resize(k_set);
        return order;
    };

    s.candidates.resize(n_eps);
    for (endpoint_id e = 0; e < n_eps; ++e) {
        auto cs = strongest(e, /*mcs_only=*/!s.is_ue(e));
        if (s.is_ue(e)) {
            // the geometrically nearest MC is always reachable, shadowing aside
            cell_id nearest = 0;
            for (cell_id m = 1; m < s.num_mcs; ++m)
                if (distance_m(s.cell_pos[m], s.ue_pos[e]) < distance_m(s.cell_pos[nearest], s.ue_pos[e]))
                    nearest = m;
            if (std::find(cs.begin(), cs.end(), nearest) == cs.end()) cs.back() = nearest;
        }
        std::sort(cs.begin(), cs.end());
        s.candidates[e] = std::move(cs);
    }

    validate(s);
    return s;
}

// ---------------------------------------------------------------------------
// Graph-derived gadget family
// ---------------------------------------------------------------------------

struct graph_instance {
    int num_nodes = 0;
    std::vector<std::pair<int, int>> edges;  // undirected, no self-loops

    bool operator==(const graph_instance&) const = default;
};

inline void validate(const graph_instance& g) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("graph: " + msg); };
    if (g.num_nodes < 2) fail("need at least 2 nodes");
    std::vector<std::pair<int, int>> seen;
    for (auto [u, v] : g.edges) {
        if (u < 0 || v < 0 || u >= g.num_nodes || v >= g.num_nodes) fail("edge endpoint out of range");
        if (u == v) fail("self-loop");
        seen.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) fail("duplicate edge");
}

namespace gadget {
// One MC, RC and UE per graph node. The RC route (access at SINR 3 plus an
// equal backhaul share) consumes the relay exactly in full, so any edge
// interference makes a neighboring active relay infeasible. The direct MC
// link carries SINR 1.25 and leaves load headroom, so a macro-served UE
// absorbs edge interference without breaching full load, yet stays costlier
// than the relay route.
inline constexpr double mc_ue_gain = 1.25;
inline constexpr double rc_ue_gain = 6.0;
inline constexpr double mc_rc_gain = 3.0;
inline constexpr double noise_w = 1.0;
inline constexpr double mc_power_w = 1.0;
inline constexpr double rc_power_w = 0.5;
inline constexpr double ue_demand_bps = 1.0;
inline constexpr double default_eps = 0.01;
}  // namespace gadget

/// Maps an undirected graph onto a network whose feasible relay activations
/// are exactly the independent sets of the graph, with energy decreasing in
/// the number of active relays. eps is the cross gain placed on each edge.
inline scenario mis_gadget(const graph_instance& g, double eps = gadget::default_eps) {
    validate(g);
    if (!(eps > 0.0) || eps >= 1.0) throw std::invalid_argument("mis_gadget: eps must be in (0,1)");

    const int n = g.num_nodes;
    scenario s;
    s.num_mcs = n;
    s.cell_pos.assign(2 * n, position{});
    s.ue_pos.assign(n, position{});
    s.demand_bps.assign(n, gadget::ue_demand_bps);
    s.power_w.resize(2 * n);
    for (int i = 0; i < n; ++i) {
        s.power_w[i] = gadget::mc_power_w;
        s.power_w[n + i] = gadget::rc_power_w;
    }
    s.noise_w = gadget::noise_w;
    s.num_ru = 1;
    s.ru_bandwidth_hz = 1.0;  // normalized so one RU carries log2(1+sinr) bit/s

    s.gain = gain_matrix(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        s.gain.at(i, i) = gadget::mc_ue_gain;          // MC i -> UE i
        s.gain.at(n + i, i) = gadget::rc_ue_gain;      // RC i -> UE i
        s.gain.at(i, n + i) = gadget::mc_rc_gain;      // MC i -> RC i receiver
    }
    for (auto [u, v] : g.edges) {
        s.gain.at(n + u, v) = eps;  // RC u -> UE v
        s.gain.at(n + v, u) = eps;  // RC v -> UE u
    }

    s.candidates.resize(2 * n);
    for (int i = 0; i < n; ++i) {
        s.candidates[i] = {i, n + i};  // UE i: own MC or own RC
        s.candidates[n + i] = {i};     // RC i: own MC as donor
    }

    validate(s);
    return s;
}

}  // namespace loadrelay
