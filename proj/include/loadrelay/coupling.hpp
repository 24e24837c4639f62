#pragma once

// Load coupling: link topology with orthogonality sets, SINR and per-link
// load evaluation, fixed-point computation, feasibility and energy.
//
// Loads are tracked for every candidate link, not just the serving ones.
// A candidate entry is evaluated as if that link were activated: orthogonality
// follows the same per-cell rules, the receiver's current serving link is
// displaced (it would not exist), and only genuinely active links contribute
// interference or count toward cell load.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "loadrelay/scenario.hpp"

namespace loadrelay {

/// Serving cell per UE and donor MC per RC, indexed by endpoint.
struct association {
    std::vector<cell_id> serving;

    bool operator==(const association&) const = default;
};

inline void validate(const scenario& s, const association& a) {
    if (static_cast<int>(a.serving.size()) != s.num_endpoints())
        throw std::invalid_argument("association: size mismatch");
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e) {
        const auto& cs = s.candidates[e];
        if (std::find(cs.begin(), cs.end(), a.serving[e]) == cs.end())
            throw std::invalid_argument("association: serving cell outside candidate set");
    }
}

/// Directed link from a transmitting cell to a receiving endpoint. A link is
/// backhaul when the receiver is an RC endpoint, access otherwise.
struct link {
    cell_id tx = -1;
    endpoint_id rx = -1;

    bool operator==(const link&) const = default;
};

/// Candidate-link layout plus everything derived from one association:
/// active links, served sets, link demands and per-link orthogonality sets.
/// Entries exist for every candidate link; sets are built "as if activated"
/// for candidates that are not currently serving.
struct link_topology {
    association assoc;

    // layout: one entry per candidate link, endpoint-major
    std::vector<int> cand_offset;   // size num_endpoints + 1
    std::vector<cell_id> cand_cell; // flat, aligned with load vectors
    std::vector<endpoint_id> cand_rx;

    std::vector<int> active_id;     // per endpoint: serving link id, -1 when pruned (idle relay)
    std::vector<char> active;       // per link id
    std::vector<double> demand;     // per link id, bits/s (same for all candidates of an endpoint)
    std::vector<std::vector<int>> ortho;  // per link id: sorted link ids orthogonal to it

    std::vector<std::vector<endpoint_id>> served_ues;  // per cell
    std::vector<std::vector<endpoint_id>> donored_rcs; // per MC: RC endpoints with an active backhaul

    int num_links() const { return static_cast<int>(cand_cell.size()); }

    int slot(endpoint_id e, cell_id c) const {
        for (int id = cand_offset[e]; id < cand_offset[e + 1]; ++id)
            if (cand_cell[id] == c) return id;
        return -1;
    }
    link link_of(int id) const { return {cand_cell[id], cand_rx[id]}; }
    int link_id(link l) const {
        const int id = slot(l.rx, l.tx);
        if (id < 0) throw std::invalid_argument("link outside candidate space");
        return id;
    }
};

/// Fraction-of-RUs load per candidate link, aligned with the topology layout.
using load_vector = std::vector<double>;

struct fp_options {
    double tol = 1e-9;       // sup-norm residual for convergence
    int max_iter = 10000;
    double x_max = 10.0;     // divergence threshold on active loads
};

struct fixed_point_result {
    load_vector loads;
    int iterations = 0;
    bool converged = false;
    bool feasible = false;            // converged and every cell load <= 1
    std::vector<double> cell_load;    // per cell, active links only
    double energy = 0.0;              // num_ru * sum of p*x over active links
};

inline link_topology build_topology(const scenario& s, const association& a) {
    validate(s, a);

    link_topology t;
    t.assoc = a;

    const int n_eps = s.num_endpoints();
    t.cand_offset.resize(n_eps + 1);
    t.cand_offset[0] = 0;
    for (endpoint_id e = 0; e < n_eps; ++e)
        t.cand_offset[e + 1] = t.cand_offset[e] + static_cast<int>(s.candidates[e].size());
    t.cand_cell.reserve(t.cand_offset[n_eps]);
    t.cand_rx.reserve(t.cand_offset[n_eps]);
    for (endpoint_id e = 0; e < n_eps; ++e)
        for (cell_id c : s.candidates[e]) {
            t.cand_cell.push_back(c);
            t.cand_rx.push_back(e);
        }

    t.served_ues.assign(s.num_cells(), {});
    for (endpoint_id e = 0; e < s.num_ues(); ++e)
        t.served_ues[a.serving[e]].push_back(e);

    // backhaul demand aggregates the served UEs; idle relays are pruned
    std::vector<double> backhaul_bps(n_eps, 0.0);
    for (endpoint_id e = s.num_ues(); e < n_eps; ++e)
        for (endpoint_id u : t.served_ues[s.rc_cell(e)]) backhaul_bps[e] += s.demand_bps[u];

    t.donored_rcs.assign(s.num_cells(), {});
    t.active_id.assign(n_eps, -1);
    t.active.assign(t.num_links(), 0);
    t.demand.resize(t.num_links());
    for (endpoint_id e = 0; e < n_eps; ++e) {
        const double r = s.is_ue(e) ? s.demand_bps[e] : backhaul_bps[e];
        for (int id = t.cand_offset[e]; id < t.cand_offset[e + 1]; ++id) t.demand[id] = r;
        const bool pruned = !s.is_ue(e) && backhaul_bps[e] == 0.0;
        if (!pruned) {
            const int id = t.slot(e, a.serving[e]);
            t.active_id[e] = id;
            t.active[id] = 1;
            if (!s.is_ue(e)) t.donored_rcs[a.serving[e]].push_back(e);
        }
    }

    // active links transmitted by each cell: accesses, then backhauls for MCs
    std::vector<std::vector<int>> own(s.num_cells());
    for (cell_id c = 0; c < s.num_cells(); ++c) {
        for (endpoint_id u : t.served_ues[c]) own[c].push_back(t.active_id[u]);
        for (endpoint_id k : t.donored_rcs[c]) own[c].push_back(t.active_id[k]);
    }

    t.ortho.resize(t.num_links());
    for (int id = 0; id < t.num_links(); ++id) {
        const cell_id i = t.cand_cell[id];
        const endpoint_id j = t.cand_rx[id];
        auto& set = t.ortho[id];
        set = own[i];
        set.push_back(id);  // a link is orthogonal to itself
        if (s.is_ue(j)) {
            if (!s.is_mc(i)) {
                // RC access: the relay's own links plus the backhaul feeding it
                const endpoint_id k = s.rc_endpoint(i);
                set.push_back(t.slot(k, a.serving[k]));
            }
        } else {
            // backhaul: donor's links plus everything the relay itself transmits
            const cell_id k_cell = s.rc_cell(j);
            set.insert(set.end(), own[k_cell].begin(), own[k_cell].end());
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }
    return t;
}

namespace detail {

// Active links in id order with their p*x weights, rebuilt once per sweep.
struct active_view {
    std::vector<int> ids;
    std::vector<double> weight;

    active_view(const scenario& s, const link_topology& t, const load_vector& x) {
        ids.reserve(s.num_endpoints());
        weight.reserve(s.num_endpoints());
        for (endpoint_id u = 0; u < s.num_endpoints(); ++u) {
            const int id = t.active_id[u];
            if (id < 0) continue;
            ids.push_back(id);
            weight.push_back(s.power_w[t.cand_cell[id]] * x[id]);
        }
    }
};

// Interference at the receiver of candidate link `id`: every active link
// except the orthogonal ones and the receiver's own serving link, which a
// candidate activation would displace. Summed term by term so the update map
// is exactly monotone in x.
inline double interference_at(const scenario& s, const link_topology& t, const active_view& act,
                              int id) {
    const endpoint_id j = t.cand_rx[id];
    const int displaced = t.active_id[j];
    const auto& orth = t.ortho[id];
    double inter = 0.0;
    std::size_t oi = 0;
    for (std::size_t ai = 0; ai < act.ids.size(); ++ai) {
        const int m = act.ids[ai];
        while (oi < orth.size() && orth[oi] < m) ++oi;
        if (oi < orth.size() && orth[oi] == m) continue;
        if (m == displaced) continue;
        inter += act.weight[ai] * s.gain(t.cand_cell[m], j);
    }
    return inter;
}

inline double spectral_efficiency(double sinr) { return std::log1p(sinr) / std::numbers::ln2; }

}  // namespace detail

/// SINR of a candidate link under loads x. Only active links interfere;
/// orthogonal links are excluded, as is the link the candidate would replace.
inline double sinr(const scenario& s, const link_topology& t, const load_vector& x, link l) {
    const int id = t.link_id(l);
    const double signal = s.power_w[l.tx] * s.gain(l.tx, l.rx);
    const detail::active_view act(s, t, x);
    return signal / (detail::interference_at(s, t, act, id) + s.noise_w);
}

/// Per-link load update F_ij(x): RUs needed to carry the link demand at the
/// current SINR. Returns 0 for zero demand and +inf for an unusable link
/// (zero received power with positive demand), which callers report as
/// divergence rather than an error.
inline double load_required(const scenario& s, const link_topology& t, const load_vector& x, link l) {
    const int id = t.link_id(l);
    const double r = t.demand[id];
    if (r == 0.0) return 0.0;
    const double g = sinr(s, t, x, l);
    if (g <= 0.0) return std::numeric_limits<double>::infinity();
    return r / (s.num_ru * s.ru_bandwidth_hz * detail::spectral_efficiency(g));
}

/// One synchronous application of F over every candidate link.
inline load_vector sweep_loads(const scenario& s, const link_topology& t, const load_vector& x) {
    const detail::active_view act(s, t, x);
    load_vector next(t.num_links());
    const double rate_scale = s.num_ru * s.ru_bandwidth_hz;
    for (int id = 0; id < t.num_links(); ++id) {
        const double r = t.demand[id];
        if (r == 0.0) {
            next[id] = 0.0;
            continue;
        }
        const cell_id i = t.cand_cell[id];
        const endpoint_id j = t.cand_rx[id];
        const double signal = s.power_w[i] * s.gain(i, j);
        if (signal <= 0.0) {
            next[id] = std::numeric_limits<double>::infinity();
            continue;
        }
        const double g = signal / (detail::interference_at(s, t, act, id) + s.noise_w);
        next[id] = r / (rate_scale * detail::spectral_efficiency(g));
    }
    return next;
}

/// Per-cell load: what a cell transmits, plus the backhaul feeding it when
/// the cell is a relay. Active links only.
inline std::vector<double> cell_loads(const scenario& s, const link_topology& t, const load_vector& x) {
    std::vector<double> load(s.num_cells(), 0.0);
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e) {
        const int id = t.active_id[e];
        if (id < 0) continue;
        load[t.cand_cell[id]] += x[id];
        if (!s.is_ue(e)) load[s.rc_cell(e)] += x[id];  // backhaul also occupies the relay
    }
    return load;
}

/// Total transmission energy num_ru * sum of p*x over active links.
inline double energy(const scenario& s, const link_topology& t, const load_vector& x) {
    double e = 0.0;
    for (endpoint_id ep = 0; ep < s.num_endpoints(); ++ep) {
        const int id = t.active_id[ep];
        if (id < 0) continue;
        e += s.power_w[t.cand_cell[id]] * x[id];
    }
    return s.num_ru * e;
}

inline double energy(const scenario& s, const association& a, const load_vector& x) {
    return energy(s, build_topology(s, a), x);
}

namespace detail {

inline fixed_point_result finish_result(const scenario& s, const link_topology& t, load_vector x,
                                        int iterations, bool converged, double tol) {
    fixed_point_result r;
    r.loads = std::move(x);
    r.iterations = iterations;
    r.converged = converged;
    r.cell_load = cell_loads(s, t, r.loads);
    const double slack = 10.0 * tol;
    r.feasible = converged &&
                 std::all_of(r.cell_load.begin(), r.cell_load.end(),
                             [&](double l) { return l <= 1.0 + slack; });
    r.energy = energy(s, t, r.loads);
    return r;
}

}  // namespace detail

/// Picard iteration x <- F(x) over all candidate links from x0 (default all
/// zeros). Active entries feed interference; candidate-only entries are
/// tracked but never interfere. Divergence (an active load passing x_max, or
/// running out of iterations) is reported in-band via converged=false.
inline fixed_point_result fixed_point(const scenario& s, const link_topology& t,
                                      load_vector x0 = {}, const fp_options& opt = {}) {
    if (x0.empty()) x0.assign(t.num_links(), 0.0);
    if (static_cast<int>(x0.size()) != t.num_links())
        throw std::invalid_argument("fixed_point: x0 size mismatch");
    for (double v : x0)
        if (!(v >= 0.0)) throw std::invalid_argument("fixed_point: x0 must be nonnegative");

    load_vector x = std::move(x0);
    for (int it = 1; it <= opt.max_iter; ++it) {
        load_vector next = sweep_loads(s, t, x);
        for (int id = 0; id < t.num_links(); ++id) {
            if (t.active[id] && !(next[id] <= opt.x_max))
                return detail::finish_result(s, t, std::move(next), it, false, opt.tol);
        }
        double residual = 0.0;
        for (int id = 0; id < t.num_links(); ++id) {
            const double d = std::abs(next[id] - x[id]);
            if (d > residual) residual = d;
        }
        x = std::move(next);
        if (!(residual > opt.tol) && std::isfinite(residual))
            return detail::finish_result(s, t, std::move(x), it, true, opt.tol);
    }
    return detail::finish_result(s, t, std::move(x), opt.max_iter, false, opt.tol);
}

inline fixed_point_result fixed_point(const scenario& s, const association& a,
                                      load_vector x0 = {}, const fp_options& opt = {}) {
    return fixed_point(s, build_topology(s, a), std::move(x0), opt);
}

}  // namespace loadrelay
