#pragma once

// Association optimization: partial fixed-point iterations, the pairwise
// improvement test, the per-endpoint assignment map, the relay selection
// loop, the best-received-power baseline, and an exhaustive oracle.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "loadrelay/coupling.hpp"
#include "loadrelay/scenario.hpp"

namespace loadrelay {

enum class subset_policy {
    exact_l,  // iterate only the endpoints whose association changed
    all       // iterate every endpoint (full fixed point)
};

struct algorithm_config {
    int eta = 50;           // maximum loop rounds
    double eps1 = 1e-9;     // slack on the energy-sum comparison
    double eps2 = 1e-9;     // slack on the frozen-entry growth check
    subset_policy policy = subset_policy::exact_l;
    bool update_reference = false;  // rebase the comparison on each accepted association
    // When a round's joint candidate fails the improvement test, retry its
    // moves one endpoint at a time, each certified against the incumbent.
    bool refine_rejected = false;
    fp_options fp{};
};

struct improvement_verdict {
    bool improved = false;
    double candidate_energy_bound = 0.0;  // upper bound on the candidate's energy
    double reference_energy = 0.0;
    load_vector x_t;                      // partial fixed point under the candidate
    bool solver_converged = false;
    bool candidate_feasible = false;      // x_t cell loads within full load
};

inline std::vector<endpoint_id> all_endpoints(const scenario& s) {
    std::vector<endpoint_id> t(s.num_endpoints());
    for (int e = 0; e < s.num_endpoints(); ++e) t[e] = e;
    return t;
}

/// Endpoints on which two associations differ.
inline std::vector<endpoint_id> association_diff(const association& a, const association& b) {
    if (a.serving.size() != b.serving.size())
        throw std::invalid_argument("association_diff: size mismatch");
    std::vector<endpoint_id> l;
    for (endpoint_id e = 0; e < static_cast<int>(a.serving.size()); ++e)
        if (a.serving[e] != b.serving[e]) l.push_back(e);
    return l;
}

/// Single-entry update of the partial map G: F on endpoints inside t, the
/// identity elsewhere.
inline double g_update(const scenario& s, const load_vector& x, const association& a,
                       const std::vector<endpoint_id>& t, link l) {
    if (t.empty()) throw std::invalid_argument("g_update: empty update set");
    const link_topology topo = build_topology(s, a);
    const int id = topo.link_id(l);
    if (std::find(t.begin(), t.end(), l.rx) == t.end()) return x[id];
    return load_required(s, topo, x, l);
}

/// Fixed point of G(., a_hat, t) from x_start: entries of endpoints outside t
/// keep their starting values bit-exactly, entries inside t are iterated.
/// Divergence is reported in-band.
inline fixed_point_result async_fixed_point(const scenario& s, const association& a_hat,
                                            const std::vector<endpoint_id>& t,
                                            const load_vector& x_start, const fp_options& opt = {}) {
    if (t.empty()) throw std::invalid_argument("async_fixed_point: empty update set");
    const link_topology topo = build_topology(s, a_hat);
    if (static_cast<int>(x_start.size()) != topo.num_links())
        throw std::invalid_argument("async_fixed_point: x_start size mismatch");
    for (double v : x_start)
        if (!(v >= 0.0)) throw std::invalid_argument("async_fixed_point: x_start must be nonnegative");

    std::vector<char> in_t(s.num_endpoints(), 0);
    for (endpoint_id e : t) in_t.at(e) = 1;

    load_vector x = x_start;
    for (int it = 1; it <= opt.max_iter; ++it) {
        load_vector swept = sweep_loads(s, topo, x);
        double residual = 0.0;
        bool diverged = false;
        for (int id = 0; id < topo.num_links(); ++id) {
            if (!in_t[topo.cand_rx[id]]) {
                swept[id] = x[id];
                continue;
            }
            if (topo.active[id] && !(swept[id] <= opt.x_max)) diverged = true;
            const double d = std::abs(swept[id] - x[id]);
            if (d > residual) residual = d;
        }
        x = std::move(swept);
        if (diverged) return detail::finish_result(s, topo, std::move(x), it, false, opt.tol);
        if (!(residual > opt.tol) && std::isfinite(residual))
            return detail::finish_result(s, topo, std::move(x), it, true, opt.tol);
    }
    return detail::finish_result(s, topo, std::move(x), opt.max_iter, false, opt.tol);
}

/// Pairwise improvement test: does a_hat beat a_check on energy? x_check must
/// be the fixed point under a_check; t must contain every endpoint on which
/// the two associations differ. When warm_start is given, entries inside t
/// start from it instead of x_check (the limit is start-independent).
inline improvement_verdict check_improvement(const scenario& s, const association& a_hat,
                                             const association& a_check, const load_vector& x_check,
                                             const std::vector<endpoint_id>& t,
                                             const algorithm_config& cfg = {},
                                             const load_vector* warm_start = nullptr) {
    if (t.empty()) throw std::invalid_argument("check_improvement: empty update set");
    std::vector<char> in_t(s.num_endpoints(), 0);
    for (endpoint_id e : t) in_t.at(e) = 1;
    const auto l = association_diff(a_hat, a_check);
    for (endpoint_id e : l)
        if (!in_t[e]) throw std::invalid_argument("check_improvement: t must contain every changed endpoint");

    const link_topology topo_hat = build_topology(s, a_hat);
    const link_topology topo_check = build_topology(s, a_check);

    load_vector start = x_check;
    if (warm_start) {
        if (warm_start->size() != start.size())
            throw std::invalid_argument("check_improvement: warm start size mismatch");
        for (int id = 0; id < topo_hat.num_links(); ++id)
            if (in_t[topo_hat.cand_rx[id]]) start[id] = std::max((*warm_start)[id], 0.0);
    }

    improvement_verdict v;
    fixed_point_result part = async_fixed_point(s, a_hat, t, start, cfg.fp);
    v.solver_converged = part.converged;
    v.candidate_feasible = part.feasible;
    v.x_t = std::move(part.loads);
    v.reference_energy = energy(s, topo_check, x_check);

    double cand_sum_t = 0.0, check_sum_t = 0.0, frozen_sum = 0.0;
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e) {
        const cell_id hat_cell = a_hat.serving[e];
        const double hat_term = s.power_w[hat_cell] * v.x_t[topo_hat.slot(e, hat_cell)];
        if (in_t[e]) {
            cand_sum_t += hat_term;
            const cell_id chk_cell = a_check.serving[e];
            check_sum_t += s.power_w[chk_cell] * x_check[topo_check.slot(e, chk_cell)];
        } else {
            frozen_sum += hat_term;
        }
    }
    v.candidate_energy_bound = s.num_ru * (cand_sum_t + frozen_sum);

    if (!v.solver_converged) return v;
    if (l.empty()) return v;  // identical associations are never an improvement

    const bool cond1 = cand_sum_t < check_sum_t + cfg.eps1;
    bool cond2 = true;
    for (endpoint_id e = 0; e < s.num_endpoints() && cond2; ++e) {
        if (in_t[e]) continue;
        const link lk{a_hat.serving[e], e};
        const double updated = load_required(s, topo_hat, v.x_t, lk);
        const double frozen = x_check[topo_check.slot(e, a_check.serving[e])];
        cond2 = updated <= frozen + cfg.eps2;
    }
    v.improved = cond1 && cond2;
    return v;
}

/// Assignment map: each endpoint moves to the candidate minimizing the energy
/// product p*x. Non-finite entries are skipped; ties break to the lowest cell
/// id (candidate sets are sorted). Throws when an endpoint has no usable entry.
inline association assign(const scenario& s, const load_vector& x) {
    association a;
    a.serving.resize(s.num_endpoints());
    int id = 0;
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e) {
        cell_id best = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        for (cell_id c : s.candidates[e]) {
            const double cost = s.power_w[c] * x[id++];
            if (std::isfinite(cost) && cost < best_cost) {
                best = c;
                best_cost = cost;
            }
        }
        if (best < 0) throw std::runtime_error("assign: no usable candidate entry");
        a.serving[e] = best;
    }
    if (id != static_cast<int>(x.size())) throw std::invalid_argument("assign: load vector size mismatch");
    return a;
}

/// Best-received-power association: argmax p*g per endpoint, ties to the
/// lowest cell id.
inline association baseline_association(const scenario& s) {
    association a;
    a.serving.resize(s.num_endpoints());
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e) {
        cell_id best = s.candidates[e].front();
        double best_rx = -1.0;
        for (cell_id c : s.candidates[e]) {
            const double rx = s.power_w[c] * s.gain(c, e);
            if (rx > best_rx) {
                best_rx = rx;
                best = c;
            }
        }
        a.serving[e] = best;
    }
    return a;
}

namespace detail {

struct candidate_move {
    endpoint_id ep;
    cell_id to;
    double est_saving;
};

// Rank single-association moves by estimated energy saving. The estimate
// prices a relay route as its access product plus the marginal backhaul
// share at the relay's current backhaul SINR; the assignment map's bare
// product ignores that tax and over-proposes relay moves.
inline std::vector<candidate_move> screened_moves(const scenario& s, const association& a,
                                                  const load_vector& x) {
    const link_topology topo = build_topology(s, a);
    const double rate_scale = s.num_ru * s.ru_bandwidth_hz;

    std::vector<double> bh_tax_per_bit(s.num_cells(), 0.0);  // per relay cell, per bit/s
    for (endpoint_id k = s.num_ues(); k < s.num_endpoints(); ++k) {
        const cell_id donor = a.serving[k];
        const double g = sinr(s, topo, x, link{donor, k});
        bh_tax_per_bit[s.rc_cell(k)] =
            g > 0.0 ? s.power_w[donor] / (rate_scale * spectral_efficiency(g))
                    : std::numeric_limits<double>::infinity();
    }

    auto route_cost = [&](endpoint_id e, cell_id c) {
        const double load = x[topo.slot(e, c)];
        double cost = s.power_w[c] * load;
        if (s.is_ue(e) && !s.is_mc(c)) cost += bh_tax_per_bit[c] * s.demand_bps[e];
        return cost;
    };

    std::vector<candidate_move> moves;
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e) {
        const double current = route_cost(e, a.serving[e]);
        if (!std::isfinite(current)) continue;
        for (cell_id c : s.candidates[e]) {
            if (c == a.serving[e]) continue;
            const double candidate = route_cost(e, c);
            if (!std::isfinite(candidate)) continue;
            moves.push_back({e, c, current - candidate});
        }
    }
    std::sort(moves.begin(), moves.end(), [](const candidate_move& a, const candidate_move& b) {
        if (a.est_saving != b.est_saving) return a.est_saving > b.est_saving;
        if (a.ep != b.ep) return a.ep < b.ep;
        return a.to < b.to;
    });
    return moves;
}

}  // namespace detail

/// Relays-off start: the strongest MC candidate per endpoint. Endpoints
/// whose candidate set has no MC keep their best-power choice.
inline association macro_only_association(const scenario& s) {
    association a = baseline_association(s);
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e) {
        cell_id best = -1;
        double best_rx = -1.0;
        for (cell_id c : s.candidates[e]) {
            if (!s.is_mc(c)) continue;
            const double rx = s.power_w[c] * s.gain(c, e);
            if (rx > best_rx) {
                best_rx = rx;
                best = c;
            }
        }
        if (best >= 0) a.serving[e] = best;
    }
    return a;
}

/// Relay selection: iterate the assignment map from a_init, certifying each
/// visited association with the improvement test before adopting it.
/// Candidates whose partial fixed point diverges or breaches full load are
/// skipped. By default the comparison reference stays at a_init; with
/// update_reference it rebases onto each accepted association, and with
/// refine_rejected a rejected joint candidate is additionally decomposed into
/// per-endpoint moves, each certified on its own against the incumbent over
/// the full update set (a restricted set would veto any move that raises
/// interference anywhere). Every accepted step is a certified improvement, so
/// the result never degrades the initial energy beyond the numerical slack.
inline association relay_selection(const scenario& s, const association& a_init,
                                   const algorithm_config& cfg = {}) {
    validate(s, a_init);
    const fixed_point_result init = fixed_point(s, a_init, {}, cfg.fp);
    if (!init.feasible) throw std::invalid_argument("relay_selection: infeasible initial association");

    // incumbent: last certified association, kept with its fixed point
    association a_best = a_init;
    load_vector x_best = init.loads;
    double e_best = init.energy;

    // the comparison reference tracks the incumbent in either variant mode
    const bool monotone = cfg.update_reference || cfg.refine_rejected;
    const auto everyone = all_endpoints(s);

    association a_prev = a_init;
    load_vector x = init.loads;
    const double drift_cap = 1e9;  // the assignment-map drift has blown up past recovery

    // moves already certified against the current incumbent, keyed by
    // candidate-link slot and invalidated whenever the incumbent changes
    long incumbent_version = 0;
    std::vector<int> cand_offset(s.num_endpoints() + 1, 0);
    for (endpoint_id e = 0; e < s.num_endpoints(); ++e)
        cand_offset[e + 1] = cand_offset[e] + static_cast<int>(s.candidates[e].size());
    std::vector<long> tried(cand_offset.back(), -1);
    auto move_slot = [&](endpoint_id e, cell_id c) {
        const auto& cs = s.candidates[e];
        return cand_offset[e] +
               static_cast<int>(std::find(cs.begin(), cs.end(), c) - cs.begin());
    };

    // certify a candidate against the incumbent and adopt it when it is a
    // feasible improvement; over the full update set the partial fixed point
    // is the candidate's own, otherwise rebase with a warm full solve
    auto adopt_if_better = [&](const association& candidate,
                               const std::vector<endpoint_id>& t, const load_vector* warm) {
        improvement_verdict v = check_improvement(s, candidate, a_best, x_best, t, cfg, warm);
        if (!v.improved || !v.candidate_feasible) return false;
        const double slack = s.num_endpoints() * cfg.eps1;
        if (t.size() == everyone.size()) {
            if (v.candidate_energy_bound >= e_best + slack) return false;
            a_best = candidate;
            x_best = std::move(v.x_t);
            e_best = v.candidate_energy_bound;
        } else {
            const fixed_point_result full = fixed_point(s, candidate, x_best, cfg.fp);
            if (!full.feasible || full.energy >= e_best + slack) return false;
            a_best = candidate;
            x_best = full.loads;
            e_best = full.energy;
        }
        ++incumbent_version;
        return true;
    };

    for (int round = 1; round <= cfg.eta; ++round) {
        const association a_k = assign(s, x);
        if (a_k == a_prev && !cfg.refine_rejected) break;
        bool advanced = false;

        if (a_k != a_prev) {
            const link_topology topo_k = build_topology(s, a_k);
            x = sweep_loads(s, topo_k, x);
            bool sane = true;
            for (double v : x)
                if (!std::isfinite(v) || v > drift_cap) sane = false;
            if (!sane) {
                if (!cfg.refine_rejected) break;
                x = x_best;  // restart the drift from the incumbent
            }

            if (sane && monotone) {
                const auto l = association_diff(a_k, a_best);
                if (!l.empty())
                    advanced = adopt_if_better(
                        a_k, cfg.policy == subset_policy::exact_l ? l : everyone, &x);
            } else if (sane) {
                const auto l = association_diff(a_k, a_init);
                if (!l.empty()) {
                    const auto& t = cfg.policy == subset_policy::exact_l ? l : everyone;
                    const improvement_verdict v =
                        check_improvement(s, a_k, a_init, init.loads, t, cfg, &x);
                    if (v.improved && v.candidate_feasible) {
                        a_best = a_k;
                        advanced = true;
                    }
                }
            }
        }

        if (cfg.refine_rejected && !advanced) {
            // decompose into single moves ranked by a backhaul-aware saving
            // estimate. A short sweep preview filters the list; survivors are
            // certified over the full set (a restricted set would veto any
            // move that raises interference anywhere, which rules out exactly
            // the useful ones).
            for (const auto& mv : detail::screened_moves(s, a_best, x_best)) {
                if (a_best.serving[mv.ep] == mv.to) continue;  // stale after an accept
                const int slot = move_slot(mv.ep, mv.to);
                if (tried[slot] == incumbent_version) continue;
                tried[slot] = incumbent_version;

                association candidate = a_best;
                candidate.serving[mv.ep] = mv.to;
                const link_topology topo_c = build_topology(s, candidate);
                load_vector preview = x_best;
                for (int sweep = 0; sweep < 3; ++sweep) preview = sweep_loads(s, topo_c, preview);
                if (!(energy(s, topo_c, preview) < e_best)) continue;

                advanced |= adopt_if_better(candidate, everyone, &x_best);
            }
        }

        if (a_k == a_prev && !advanced) break;
        a_prev = a_k;
    }
    return a_best;
}

struct brute_force_result {
    association best;
    double energy = std::numeric_limits<double>::infinity();
    bool feasible = false;         // false when no association converges within load bounds
    std::uint64_t enumerated = 0;
    std::uint64_t feasible_count = 0;
};

/// Exhaustive oracle: enumerate every association, solve each fixed point
/// from zero, and return the feasible association of minimum energy. Guarded
/// by the size of the search space.
inline brute_force_result brute_force(const scenario& s, const fp_options& opt = {},
                                      double guard = 1e6) {
    double space = 1.0;
    for (const auto& cs : s.candidates) space *= static_cast<double>(cs.size());
    if (space > guard) throw std::invalid_argument("brute_force: search space exceeds guard");

    brute_force_result out;
    const int n = s.num_endpoints();
    std::vector<int> pick(n, 0);
    association a;
    a.serving.resize(n);
    for (;;) {
        for (endpoint_id e = 0; e < n; ++e) a.serving[e] = s.candidates[e][pick[e]];
        const fixed_point_result res = fixed_point(s, a, {}, opt);
        ++out.enumerated;
        if (res.feasible) {
            ++out.feasible_count;
            if (res.energy < out.energy) {
                out.energy = res.energy;
                out.best = a;
                out.feasible = true;
            }
        }
        int e = 0;
        while (e < n && ++pick[e] == static_cast<int>(s.candidates[e].size())) pick[e++] = 0;
        if (e == n) break;
    }
    return out;
}

}  // namespace loadrelay
