#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "polystab/chain.hpp"
#include "polystab/graph.hpp"
#include "polystab/linalg.hpp"
#include "polystab/pphs.hpp"
#include "polystab/wmdp.hpp"

namespace polystab {

// ---------------------------------------------------------------------------
// Brute-force oracle for the maximum expected mean payoff

namespace detail {

/// Probability of eventually reaching each BSCC from `from`, by solving the
/// absorption linear system over the transient states.
inline std::vector<double> absorption_probabilities(const Wdtmc& c,
                                                    const std::vector<std::vector<int>>& bsccs,
                                                    int from) {
    const int n = c.state_count;
    std::vector<int> bscc_of(n, -1);
    for (size_t b = 0; b < bsccs.size(); ++b)
        for (int s : bsccs[b]) bscc_of[s] = static_cast<int>(b);

    std::vector<int> transients;
    std::vector<int> tindex(n, -1);
    for (int s = 0; s < n; ++s) {
        if (bscc_of[s] < 0) {
            tindex[s] = static_cast<int>(transients.size());
            transients.push_back(s);
        }
    }
    std::vector<double> reach(bsccs.size(), 0.0);
    if (bscc_of[from] >= 0) {
        reach[bscc_of[from]] = 1.0;
        return reach;
    }
    const int t = static_cast<int>(transients.size());
    for (size_t b = 0; b < bsccs.size(); ++b) {
        // (I - Q) z = r,  r(s) = mass from s straight into BSCC b.
        Matrix a(t, std::vector<double>(t, 0.0));
        std::vector<double> rhs(t, 0.0);
        for (int i = 0; i < t; ++i) {
            a[i][i] = 1.0;
            for (const auto& e : c.rows[transients[i]]) {
                if (e.prob <= 0.0) continue;
                if (tindex[e.to] >= 0) a[i][tindex[e.to]] -= e.prob;
                else if (bscc_of[e.to] == static_cast<int>(b)) rhs[i] += e.prob;
            }
        }
        std::vector<double> z = solve_linear(std::move(a), std::move(rhs));
        reach[b] = z[tindex[from]];
    }
    return reach;
}

}  // namespace detail

/// Maximum over all memoryless deterministic policies of the reachability-
/// weighted BSCC effective weights. Independent of the LP pipeline.
inline double oracle_max_mean_payoff(const Wmdp& m, std::uint64_t policy_cap = kDefaultPolicyCap) {
    std::uint64_t count = 1;
    for (int s = 0; s < m.state_count; ++s) {
        const std::uint64_t k = m.actions[s].size();
        if (k == 0) throw ValidationError("blocking state " + std::to_string(s));
        if (count > policy_cap / k + 1) count = policy_cap + 1;
        else count *= k;
        if (count > policy_cap)
            throw EnumerationTooLarge("policy count exceeds cap of " + std::to_string(policy_cap));
    }

    double best = -kInf;
    MemorylessPolicy rho;
    rho.choice.assign(m.state_count, 0);
    while (true) {
        Wdtmc chain = induce(m, rho);
        // All bottom components, so that every non-bottom state is genuinely
        // transient in the absorption system; unreachable ones get mass 0.
        SccPartition part = scc_decompose(chain);
        std::vector<std::vector<int>> bsccs;
        for (size_t i = 0; i < part.components.size(); ++i)
            if (part.is_bottom[i]) bsccs.push_back(part.components[i]);
        std::vector<double> reach = detail::absorption_probabilities(chain, bsccs, chain.init_state);
        double value = 0.0;
        bool infinite = false;
        for (size_t b = 0; b < bsccs.size(); ++b) {
            if (reach[b] <= 1e-15) continue;
            EffectiveWeight w = effective_weight(chain, bsccs[b]);
            if (std::isinf(w.value)) { infinite = true; break; }
            value += reach[b] * w.value;
        }
        if (infinite) return kInf;
        best = std::max(best, value);

        int s = m.state_count - 1;
        while (s >= 0) {
            if (++rho.choice[s] < static_cast<int>(m.actions[s].size())) break;
            rho.choice[s] = 0;
            --s;
        }
        if (s < 0) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Monte-Carlo chain simulation

struct SimulationReport {
    int runs = 0;
    long long horizon = 0;
    std::vector<double> partial_means;  // per run: S_n / n
    double estimate = 0.0;              // mean of partial means
    double negative_fraction = 0.0;     // fraction of runs with S_n/n < 0
    int stuck_runs = 0;                 // PPHS runs that reached a facet with no guard
};

namespace detail {

inline std::mt19937_64 run_rng(std::uint64_t seed, int run) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(run)};
    return std::mt19937_64(seq);
}

inline void finalize_report(SimulationReport& rep) {
    double sum = 0.0;
    int negatives = 0;
    for (double v : rep.partial_means) {
        sum += v;
        if (v < 0.0) ++negatives;
    }
    rep.estimate = rep.partial_means.empty() ? 0.0 : sum / rep.partial_means.size();
    rep.negative_fraction =
        rep.partial_means.empty() ? 0.0 : static_cast<double>(negatives) / rep.partial_means.size();
}

}  // namespace detail

/// Random walks over the chain; reproducible for a fixed seed (per-run
/// generators are derived from (seed, run index)).
inline SimulationReport simulate_chain(const Wdtmc& c, long long horizon, int runs, std::uint64_t seed) {
    if (horizon < 1 || runs < 1) throw ValidationError("simulate_chain: horizon and runs must be >= 1");
    SimulationReport rep;
    rep.runs = runs;
    rep.horizon = horizon;
    rep.partial_means.reserve(runs);
    for (int r = 0; r < runs; ++r) {
        std::mt19937_64 rng = detail::run_rng(seed, r);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        int state = c.init_state;
        double sum = 0.0;
        bool infinite = false;
        for (long long step = 0; step < horizon; ++step) {
            const auto& row = c.rows[state];
            double u = unif(rng);
            int chosen = row.back().to;
            double w = row.back().weight;
            for (const auto& e : row) {
                if (u < e.prob) { chosen = e.to; w = e.weight; break; }
                u -= e.prob;
            }
            if (std::isinf(w)) { infinite = true; break; }
            sum += w;
            state = chosen;
        }
        rep.partial_means.push_back(infinite ? kInf : sum / static_cast<double>(horizon));
    }
    detail::finalize_report(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// PPHS trajectory sampling

/// One discrete switch of a sampled execution, on the abstraction's facet
/// granularity (from/to are canonical facet ids).
struct PphsSimStep {
    int loc = 0;
    int from_facet = 0;
    int to_facet = 0;
    double log_ratio = 0.0;
};

namespace detail {

/// Fixed finite generator set for flow sampling: optimal vertices of the
/// (box-truncated) flow polyhedron under the 2n axis objectives.
inline std::vector<std::vector<double>> flow_generators(const Polyhedron& flow,
                                                        const SolverOptions& opt) {
    const int n = flow.dim;
    std::vector<std::vector<double>> gens;
    for (int i = 0; i < n; ++i) {
        for (double sigma : {1.0, -1.0}) {
            LinearProgram lp;
            lp.objective.assign(n, 0.0);
            lp.objective[i] = sigma;
            lp.bounds.assign(n, Bounds{-1000.0, 1000.0});
            for (const auto& h : flow.halfspaces) lp.constraints.push_back({h.normal, h.rel, h.offset});
            LpSolution sol = solve(lp, opt);
            if (sol.status != LpStatus::Optimal) continue;
            bool dup = false;
            for (const auto& g : gens) {
                double d = 0.0;
                for (int k = 0; k < n; ++k) d = std::max(d, std::fabs(g[k] - sol.point[k]));
                if (d <= 1e-9) dup = true;
            }
            if (!dup) gens.push_back(sol.point);
        }
    }
    return gens;
}

}  // namespace detail

/// Samples executions of the PPHS: each step draws a uniform convex mixture
/// of two flow generators, advances to the first facet hit, and applies the
/// guard's distribution. The state is renormalized to unit infinity-norm
/// after every switch (the system is positively scale invariant), so only
/// log-ratios accumulate. Runs that reach a facet with no guard are counted
/// as stuck; runs whose flow never exits report partial mean +inf.
inline SimulationReport simulate_pphs(const Pphs& h, long long horizon, int runs, std::uint64_t seed,
                                      std::vector<PphsSimStep>* trace = nullptr,
                                      const SolverOptions& opt = {}) {
    if (horizon < 1 || runs < 1) throw ValidationError("simulate_pphs: horizon and runs must be >= 1");
    {
        auto violations = validate_pphs(h, opt);
        if (!violations.empty()) throw ValidationError("invalid PPHS: " + violations.front());
    }
    const int n = h.dim;
    detail::PphsContext ctx = detail::build_context(h, opt);
    std::vector<std::vector<std::vector<double>>> gens(h.locations.size());
    for (size_t q = 0; q < h.locations.size(); ++q)
        gens[q] = detail::flow_generators(h.locations[q].flow, opt);

    // Initial facet, resolved exactly as in the abstraction.
    double x0_norm = 0.0;
    for (double v : h.init_point) x0_norm = std::max(x0_norm, std::fabs(v));
    if (x0_norm <= 0.0) throw ValidationError("simulate_pphs: init point is the origin");
    const double ptol = 1e-9 * std::max(1.0, x0_norm);
    int init_facet = -1;
    for (size_t k = 0; k < ctx.facets[h.init_loc].size(); ++k) {
        auto fs = facet_set(h.locations[h.init_loc].invariant, ctx.facets[h.init_loc][k]);
        if (pgeom::point_in(fs, h.init_point, ptol)) {
            const int id = ctx.canon[h.init_loc][k];
            if (init_facet >= 0 && init_facet != id)
                throw InitNotOnFacet("init point lies on several facets");
            init_facet = id;
        }
    }
    if (init_facet < 0) throw InitNotOnFacet("init point lies on no facet");

    SimulationReport rep;
    rep.runs = runs;
    rep.horizon = horizon;
    for (int r = 0; r < runs; ++r) {
        std::mt19937_64 rng = detail::run_rng(seed, r);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        int q = h.init_loc;
        int fid = init_facet;
        std::vector<double> x = h.init_point;
        for (double& v : x) v /= x0_norm;
        double sum = 0.0;
        long long switches = 0;
        bool diverged = false;
        while (switches < horizon) {
            if (gens[q].empty()) break;  // empty flow: nothing can move
            // Direction: uniform convex mixture of two generators.
            const auto& gs = gens[q];
            std::uniform_int_distribution<size_t> pick(0, gs.size() - 1);
            const auto& ga = gs[pick(rng)];
            const auto& gb = gs[pick(rng)];
            const double t = unif(rng);
            std::vector<double> f(n);
            double fnorm = 0.0;
            for (int i = 0; i < n; ++i) {
                f[i] = (1.0 - t) * ga[i] + t * gb[i];
                fnorm = std::max(fnorm, std::fabs(f[i]));
            }
            // First exit through the invariant boundary.
            double best_r = kInf;
            int hit = -1;
            bool leaves_hull = false;
            for (size_t k = 0; k < h.locations[q].invariant.base.halfspaces.size(); ++k) {
                const auto& hs = h.locations[q].invariant.base.halfspaces[k];
                double af = 0.0, ax = 0.0;
                for (int i = 0; i < n; ++i) {
                    af += hs.normal[i] * f[i];
                    ax += hs.normal[i] * x[i];
                }
                if (hs.rel == Relation::Equal) {
                    if (std::fabs(af) > 1e-9) leaves_hull = true;
                    continue;
                }
                if (af > 1e-12) {
                    const double rr = std::max(0.0, -ax / af);
                    if (rr < best_r - 1e-15 || (rr < best_r + 1e-15 && hit >= 0 && static_cast<int>(k) < hit)) {
                        best_r = rr;
                        hit = static_cast<int>(k);
                    }
                }
            }
            if (leaves_hull) break;  // unusable direction; end run as stuck
            if (hit < 0) {
                if (fnorm > 1e-12) diverged = true;  // flows forever, norm unbounded
                break;
            }
            int facet_pos = -1;
            for (size_t k = 0; k < ctx.facets[q].size(); ++k)
                if (ctx.facets[q][k].active_index == hit) facet_pos = static_cast<int>(k);
            if (facet_pos < 0) break;  // boundary piece carries no facet
            const int eid = ctx.guard[q][facet_pos];
            if (eid < 0) break;  // no guard: execution blocks
            std::vector<double> x2(n);
            double norm2 = 0.0;
            for (int i = 0; i < n; ++i) {
                x2[i] = x[i] + best_r * f[i];
                norm2 = std::max(norm2, std::fabs(x2[i]));
            }
            // Below this norm the step has effectively reached the
            // equilibrium; renormalizing further would only amplify float
            // cancellation noise.
            const double origin_tol = 1e-9;
            const int to_facet = (best_r > 1e-12) ? ctx.canon[q][facet_pos] : fid;
            const bool converged = norm2 < origin_tol;
            const double w = converged ? kNegInfiniteWeight : std::log(norm2);
            if (trace) trace->push_back({q, fid, ctx.canon[q][facet_pos], w});
            sum += w;
            ++switches;
            if (converged) break;
            // Probabilistic switch.
            double u = unif(rng);
            int next_loc = h.edges[eid].dist.back().first;
            for (auto [to, p] : h.edges[eid].dist) {
                if (u < p) { next_loc = to; break; }
                u -= p;
            }
            q = next_loc;
            fid = to_facet;
            for (int i = 0; i < n; ++i) x[i] = x2[i] / norm2;
        }
        if (diverged) {
            rep.partial_means.push_back(kInf);
        } else {
            if (switches < horizon) ++rep.stuck_runs;
            rep.partial_means.push_back(switches > 0 ? sum / static_cast<double>(switches) : 0.0);
        }
    }
    detail::finalize_report(rep);
    return rep;
}

}  // namespace polystab
