#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>
#include <vector>

#include "polystab/graph.hpp"
#include "polystab/lp.hpp"
#include "polystab/wmdp.hpp"

namespace polystab {

inline constexpr double kVerdictEps = 1e-9;

/// Result of shifting all weights into the strictly positive range required
/// by the gain/quotient pipeline: transformed.weight = original + bias_c.
struct WeightTransform {
    double bias_c = 0.0;
    Wmdp transformed;
    bool had_infinite_edge = false;  // some +inf weight reachable from init
};

inline WeightTransform transform_weights(const Wmdp& m) {
    WeightTransform out;
    std::vector<int> reach = reachable_states(m, m.init_state);
    std::vector<char> reachable(m.state_count, 0);
    for (int s : reach) reachable[s] = 1;

    double min_w = kInf, max_w = -kInf;
    for (int s = 0; s < m.state_count; ++s) {
        for (const auto& act : m.actions[s]) {
            if (std::isinf(act.weight)) {
                if (reachable[s]) out.had_infinite_edge = true;
                continue;
            }
            min_w = std::min(min_w, act.weight);
            max_w = std::max(max_w, act.weight);
        }
    }
    if (out.had_infinite_edge) return out;

    out.bias_c = (min_w <= 0.0) ? std::fabs(min_w) + 1.0 : 0.0;
    // Unreachable +inf weights cannot influence the result; clamp them to the
    // largest finite transformed weight so the model stays all-finite.
    const double clamp = (max_w > -kInf) ? max_w + out.bias_c : 1.0;
    out.transformed = m;
    for (auto& acts : out.transformed.actions)
        for (auto& act : acts)
            act.weight = std::isinf(act.weight) ? clamp : act.weight + out.bias_c;
    return out;
}

// ---------------------------------------------------------------------------
// Optimal gain of a communicating WMDP (Puterman's LP)

/// maximize sum_{s,a} w(s,a) x(s,a)
/// s.t.  sum_a x(j,a) - sum_{s,a} T(s,a,j) x(s,a) = 0             for all j
///       sum_a x(j,a) + sum_a y(j,a) - sum_{s,a} T(s,a,j) y(s,a) = 1/|S|
///       x, y >= 0
inline double gain_lp(const Wmdp& m, const SolverOptions& opt = {}) {
    const int n = m.state_count;
    std::vector<int> offset(n + 1, 0);
    for (int s = 0; s < n; ++s) offset[s + 1] = offset[s] + static_cast<int>(m.actions[s].size());
    const int total_sa = offset[n];

    // Gain is linear in the weights; normalizing them keeps the tableau well
    // conditioned even when surrogate weights are large.
    double scale = 1.0;
    for (const auto& acts : m.actions)
        for (const auto& act : acts) scale = std::max(scale, std::fabs(act.weight));

    LinearProgram lp;
    lp.sense = Sense::Maximize;
    lp.objective.assign(2 * total_sa, 0.0);
    lp.bounds.assign(2 * total_sa, Bounds{0.0, kInf});
    for (int s = 0; s < n; ++s)
        for (size_t a = 0; a < m.actions[s].size(); ++a)
            lp.objective[offset[s] + static_cast<int>(a)] = m.actions[s][a].weight / scale;

    for (int j = 0; j < n; ++j) {
        Constraint flow{std::vector<double>(2 * total_sa, 0.0), Relation::Equal, 0.0};
        Constraint freq{std::vector<double>(2 * total_sa, 0.0), Relation::Equal, 1.0 / n};
        for (size_t a = 0; a < m.actions[j].size(); ++a) {
            flow.coeffs[offset[j] + static_cast<int>(a)] += 1.0;
            freq.coeffs[offset[j] + static_cast<int>(a)] += 1.0;
            freq.coeffs[total_sa + offset[j] + static_cast<int>(a)] += 1.0;
        }
        for (int s = 0; s < n; ++s) {
            for (size_t a = 0; a < m.actions[s].size(); ++a) {
                const double p = transition_prob(m, s, static_cast<int>(a), j);
                if (p <= 0.0) continue;
                flow.coeffs[offset[s] + static_cast<int>(a)] -= p;
                freq.coeffs[total_sa + offset[s] + static_cast<int>(a)] -= p;
            }
        }
        lp.constraints.push_back(std::move(flow));
        lp.constraints.push_back(std::move(freq));
    }

    LpSolution sol = solve(lp, opt);
    if (sol.status == LpStatus::Infeasible)
        throw LpInfeasible("gain LP infeasible (input not communicating?)");
    if (sol.status == LpStatus::Unbounded)
        throw NumericalFailure("gain LP unbounded");
    return sol.value * scale;
}

// ---------------------------------------------------------------------------
// MEC quotient

/// Quotient MDP: one vertex per MEC, every non-MEC state, plus absorbing
/// sinks s_plus / s_minus. Each MEC vertex gets a fresh coin action reaching
/// s_plus with probability f(M) = gain(M) / r_max.
struct MecQuotient {
    Wmdp mdp;                 // weights are all zero; only reachability matters
    std::vector<int> vertex_of;  // original state -> quotient vertex
    int s_plus = 0;
    int s_minus = 0;
    int init_vertex = 0;
    std::vector<double> f;    // per MEC
    double r_max = 0.0;
};

inline MecQuotient build_quotient(const Wmdp& m, const std::vector<Mec>& mecs,
                                  const std::vector<double>& gains) {
    const int n = m.state_count;
    double r_max = -kInf;
    for (const auto& acts : m.actions)
        for (const auto& act : acts) r_max = std::max(r_max, act.weight);
    for (double g : gains) {
        if (g > r_max + 1e-9 || g < -1e-9)
            throw GainOutOfRange("gain " + std::to_string(g) + " outside [0, r_max=" + std::to_string(r_max) + "]");
    }

    MecQuotient q;
    q.r_max = r_max;
    q.vertex_of.assign(n, -1);
    std::vector<char> in_mec(n, 0);
    std::vector<std::vector<char>> internal(n);  // internal[s][a] = action kept inside s's MEC
    for (int s = 0; s < n; ++s) internal[s].assign(m.actions[s].size(), 0);
    for (size_t i = 0; i < mecs.size(); ++i) {
        for (size_t k = 0; k < mecs[i].states.size(); ++k) {
            const int s = mecs[i].states[k];
            q.vertex_of[s] = static_cast<int>(i);
            in_mec[s] = 1;
            for (int a : mecs[i].enabled[k]) internal[s][a] = 1;
        }
    }
    int next = static_cast<int>(mecs.size());
    for (int s = 0; s < n; ++s)
        if (!in_mec[s]) q.vertex_of[s] = next++;
    q.s_plus = next;
    q.s_minus = next + 1;
    const int total = next + 2;

    q.mdp.state_count = total;
    q.mdp.actions.resize(total);
    q.init_vertex = q.vertex_of[m.init_state];
    q.mdp.init_state = q.init_vertex;

    auto redirected = [&](const WmdpAction& act) {
        std::map<int, double> mass;
        for (auto [to, p] : act.dist)
            if (p > 0.0) mass[q.vertex_of[to]] += p;
        WmdpAction out;
        out.weight = 0.0;
        for (auto [v, p] : mass) out.dist.push_back({v, p});
        return out;
    };

    // Coin actions, in MEC order.
    for (size_t i = 0; i < mecs.size(); ++i) {
        double fi = gains[i] / r_max;
        fi = std::clamp(fi, 0.0, 1.0);
        q.f.push_back(fi);
        WmdpAction coin;
        if (fi > 0.0) coin.dist.push_back({q.s_plus, fi});
        if (fi < 1.0) coin.dist.push_back({q.s_minus, 1.0 - fi});
        q.mdp.actions[static_cast<int>(i)].push_back(std::move(coin));
    }
    // Inherited actions: everything internal to a MEC is dropped.
    for (int s = 0; s < n; ++s) {
        for (size_t a = 0; a < m.actions[s].size(); ++a) {
            if (internal[s][a]) continue;
            q.mdp.actions[q.vertex_of[s]].push_back(redirected(m.actions[s][a]));
        }
    }
    q.mdp.actions[q.s_plus].push_back({{{q.s_plus, 1.0}}, 0.0});
    q.mdp.actions[q.s_minus].push_back({{{q.s_minus, 1.0}}, 0.0});
    return q;
}

// ---------------------------------------------------------------------------
// Maximal reachability probability

/// Standard LP: minimize sum_s x_s subject to x_s >= sum_s' T(s,a,s') x_s'
/// for every action, with x fixed to 1 at s_plus and to 0 on states that
/// cannot reach s_plus. The optimum is the pointwise-least solution, i.e.
/// the maximal reachability probabilities.
inline double max_reach_probability(const MecQuotient& q, const SolverOptions& opt = {}) {
    const Wmdp& m = q.mdp;
    const int n = m.state_count;

    // Backward reachability to s_plus over any action.
    std::vector<std::vector<int>> rg(n);
    for (int s = 0; s < n; ++s)
        for (const auto& act : m.actions[s])
            for (auto [to, p] : act.dist)
                if (p > 0.0) rg[to].push_back(s);
    std::vector<char> can_reach(n, 0);
    std::vector<int> stack{q.s_plus};
    can_reach[q.s_plus] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : rg[v])
            if (!can_reach[w]) { can_reach[w] = 1; stack.push_back(w); }
    }
    if (!can_reach[q.init_vertex]) return 0.0;

    LinearProgram lp;
    lp.sense = Sense::Minimize;
    lp.objective.assign(n, 1.0);
    lp.bounds.assign(n, Bounds{0.0, 1.0});
    for (int s = 0; s < n; ++s) {
        if (!can_reach[s]) lp.bounds[s] = {0.0, 0.0};
    }
    lp.bounds[q.s_plus] = {1.0, 1.0};
    for (int s = 0; s < n; ++s) {
        if (s == q.s_plus || !can_reach[s]) continue;
        for (const auto& act : m.actions[s]) {
            Constraint c{std::vector<double>(n, 0.0), Relation::LessEq, 0.0};
            for (auto [to, p] : act.dist)
                if (p > 0.0) c.coeffs[to] += p;
            c.coeffs[s] -= 1.0;  // sum p x' - x_s <= 0
            lp.constraints.push_back(std::move(c));
        }
    }
    LpSolution sol = solve(lp, opt);
    if (sol.status != LpStatus::Optimal)
        throw NumericalFailure("reachability LP did not solve to optimality");
    return std::clamp(sol.point[q.init_vertex], 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Maximum expected mean payoff (end to end)

inline MeanPayoffValue max_expected_mean_payoff(const Wmdp& m, const SolverOptions& opt = {},
                                                int threads = 1) {
    WeightTransform wt = transform_weights(m);
    if (wt.had_infinite_edge) return {kInf};

    std::vector<Mec> mecs = mec_decompose(wt.transformed);
    if (mecs.empty())
        throw NumericalFailure("finite non-blocking WMDP without a MEC (internal error)");

    std::vector<double> gains(mecs.size(), 0.0);
    if (threads <= 1 || mecs.size() == 1) {
        for (size_t i = 0; i < mecs.size(); ++i)
            gains[i] = gain_lp(restrict_to_mec(wt.transformed, mecs[i]), opt);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> cursor{0};
        const int nthreads = std::min<int>(threads, static_cast<int>(mecs.size()));
        std::vector<std::exception_ptr> errs(nthreads);
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (size_t i = cursor.fetch_add(1); i < mecs.size(); i = cursor.fetch_add(1))
                        gains[i] = gain_lp(restrict_to_mec(wt.transformed, mecs[i]), opt);
                } catch (...) {
                    errs[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }

    MecQuotient q = build_quotient(wt.transformed, mecs, gains);
    const double p_max = max_reach_probability(q, opt);
    const double v = q.r_max * p_max;
    return {v - wt.bias_c};
}

// ---------------------------------------------------------------------------
// Stability verdict

enum class Verdict { Stable, Unknown };

struct StabilityResult {
    Verdict verdict = Verdict::Unknown;
    MeanPayoffValue payoff;
    bool infinite_edge = false;  // short-circuited on a reachable +inf weight
};

/// Stable iff the maximum expected mean payoff is strictly negative.
inline StabilityResult wmdp_stability_verdict(const Wmdp& m, const SolverOptions& opt = {},
                                              int threads = 1) {
    StabilityResult r;
    WeightTransform wt = transform_weights(m);
    if (wt.had_infinite_edge) {
        r.verdict = Verdict::Unknown;
        r.payoff = {kInf};
        r.infinite_edge = true;
        return r;
    }
    r.payoff = max_expected_mean_payoff(m, opt, threads);
    r.verdict = (r.payoff.value < -kVerdictEps) ? Verdict::Stable : Verdict::Unknown;
    return r;
}

}  // namespace polystab
