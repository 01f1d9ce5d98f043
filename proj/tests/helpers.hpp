#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "polystab/graph.hpp"
#include "polystab/linalg.hpp"
#include "polystab/lp.hpp"
#include "polystab/wmdp.hpp"

namespace testutil {

using namespace polystab;

// ---------------------------------------------------------------------------
// Random model generators

inline Wmdp random_wmdp(std::mt19937_64& rng, int max_states, int max_actions,
                        double w_lo = -5.0, double w_hi = 5.0) {
    std::uniform_int_distribution<int> nstates(1, max_states);
    const int n = nstates(rng);
    std::uniform_int_distribution<int> nacts(1, max_actions);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> weight(w_lo, w_hi);
    std::uniform_int_distribution<int> pick(0, n - 1);

    Wmdp m;
    m.state_count = n;
    m.init_state = pick(rng);
    m.actions.resize(n);
    for (int s = 0; s < n; ++s) {
        const int k = nacts(rng);
        for (int a = 0; a < k; ++a) {
            WmdpAction act;
            act.weight = weight(rng);
            // Random support of size 1..n with random probabilities.
            std::uniform_int_distribution<int> supp_size(1, n);
            const int sz = supp_size(rng);
            std::vector<int> targets(n);
            for (int i = 0; i < n; ++i) targets[i] = i;
            std::shuffle(targets.begin(), targets.end(), rng);
            targets.resize(sz);
            std::sort(targets.begin(), targets.end());
            std::vector<double> mass(sz);
            double total = 0.0;
            for (double& v : mass) {
                v = 0.05 + unif(rng);
                total += v;
            }
            for (int i = 0; i < sz; ++i) act.dist.push_back({targets[i], mass[i] / total});
            m.actions[s].push_back(std::move(act));
        }
    }
    return m;
}

/// Strongly connected single-action WMDP (a cycle plus random extra edges),
/// viewed as a chain via its only policy.
inline Wmdp random_irreducible_wmdp(std::mt19937_64& rng, int max_states,
                                    double w_lo = -5.0, double w_hi = 5.0) {
    std::uniform_int_distribution<int> nstates(2, max_states);
    const int n = nstates(rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> weight(w_lo, w_hi);

    Wmdp m;
    m.state_count = n;
    m.init_state = 0;
    m.actions.resize(n);
    for (int s = 0; s < n; ++s) {
        WmdpAction act;
        act.weight = weight(rng);
        std::vector<double> mass(n, 0.0);
        mass[(s + 1) % n] = 0.2 + unif(rng);  // cycle edge keeps the chain irreducible
        for (int t = 0; t < n; ++t)
            if (unif(rng) < 0.4) mass[t] += 0.05 + unif(rng);
        double total = 0.0;
        for (double v : mass) total += v;
        for (int t = 0; t < n; ++t)
            if (mass[t] > 0.0) act.dist.push_back({t, mass[t] / total});
        m.actions[s].push_back(std::move(act));
    }
    return m;
}

inline Wdtmc random_irreducible_chain(std::mt19937_64& rng, int max_states,
                                      double w_lo = -5.0, double w_hi = 5.0) {
    MemorylessPolicy rho;
    Wmdp m = random_irreducible_wmdp(rng, max_states, w_lo, w_hi);
    rho.choice.assign(m.state_count, 0);
    return induce(m, rho);
}

// ---------------------------------------------------------------------------
// Brute-force LP oracle: enumerate candidate vertices (all n-subsets of the
// tight-constraint rows), keep feasible ones, return the best objective.

struct DenseRow {
    std::vector<double> a;
    Relation rel;
    double rhs;
};

inline std::vector<DenseRow> all_rows(const LinearProgram& lp) {
    std::vector<DenseRow> rows;
    for (const auto& c : lp.constraints) rows.push_back({c.coeffs, c.rel, c.rhs});
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (j < static_cast<int>(lp.bounds.size())) {
            std::vector<double> unit(lp.num_vars(), 0.0);
            unit[j] = 1.0;
            if (lp.bounds[j].lower > -kInf) rows.push_back({unit, Relation::GreaterEq, lp.bounds[j].lower});
            if (lp.bounds[j].upper < kInf) rows.push_back({unit, Relation::LessEq, lp.bounds[j].upper});
        }
    }
    return rows;
}

inline bool feasible_point(const LinearProgram& lp, const std::vector<double>& x, double tol = 1e-7) {
    return max_violation(lp, x) <= tol;
}

/// Optimal value of a feasible *bounded* LP by vertex enumeration.
inline double lp_vertex_oracle(const LinearProgram& lp) {
    const int n = lp.num_vars();
    std::vector<DenseRow> rows = all_rows(lp);
    const int m = static_cast<int>(rows.size());
    std::vector<int> idx(n);
    double best = -kInf;
    bool found = false;

    std::vector<int> comb(n);
    for (int i = 0; i < n; ++i) comb[i] = i;
    auto advance = [&]() {
        int i = n - 1;
        while (i >= 0 && comb[i] == m - n + i) --i;
        if (i < 0) return false;
        ++comb[i];
        for (int j = i + 1; j < n; ++j) comb[j] = comb[j - 1] + 1;
        return true;
    };
    if (m < n) return best;
    do {
        Matrix a(n, std::vector<double>(n));
        std::vector<double> b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = rows[comb[i]].a;
            b[i] = rows[comb[i]].rhs;
        }
        std::vector<double> x;
        try {
            x = solve_linear(std::move(a), std::move(b));
        } catch (const SingularSystem&) {
            continue;
        }
        if (!feasible_point(lp, x)) continue;
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += lp.objective[j] * x[j];
        if (lp.sense == Sense::Minimize) v = -v;
        if (!found || v > best) best = v;
        found = true;
    } while (advance());
    return lp.sense == Sense::Minimize ? -best : best;
}

// ---------------------------------------------------------------------------
// Exponential MEC definition oracle: enumerate state subsets, compute the
// maximal closed action availability, keep subsets that are strongly
// connected end components, then drop non-maximal ones.

inline std::vector<Mec> mec_definition_oracle(const Wmdp& m) {
    const int n = m.state_count;
    std::vector<Mec> candidates;
    for (int mask = 1; mask < (1 << n); ++mask) {
        std::vector<int> states;
        for (int s = 0; s < n; ++s)
            if (mask & (1 << s)) states.push_back(s);
        std::vector<std::vector<int>> enabled(states.size());
        bool ok = true;
        for (size_t i = 0; i < states.size() && ok; ++i) {
            for (int a = 0; a < static_cast<int>(m.actions[states[i]].size()); ++a) {
                bool inside = true;
                for (auto [to, p] : m.actions[states[i]][a].dist)
                    if (p > 0.0 && !(mask & (1 << to))) inside = false;
                if (inside) enabled[i].push_back(a);
            }
            if (enabled[i].empty()) ok = false;
        }
        if (!ok) continue;
        // Strong connectivity of the restricted structure.
        std::vector<std::vector<int>> g(states.size());
        for (size_t i = 0; i < states.size(); ++i) {
            for (int a : enabled[i])
                for (auto [to, p] : m.actions[states[i]][a].dist)
                    if (p > 0.0) {
                        const int j = static_cast<int>(std::lower_bound(states.begin(), states.end(), to) -
                                                       states.begin());
                        g[i].push_back(j);
                    }
        }
        int count = 0;
        std::vector<int> comp = scc_ids(g, count);
        if (count != 1) continue;
        candidates.push_back({states, enabled});
    }
    std::vector<Mec> mecs;
    for (const auto& c : candidates) {
        bool maximal = true;
        for (const auto& other : candidates) {
            if (other.states.size() <= c.states.size()) continue;
            if (std::includes(other.states.begin(), other.states.end(), c.states.begin(), c.states.end()))
                maximal = false;
        }
        if (maximal) mecs.push_back(c);
    }
    std::sort(mecs.begin(), mecs.end(),
              [](const Mec& a, const Mec& b) { return a.states.front() < b.states.front(); });
    return mecs;
}

inline bool mecs_equal(const std::vector<Mec>& a, const std::vector<Mec>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].states != b[i].states) return false;
        if (a[i].enabled != b[i].enabled) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Absorption probabilities into each BSCC, by direct linear solve. The bscc
// list must contain every bottom component (else absorbing states would be
// misread as transient and the system turns singular).

inline std::vector<std::vector<int>> all_bsccs(const Wdtmc& c) {
    SccPartition part = scc_decompose(c);
    std::vector<std::vector<int>> out;
    for (size_t i = 0; i < part.components.size(); ++i)
        if (part.is_bottom[i]) out.push_back(part.components[i]);
    return out;
}

inline std::vector<double> absorption_oracle(const Wdtmc& c,
                                             const std::vector<std::vector<int>>& bsccs) {
    const int n = c.state_count;
    std::vector<int> bscc_of(n, -1);
    for (size_t b = 0; b < bsccs.size(); ++b)
        for (int s : bsccs[b]) bscc_of[s] = static_cast<int>(b);
    std::vector<int> transients, tindex(n, -1);
    for (int s = 0; s < n; ++s)
        if (bscc_of[s] < 0) {
            tindex[s] = static_cast<int>(transients.size());
            transients.push_back(s);
        }
    std::vector<double> reach(bsccs.size(), 0.0);
    if (bscc_of[c.init_state] >= 0) {
        reach[bscc_of[c.init_state]] = 1.0;
        return reach;
    }
    const int t = static_cast<int>(transients.size());
    for (size_t b = 0; b < bsccs.size(); ++b) {
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
        reach[b] = solve_linear(std::move(a), std::move(rhs))[tindex[c.init_state]];
    }
    return reach;
}

// ---------------------------------------------------------------------------
// O(n^3) transitive-closure SCC oracle

inline std::vector<std::vector<int>> scc_closure_oracle(const std::vector<std::vector<int>>& g) {
    const int n = static_cast<int>(g.size());
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (int s = 0; s < n; ++s) {
        reach[s][s] = 1;
        for (int t : g[s]) reach[s][t] = 1;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (reach[i][k])
                for (int j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = 1;
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> members;
        for (int t = 0; t < n; ++t)
            if (reach[s][t] && reach[t][s]) {
                comp[t] = static_cast<int>(out.size());
                members.push_back(t);
            }
        out.push_back(members);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

}  // namespace testutil
