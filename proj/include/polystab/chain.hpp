#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "polystab/graph.hpp"
#include "polystab/linalg.hpp"
#include "polystab/wmdp.hpp"

namespace polystab {

struct StationaryDistribution {
    std::vector<double> probs;  // indexed by position in the component's sorted state list
};

struct EffectiveWeight {
    double value = 0.0;  // real or +inf
};

namespace detail {

/// Restriction of a chain to a closed component, states renumbered by
/// position in the sorted component.
inline Wdtmc restrict_chain(const Wdtmc& c, const std::vector<int>& component) {
    std::vector<int> local(c.state_count, -1);
    for (size_t i = 0; i < component.size(); ++i) local[component[i]] = static_cast<int>(i);
    Wdtmc sub;
    sub.state_count = static_cast<int>(component.size());
    sub.init_state = 0;
    sub.rows.resize(sub.state_count);
    for (size_t i = 0; i < component.size(); ++i) {
        for (const auto& e : c.rows[component[i]]) {
            if (e.prob <= 0.0) continue;
            if (local[e.to] < 0)
                throw NotIrreducible("component is not closed under transitions");
            sub.rows[i].push_back({local[e.to], e.prob, e.weight});
        }
    }
    return sub;
}

}  // namespace detail

/// Stationary distribution of the chain restricted to a BSCC: the unique d
/// with d^T P = d^T and sum(d) = 1, found by a direct dense solve.
inline StationaryDistribution stationary_distribution(const Wdtmc& c, const std::vector<int>& component) {
    Wdtmc sub = detail::restrict_chain(c, component);
    SccPartition part = scc_decompose(sub);
    if (part.components.size() != 1)
        throw NotIrreducible("restricted chain has more than one SCC");

    const int n = sub.state_count;
    // Rows 0..n-2: balance equations (P^T - I) d = 0; last row: sum(d) = 1.
    Matrix a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (int s = 0; s < n; ++s)
        for (const auto& e : sub.rows[s])
            if (e.to < n - 1) a[e.to][s] += e.prob;
    for (int i = 0; i + 1 < n; ++i) a[i][i] -= 1.0;
    for (int s = 0; s < n; ++s) a[n - 1][s] = 1.0;
    b[n - 1] = 1.0;

    StationaryDistribution d;
    d.probs = solve_linear(std::move(a), std::move(b));
    for (double& p : d.probs)
        if (p < 0.0 && p > -1e-12) p = 0.0;
    return d;
}

/// Almost-sure mean payoff of the irreducible chain on `component`:
/// sum over edges of d*(s) P(s,s') w(s,s'); +inf-weight edges are absorbing.
inline EffectiveWeight effective_weight(const Wdtmc& c, const std::vector<int>& component) {
    StationaryDistribution d = stationary_distribution(c, component);
    Wdtmc sub = detail::restrict_chain(c, component);
    double total = 0.0;
    for (int s = 0; s < sub.state_count; ++s) {
        for (const auto& e : sub.rows[s]) {
            if (e.prob <= 0.0) continue;
            if (std::isinf(e.weight)) return {kInf};
            total += d.probs[s] * e.prob * e.weight;
        }
    }
    return {total};
}

/// A WDTMC is almost surely convergent iff every BSCC reachable from init
/// has strictly negative effective weight. Transient +inf edges are ignored
/// (mean payoff is prefix-independent for the almost-sure criterion).
inline bool wdtmc_as_convergent(const Wdtmc& c) {
    for (const auto& bscc : bsccs_reachable(c)) {
        EffectiveWeight w = effective_weight(c, bscc);
        if (std::isinf(w.value) || w.value >= 0.0) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Exact almost-sure-convergence decision (Algorithm 1: policy enumeration)

struct AsWitness {
    MemorylessPolicy policy;
    std::vector<int> bscc;
    double weight = 0.0;
};

struct AsConvergenceResult {
    bool convergent = false;
    std::optional<AsWitness> witness;  // present iff not convergent
};

inline constexpr std::uint64_t kDefaultPolicyCap = 1000000;

/// Enumerates every memoryless deterministic policy in lexicographic order
/// (state-major, action index minor) and checks each induced chain.
inline AsConvergenceResult decide_as_convergence(const Wmdp& m, std::uint64_t policy_cap = kDefaultPolicyCap) {
    std::uint64_t count = 1;
    for (int s = 0; s < m.state_count; ++s) {
        const std::uint64_t k = m.actions[s].size();
        if (k == 0) throw ValidationError("blocking state " + std::to_string(s));
        if (count > policy_cap / k + 1) count = policy_cap + 1;
        else count *= k;
        if (count > policy_cap)
            throw EnumerationTooLarge("policy count exceeds cap of " + std::to_string(policy_cap));
    }

    MemorylessPolicy rho;
    rho.choice.assign(m.state_count, 0);
    while (true) {
        Wdtmc chain = induce(m, rho);
        for (const auto& bscc : bsccs_reachable(chain)) {
            EffectiveWeight w = effective_weight(chain, bscc);
            if (std::isinf(w.value) || w.value >= 0.0)
                return {false, AsWitness{rho, bscc, w.value}};
        }
        // Advance to the next policy (odometer over action indices).
        int s = m.state_count - 1;
        while (s >= 0) {
            if (++rho.choice[s] < static_cast<int>(m.actions[s].size())) break;
            rho.choice[s] = 0;
            --s;
        }
        if (s < 0) break;
    }
    return {true, std::nullopt};
}

}  // namespace polystab
