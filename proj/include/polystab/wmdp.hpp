#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "polystab/errors.hpp"
#include "polystab/lp.hpp"

namespace polystab {

inline constexpr double kDistTol = 1e-9;

/// One enabled action of a state: a sparse distribution over successor
/// states plus the weight gained when the action is taken. Weight may be
/// +inf (first-class; absorbing under addition and max).
struct WmdpAction {
    std::vector<std::pair<int, double>> dist;  // (successor, probability), successors strictly increasing
    double weight = 0.0;
};

/// Finite weighted MDP. States are 0..state_count-1; each state carries its
/// own action list (actions are identified per state by list index).
struct Wmdp {
    int state_count = 0;
    std::vector<std::vector<WmdpAction>> actions;  // actions[s] = available actions at s
    int init_state = 0;
};

/// Memoryless deterministic policy: one action index per state.
struct MemorylessPolicy {
    std::vector<int> choice;
};

/// A WMDP bound to a memoryless policy. Per-edge weights are stored so that
/// successor-dependent weights remain representable.
struct Wdtmc {
    struct Edge {
        int to = 0;
        double prob = 0.0;
        double weight = 0.0;
    };
    int state_count = 0;
    std::vector<std::vector<Edge>> rows;  // rows[s]: successors in increasing order
    int init_state = 0;
};

struct MeanPayoffValue {
    double value = 0.0;
    bool is_infinite() const { return std::isinf(value) && value > 0; }
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
    BlockingState,
    DistributionNotStochastic,
    ProbabilityOutOfRange,
    BadSuccessorIndex,
    BadWeight,
    BadInitState,
};

struct Violation {
    ViolationKind kind;
    int state = -1;
    int action = -1;
    std::string detail;
};

inline std::vector<Violation> validate(const Wmdp& m) {
    std::vector<Violation> out;
    if (static_cast<int>(m.actions.size()) != m.state_count) {
        out.push_back({ViolationKind::BlockingState, -1, -1, "action table size differs from state count"});
        return out;
    }
    if (m.init_state < 0 || m.init_state >= m.state_count)
        out.push_back({ViolationKind::BadInitState, m.init_state, -1, "init state out of range"});
    for (int s = 0; s < m.state_count; ++s) {
        if (m.actions[s].empty())
            out.push_back({ViolationKind::BlockingState, s, -1, "state has no action (non-blocking assumption)"});
        for (int a = 0; a < static_cast<int>(m.actions[s].size()); ++a) {
            const WmdpAction& act = m.actions[s][a];
            double sum = 0.0;
            for (auto [to, p] : act.dist) {
                if (to < 0 || to >= m.state_count)
                    out.push_back({ViolationKind::BadSuccessorIndex, s, a, "successor " + std::to_string(to)});
                if (p < -kDistTol || p > 1.0 + kDistTol || !std::isfinite(p))
                    out.push_back({ViolationKind::ProbabilityOutOfRange, s, a, std::to_string(p)});
                sum += p;
            }
            if (std::fabs(sum - 1.0) > kDistTol)
                out.push_back({ViolationKind::DistributionNotStochastic, s, a, "sums to " + std::to_string(sum)});
            if (std::isnan(act.weight) || (std::isinf(act.weight) && act.weight < 0))
                out.push_back({ViolationKind::BadWeight, s, a, "weight must be a real or +inf"});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Policy induction

inline Wdtmc induce(const Wmdp& m, const MemorylessPolicy& rho) {
    Wdtmc c;
    c.state_count = m.state_count;
    c.init_state = m.init_state;
    c.rows.resize(m.state_count);
    for (int s = 0; s < m.state_count; ++s) {
        if (s >= static_cast<int>(rho.choice.size())) throw PolicyActionUnavailable(s);
        const int a = rho.choice[s];
        if (a < 0 || a >= static_cast<int>(m.actions[s].size())) throw PolicyActionUnavailable(s);
        const WmdpAction& act = m.actions[s][a];
        for (auto [to, p] : act.dist) {
            if (p > 0.0) c.rows[s].push_back({to, p, act.weight});
        }
    }
    return c;
}

/// Views a chain as a single-action WMDP (used by analyses defined on WMDPs).
inline Wmdp to_wmdp(const Wdtmc& c) {
    Wmdp m;
    m.state_count = c.state_count;
    m.init_state = c.init_state;
    m.actions.resize(c.state_count);
    for (int s = 0; s < c.state_count; ++s) {
        WmdpAction a;
        double w = 0.0;
        bool first = true;
        for (const auto& e : c.rows[s]) {
            a.dist.push_back({e.to, e.prob});
            if (first) { w = e.weight; first = false; }
        }
        a.weight = w;
        m.actions[s].push_back(std::move(a));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Finite paths

/// Alternating path s0, a1, s1, ..., an, sn.
struct FinitePath {
    int start = 0;
    std::vector<std::pair<int, int>> steps;  // (action index at previous state, next state)
};

inline double transition_prob(const Wmdp& m, int s, int a, int to) {
    for (auto [t, p] : m.actions[s][a].dist)
        if (t == to) return p;
    return 0.0;
}

/// Sum of edge weights along the path; +inf is absorbing.
inline double path_weight(const Wmdp& m, const FinitePath& sigma) {
    double total = 0.0;
    int cur = sigma.start;
    for (auto [a, next] : sigma.steps) {
        if (cur < 0 || cur >= m.state_count || a < 0 || a >= static_cast<int>(m.actions[cur].size()))
            throw InvalidPath("path step references missing state/action");
        if (transition_prob(m, cur, a, next) <= 0.0)
            throw InvalidPath("path step has zero probability");
        total += m.actions[cur][a].weight;
        cur = next;
    }
    return total;
}

}  // namespace polystab
