#pragma once

#include <algorithm>
#include <vector>

#include "polystab/wmdp.hpp"

namespace polystab {

inline std::vector<std::vector<int>> adjacency(const Wmdp& m) {
    std::vector<std::vector<int>> g(m.state_count);
    for (int s = 0; s < m.state_count; ++s) {
        for (const auto& act : m.actions[s])
            for (auto [to, p] : act.dist)
                if (p > 0.0) g[s].push_back(to);
        std::sort(g[s].begin(), g[s].end());
        g[s].erase(std::unique(g[s].begin(), g[s].end()), g[s].end());
    }
    return g;
}

inline std::vector<std::vector<int>> adjacency(const Wdtmc& c) {
    std::vector<std::vector<int>> g(c.state_count);
    for (int s = 0; s < c.state_count; ++s)
        for (const auto& e : c.rows[s])
            if (e.prob > 0.0) g[s].push_back(e.to);
    return g;
}

inline std::vector<int> reachable_from(const std::vector<std::vector<int>>& g, int from) {
    std::vector<char> seen(g.size(), 0);
    std::vector<int> stack{from}, out;
    seen[from] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        out.push_back(v);
        for (int w : g[v])
            if (!seen[w]) { seen[w] = 1; stack.push_back(w); }
    }
    std::sort(out.begin(), out.end());
    return out;
}

template <class Model>
std::vector<int> reachable_states(const Model& m, int from) {
    return reachable_from(adjacency(m), from);
}

// ---------------------------------------------------------------------------
// Strongly connected components (iterative Tarjan)

struct SccPartition {
    std::vector<std::vector<int>> components;  // ordered by smallest contained state
    std::vector<bool> is_bottom;
};

inline std::vector<int> scc_ids(const std::vector<std::vector<int>>& g, int& count) {
    const int n = static_cast<int>(g.size());
    std::vector<int> index(n, -1), lowlink(n, 0), comp(n, -1), stack;
    std::vector<char> on_stack(n, 0);
    int next_index = 0;
    count = 0;

    struct Frame {
        int v;
        size_t child;
    };
    std::vector<Frame> call;
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            auto& [v, child] = call.back();
            if (child == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            bool descended = false;
            while (child < g[v].size()) {
                int w = g[v][child++];
                if (index[w] == -1) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                while (true) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = count;
                    if (w == v) break;
                }
                ++count;
            }
            int finished = v;
            call.pop_back();
            if (!call.empty()) {
                int parent = call.back().v;
                lowlink[parent] = std::min(lowlink[parent], lowlink[finished]);
            }
        }
    }
    return comp;
}

inline SccPartition scc_partition(const std::vector<std::vector<int>>& g) {
    int count = 0;
    std::vector<int> comp = scc_ids(g, count);
    std::vector<std::vector<int>> members(count);
    for (int v = 0; v < static_cast<int>(g.size()); ++v) members[comp[v]].push_back(v);
    std::vector<bool> bottom(count, true);
    for (int v = 0; v < static_cast<int>(g.size()); ++v)
        for (int w : g[v])
            if (comp[w] != comp[v]) bottom[comp[v]] = false;

    // Deterministic ordering: by smallest contained state index.
    std::vector<int> order(count);
    for (int i = 0; i < count; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return members[a].front() < members[b].front(); });
    SccPartition part;
    part.components.reserve(count);
    part.is_bottom.reserve(count);
    for (int i : order) {
        std::sort(members[i].begin(), members[i].end());
        part.components.push_back(std::move(members[i]));
        part.is_bottom.push_back(bottom[i]);
    }
    return part;
}

inline SccPartition scc_decompose(const Wdtmc& c) { return scc_partition(adjacency(c)); }

/// Bottom SCCs intersected with the states reachable from the chain's init.
inline std::vector<std::vector<int>> bsccs_reachable(const Wdtmc& c) {
    SccPartition part = scc_decompose(c);
    std::vector<int> reach = reachable_states(c, c.init_state);
    std::vector<char> reachable(c.state_count, 0);
    for (int s : reach) reachable[s] = 1;
    std::vector<std::vector<int>> out;
    for (size_t i = 0; i < part.components.size(); ++i) {
        if (part.is_bottom[i] && reachable[part.components[i].front()])
            out.push_back(part.components[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Maximal end components

struct Mec {
    std::vector<int> states;                 // sorted
    std::vector<std::vector<int>> enabled;   // enabled[i] = surviving action indices of states[i]
};

/// Standard pruning algorithm: recompute SCCs over the surviving state-action
/// structure and drop every (s,a) with a successor outside the SCC of s,
/// until stable. Remaining SCCs whose states kept at least one action are
/// the MECs.
inline std::vector<Mec> mec_decompose(const Wmdp& m) {
    const int n = m.state_count;
    std::vector<std::vector<char>> alive(n);
    for (int s = 0; s < n; ++s) alive[s].assign(m.actions[s].size(), 1);

    while (true) {
        std::vector<std::vector<int>> g(n);
        for (int s = 0; s < n; ++s)
            for (size_t a = 0; a < m.actions[s].size(); ++a)
                if (alive[s][a])
                    for (auto [to, p] : m.actions[s][a].dist)
                        if (p > 0.0) g[s].push_back(to);
        int count = 0;
        std::vector<int> comp = scc_ids(g, count);
        bool removed = false;
        for (int s = 0; s < n; ++s) {
            for (size_t a = 0; a < m.actions[s].size(); ++a) {
                if (!alive[s][a]) continue;
                for (auto [to, p] : m.actions[s][a].dist) {
                    if (p > 0.0 && comp[to] != comp[s]) {
                        alive[s][a] = 0;  // some successor escapes the SCC of s
                        removed = true;
                        break;
                    }
                }
            }
        }
        if (!removed) {
            std::vector<std::vector<int>> members(count);
            for (int s = 0; s < n; ++s) members[comp[s]].push_back(s);
            std::vector<Mec> mecs;
            for (auto& ms : members) {
                bool all_have_action = true;
                for (int s : ms) {
                    bool any = false;
                    for (size_t a = 0; a < m.actions[s].size(); ++a)
                        if (alive[s][a]) any = true;
                    if (!any) all_have_action = false;
                }
                if (!all_have_action) continue;
                Mec mec;
                std::sort(ms.begin(), ms.end());
                mec.states = ms;
                for (int s : ms) {
                    std::vector<int> acts;
                    for (size_t a = 0; a < m.actions[s].size(); ++a)
                        if (alive[s][a]) acts.push_back(static_cast<int>(a));
                    mec.enabled.push_back(std::move(acts));
                }
                mecs.push_back(std::move(mec));
            }
            std::sort(mecs.begin(), mecs.end(),
                      [](const Mec& a, const Mec& b) { return a.states.front() < b.states.front(); });
            return mecs;
        }
    }
}

/// Sub-WMDP induced by a MEC, states renumbered by position in mec.states.
inline Wmdp restrict_to_mec(const Wmdp& m, const Mec& mec) {
    std::vector<int> local(m.state_count, -1);
    for (size_t i = 0; i < mec.states.size(); ++i) local[mec.states[i]] = static_cast<int>(i);
    Wmdp sub;
    sub.state_count = static_cast<int>(mec.states.size());
    sub.init_state = 0;
    sub.actions.resize(sub.state_count);
    for (size_t i = 0; i < mec.states.size(); ++i) {
        const int s = mec.states[i];
        for (int a : mec.enabled[i]) {
            WmdpAction act;
            act.weight = m.actions[s][a].weight;
            for (auto [to, p] : m.actions[s][a].dist)
                if (p > 0.0) act.dist.push_back({local[to], p});
            sub.actions[i].push_back(std::move(act));
        }
    }
    return sub;
}

}  // namespace polystab
