#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polystab/lp.hpp"
#include "polystab/mean_payoff.hpp"
#include "polystab/wmdp.hpp"

namespace polystab {

// Surrogate for log(0) edges (exit only through the origin) and for the
// absorbing self-loop of an init state whose execution cannot continue.
// Large enough (in magnitude) to dominate any cycle sum at these model
// sizes, small enough to keep the gain LPs well conditioned.
inline constexpr double kNegInfiniteWeight = -1e4;
inline constexpr double kLambdaTol = 1e-9;
inline constexpr double kNormTol = 1e-12;

struct Halfspace {
    std::vector<double> normal;
    Relation rel = Relation::LessEq;  // LessEq or Equal only
    double offset = 0.0;
};

struct Polyhedron {
    int dim = 0;
    std::vector<Halfspace> halfspaces;
};

/// Polyhedron with homogeneous constraints only (offset 0), hence closed
/// under positive scaling.
struct ConeInvariant {
    Polyhedron base;
};

/// One boundary piece of a cone invariant: the halfspace at active_index
/// turned into an equality.
struct Facet {
    int active_index = 0;
};

struct PphsLocation {
    ConeInvariant invariant;
    Polyhedron flow;
};

struct PphsEdge {
    int loc = 0;
    int facet_index = 0;  // index into enumerate_facets(invariant of loc)
    std::vector<std::pair<int, double>> dist;  // (target location, probability)
};

struct Pphs {
    int dim = 0;
    std::vector<PphsLocation> locations;
    std::vector<PphsEdge> edges;
    int init_loc = 0;
    std::vector<double> init_point;
};

// ---------------------------------------------------------------------------
// Small LP helpers over polyhedral data

namespace pgeom {

/// Feasibility of {constraints, sigma*x[i] = 1, -1 <= x <= 1} for some of
/// the 2n sign cases, i.e. existence of a point with ||x||_inf = 1.
inline bool has_unit_point(int n, const std::vector<Halfspace>& constraints,
                           const SolverOptions& opt = {}) {
    for (int i = 0; i < n; ++i) {
        for (double sigma : {1.0, -1.0}) {
            LinearProgram lp;
            lp.objective.assign(n, 0.0);
            lp.bounds.assign(n, Bounds{-1.0, 1.0});
            for (const auto& h : constraints) {
                Constraint c{h.normal, h.rel, h.offset};
                lp.constraints.push_back(std::move(c));
            }
            Constraint norm{std::vector<double>(n, 0.0), Relation::Equal, 1.0};
            norm.coeffs[i] = sigma;
            lp.constraints.push_back(std::move(norm));
            if (solve(lp, opt).status == LpStatus::Optimal) return true;
        }
    }
    return false;
}

/// max of a.x over {constraints, -1 <= x <= 1}; the region contains 0 for
/// cone data, so the LP is feasible.
inline double boxed_max(int n, const std::vector<Halfspace>& constraints,
                        const std::vector<double>& a, const SolverOptions& opt = {}) {
    LinearProgram lp;
    lp.objective = a;
    lp.bounds.assign(n, Bounds{-1.0, 1.0});
    for (const auto& h : constraints) lp.constraints.push_back({h.normal, h.rel, h.offset});
    LpSolution sol = solve(lp, opt);
    if (sol.status != LpStatus::Optimal) throw NumericalFailure("boxed_max: cone LP not optimal");
    return sol.value;
}

/// Does the cone {constraints} lie inside the halfspace h?
inline bool contained_in_halfspace(int n, const std::vector<Halfspace>& constraints,
                                   const Halfspace& h, const SolverOptions& opt = {}) {
    const double tol = 1e-7;
    if (boxed_max(n, constraints, h.normal, opt) > h.offset + tol) return false;
    if (h.rel == Relation::Equal) {
        std::vector<double> neg(h.normal);
        for (double& v : neg) v = -v;
        if (boxed_max(n, constraints, neg, opt) > -h.offset + tol) return false;
    }
    return true;
}

inline bool set_contained(int n, const std::vector<Halfspace>& a, const std::vector<Halfspace>& b,
                          const SolverOptions& opt = {}) {
    for (const auto& h : b)
        if (!contained_in_halfspace(n, a, h, opt)) return false;
    return true;
}

inline bool sets_equal(int n, const std::vector<Halfspace>& a, const std::vector<Halfspace>& b,
                       const SolverOptions& opt = {}) {
    return set_contained(n, a, b, opt) && set_contained(n, b, a, opt);
}

inline bool point_in(const std::vector<Halfspace>& constraints, const std::vector<double>& x,
                     double tol) {
    for (const auto& h : constraints) {
        double v = -h.offset;
        for (size_t i = 0; i < x.size(); ++i) v += h.normal[i] * x[i];
        if (h.rel == Relation::LessEq ? (v > tol) : (std::fabs(v) > tol)) return false;
    }
    return true;
}

}  // namespace pgeom

// ---------------------------------------------------------------------------
// Facet enumeration

/// One facet per inequality halfspace whose activation still contains a
/// point of unit infinity-norm, in halfspace order.
inline std::vector<Facet> enumerate_facets(const ConeInvariant& inv, const SolverOptions& opt = {}) {
    const int n = inv.base.dim;
    if (!pgeom::has_unit_point(n, inv.base.halfspaces, opt))
        throw EmptyInvariant("invariant cone has no nonzero point");
    std::vector<Facet> out;
    for (int k = 0; k < static_cast<int>(inv.base.halfspaces.size()); ++k) {
        if (inv.base.halfspaces[k].rel != Relation::LessEq) continue;
        std::vector<Halfspace> cs = inv.base.halfspaces;
        cs[k].rel = Relation::Equal;
        if (pgeom::has_unit_point(n, cs, opt)) out.push_back({k});
    }
    return out;
}

/// Constraint list of the facet as a set.
inline std::vector<Halfspace> facet_set(const ConeInvariant& inv, const Facet& f) {
    std::vector<Halfspace> cs = inv.base.halfspaces;
    cs[f.active_index].rel = Relation::Equal;
    return cs;
}

// ---------------------------------------------------------------------------
// Continuous-transition LPs
//
// Variable layout: x1[0..n-1], x2[n..2n-1], lambda at 2n. The displacement
// x2 - x1 must lie in the homogenized flow cone A_F(x2-x1) <= lambda * b_F,
// lambda >= 0; a transition requires strictly positive lambda (the flow must
// actually be followed for positive time; a zero flow vector satisfies this
// with x2 = x1).

namespace pgeom {

struct EdgeLp {
    int n;
    LinearProgram lp;

    explicit EdgeLp(int dims) : n(dims) {
        lp.objective.assign(2 * n + 1, 0.0);
        lp.bounds.assign(2 * n + 1, Bounds{-kInf, kInf});
        lp.bounds[2 * n] = {0.0, kInf};
    }

    void membership(int offset, const std::vector<Halfspace>& cs) {
        for (const auto& h : cs) {
            Constraint c{std::vector<double>(2 * n + 1, 0.0), h.rel, h.offset};
            for (int i = 0; i < n; ++i) c.coeffs[offset + i] = h.normal[i];
            lp.constraints.push_back(std::move(c));
        }
    }

    void flow_homogenized(const Polyhedron& flow) {
        for (const auto& h : flow.halfspaces) {
            Constraint c{std::vector<double>(2 * n + 1, 0.0), h.rel, 0.0};
            for (int i = 0; i < n; ++i) {
                c.coeffs[n + i] = h.normal[i];
                c.coeffs[i] = -h.normal[i];
            }
            c.coeffs[2 * n] = -h.offset;
            lp.constraints.push_back(std::move(c));
        }
    }

    void x1_case(int i, double sigma) {
        Constraint c{std::vector<double>(2 * n + 1, 0.0), Relation::Equal, 1.0};
        c.coeffs[i] = sigma;
        lp.constraints.push_back(std::move(c));
        for (int k = 0; k < n; ++k) lp.bounds[k] = {-1.0, 1.0};
    }

    void x2_case(int j, double sigma) {
        for (int k = 0; k < n; ++k) {
            Constraint hi{std::vector<double>(2 * n + 1, 0.0), Relation::LessEq, 0.0};
            hi.coeffs[n + k] = 1.0;
            hi.coeffs[n + j] -= sigma;
            lp.constraints.push_back(std::move(hi));
            Constraint lo{std::vector<double>(2 * n + 1, 0.0), Relation::LessEq, 0.0};
            lo.coeffs[n + k] = -1.0;
            lo.coeffs[n + j] -= sigma;
            lp.constraints.push_back(std::move(lo));
        }
        lp.objective[n + j] = sigma;
    }
};

}  // namespace pgeom

/// Is there a continuous transition from a point of f1 to a point of f2
/// inside location q (normalized to ||x1||_inf = 1)? Tested by maximizing
/// lambda over the relaxed cone: a positive optimum (or unboundedness)
/// witnesses a positive-duration trajectory.
inline bool continuous_edge_feasible(const Pphs& h, int q,
                                     const std::vector<Halfspace>& f1_set,
                                     const std::vector<Halfspace>& f2_set,
                                     const SolverOptions& opt = {}) {
    const int n = h.dim;
    const auto& loc = h.locations[q];
    for (int i = 0; i < n; ++i) {
        for (double sigma : {1.0, -1.0}) {
            pgeom::EdgeLp b(n);
            b.membership(0, f1_set);
            b.membership(0, loc.invariant.base.halfspaces);
            b.membership(n, f2_set);
            b.membership(n, loc.invariant.base.halfspaces);
            b.flow_homogenized(loc.flow);
            b.x1_case(i, sigma);
            b.lp.objective[2 * n] = 1.0;
            LpSolution sol = solve(b.lp, opt);
            if (sol.status == LpStatus::Unbounded) return true;
            if (sol.status == LpStatus::Optimal && sol.value > kLambdaTol) return true;
        }
    }
    return false;
}

inline bool continuous_edge_feasible(const Pphs& h, int q, const Facet& f1, const Facet& f2,
                                     const SolverOptions& opt = {}) {
    const auto& inv = h.locations[q].invariant;
    return continuous_edge_feasible(h, q, facet_set(inv, f1), facet_set(inv, f2), opt);
}

struct EdgeWeightResult {
    double weight = 0.0;   // log of the norm supremum, kNegInfiniteWeight, or +inf
    int case_lps = 0;      // number of case LPs attempted (always 4 n^2)
};

/// Supremum of log(||x2||_inf / ||x1||_inf) over continuous transitions
/// f1 -> f2, via the 4 n^2 case LPs (one per attaining coordinate and sign
/// of x1 and of x2). Any unbounded case yields +inf.
inline EdgeWeightResult edge_weight_lps(const Pphs& h, int q,
                                        const std::vector<Halfspace>& f1_set,
                                        const std::vector<Halfspace>& f2_set,
                                        const SolverOptions& opt = {}) {
    const int n = h.dim;
    const auto& loc = h.locations[q];
    EdgeWeightResult r;
    double best = -kInf;
    bool unbounded = false, any = false;
    for (int i = 0; i < n; ++i) {
        for (double s1 : {1.0, -1.0}) {
            for (int j = 0; j < n; ++j) {
                for (double s2 : {1.0, -1.0}) {
                    pgeom::EdgeLp b(n);
                    b.membership(0, f1_set);
                    b.membership(0, loc.invariant.base.halfspaces);
                    b.membership(n, f2_set);
                    b.membership(n, loc.invariant.base.halfspaces);
                    b.flow_homogenized(loc.flow);
                    b.x1_case(i, s1);
                    b.x2_case(j, s2);
                    ++r.case_lps;
                    LpSolution sol = solve(b.lp, opt);
                    if (sol.status == LpStatus::Unbounded) { unbounded = true; any = true; }
                    else if (sol.status == LpStatus::Optimal) {
                        any = true;
                        best = std::max(best, sol.value);
                    }
                }
            }
        }
    }
    if (!any) throw InfeasibleEdge("edge weight requested for an infeasible facet pair");
    if (unbounded) { r.weight = kInf; return r; }
    r.weight = (best <= kNormTol) ? kNegInfiniteWeight : std::log(best);
    return r;
}

inline double edge_weight(const Pphs& h, int q, const Facet& f1, const Facet& f2,
                          const SolverOptions& opt = {}) {
    const auto& inv = h.locations[q].invariant;
    return edge_weight_lps(h, q, facet_set(inv, f1), facet_set(inv, f2), opt).weight;
}

/// A location diverges when some nonzero flow direction lies inside the
/// invariant cone: the execution can then stay forever with unbounded norm
/// growth. Directions are the homogenization {lambda * f : f in F, lambda
/// >= 0}, tested under a unit-norm case split.
inline bool location_divergent(const Pphs& h, int q, const SolverOptions& opt = {}) {
    const int n = h.dim;
    const auto& loc = h.locations[q];
    for (int i = 0; i < n; ++i) {
        for (double sigma : {1.0, -1.0}) {
            // Variables: direction d (n entries), scale lambda.
            LinearProgram lp;
            lp.objective.assign(n + 1, 0.0);
            lp.bounds.assign(n + 1, Bounds{-1.0, 1.0});
            lp.bounds[n] = {0.0, kInf};
            for (const auto& hs : loc.flow.halfspaces) {
                Constraint c{std::vector<double>(n + 1, 0.0), hs.rel, 0.0};
                for (int k = 0; k < n; ++k) c.coeffs[k] = hs.normal[k];
                c.coeffs[n] = -hs.offset;
                lp.constraints.push_back(std::move(c));
            }
            for (const auto& hs : loc.invariant.base.halfspaces) {
                Constraint c{std::vector<double>(n + 1, 0.0), hs.rel, 0.0};
                for (int k = 0; k < n; ++k) c.coeffs[k] = hs.normal[k];
                lp.constraints.push_back(std::move(c));
            }
            Constraint norm{std::vector<double>(n + 1, 0.0), Relation::Equal, 1.0};
            norm.coeffs[i] = sigma;
            lp.constraints.push_back(std::move(norm));
            if (solve(lp, opt).status == LpStatus::Optimal) return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Validation

inline std::vector<std::string> validate_pphs(const Pphs& h, const SolverOptions& opt = {}) {
    std::vector<std::string> out;
    const int n = h.dim;
    if (n < 1) { out.push_back("dim must be >= 1"); return out; }
    if (h.locations.empty()) { out.push_back("no locations"); return out; }

    auto check_poly = [&](const Polyhedron& p, const std::string& what, bool cone) {
        if (p.dim != n) out.push_back(what + ": dimension mismatch");
        for (const auto& hs : p.halfspaces) {
            if (static_cast<int>(hs.normal.size()) != n) {
                out.push_back(what + ": normal length mismatch");
                continue;
            }
            bool all_zero = true;
            for (double v : hs.normal) {
                if (!std::isfinite(v)) out.push_back(what + ": non-finite normal entry");
                if (v != 0.0) all_zero = false;
            }
            if (all_zero) out.push_back(what + ": all-zero normal");
            if (!std::isfinite(hs.offset)) out.push_back(what + ": non-finite offset");
            if (hs.rel == Relation::GreaterEq) out.push_back(what + ": relation must be <= or =");
            if (cone && hs.offset != 0.0) out.push_back(what + ": invariant not a cone (nonzero offset)");
        }
    };
    for (size_t q = 0; q < h.locations.size(); ++q) {
        check_poly(h.locations[q].invariant.base, "location " + std::to_string(q) + " invariant", true);
        check_poly(h.locations[q].flow, "location " + std::to_string(q) + " flow", false);
    }
    if (!out.empty()) return out;  // geometry below assumes well-formed rows

    std::vector<std::vector<Facet>> facets(h.locations.size());
    for (size_t q = 0; q < h.locations.size(); ++q) {
        try {
            facets[q] = enumerate_facets(h.locations[q].invariant, opt);
        } catch (const EmptyInvariant&) {
            out.push_back("location " + std::to_string(q) + ": invariant has no nonzero point");
        }
    }
    if (!out.empty()) return out;

    std::map<std::pair<int, int>, int> seen;
    for (size_t e = 0; e < h.edges.size(); ++e) {
        const auto& edge = h.edges[e];
        const std::string tag = "edge " + std::to_string(e);
        if (edge.loc < 0 || edge.loc >= static_cast<int>(h.locations.size())) {
            out.push_back(tag + ": location out of range");
            continue;
        }
        if (edge.facet_index < 0 || edge.facet_index >= static_cast<int>(facets[edge.loc].size())) {
            out.push_back(tag + ": facet index out of range");
            continue;
        }
        if (!seen.emplace(std::make_pair(edge.loc, edge.facet_index), static_cast<int>(e)).second)
            out.push_back(tag + ": duplicate guard for (location, facet)");
        double sum = 0.0;
        for (auto [to, p] : edge.dist) {
            if (to < 0 || to >= static_cast<int>(h.locations.size()))
                out.push_back(tag + ": target location out of range");
            if (p < -kDistTol || p > 1.0 + kDistTol) out.push_back(tag + ": probability out of range");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > kDistTol)
            out.push_back(tag + ": distribution sums to " + std::to_string(sum));
        const auto fs = facet_set(h.locations[edge.loc].invariant, facets[edge.loc][edge.facet_index]);
        for (auto [to, p] : edge.dist) {
            if (p <= 0.0 || to < 0 || to >= static_cast<int>(h.locations.size())) continue;
            if (!pgeom::set_contained(n, fs, h.locations[to].invariant.base.halfspaces, opt))
                out.push_back(tag + ": guard facet not contained in invariant of target location " +
                              std::to_string(to));
        }
    }
    if (h.init_loc < 0 || h.init_loc >= static_cast<int>(h.locations.size()))
        out.push_back("init location out of range");
    if (static_cast<int>(h.init_point.size()) != n) out.push_back("init point dimension mismatch");
    return out;
}

// ---------------------------------------------------------------------------
// Abstraction

struct AbstractState {
    int loc = 0;
    int facet = 0;  // canonical facet id
};

struct ActionProvenance {
    enum class Kind { Strict, PassThrough, DivergentLoop, Surrogate };
    Kind kind = Kind::Strict;
    int case_lps = 0;      // weight case LPs attempted (4 n^2 for Strict)
    int target_facet = -1; // canonical facet the action moves to
};

struct AbstractWmdp {
    Wmdp wmdp;
    std::vector<AbstractState> states;                  // per abstract state
    std::vector<std::vector<Halfspace>> facet_sets;     // canonical facet table
    std::vector<std::pair<int, int>> facet_rep;         // representative (location, halfspace index)
    std::vector<std::vector<ActionProvenance>> provenance;
    std::vector<AbstractState> pruned;                  // dead-end states removed
    std::vector<int> divergent_locations;
    bool init_surrogate = false;
};

namespace detail {

struct PphsContext {
    std::vector<std::vector<Facet>> facets;          // per location
    std::vector<std::vector<int>> canon;             // per location, per facet position
    std::vector<std::vector<Halfspace>> canon_sets;  // canonical constraint lists
    std::vector<std::pair<int, int>> canon_rep;      // (location, halfspace index)
    std::vector<std::vector<int>> guard;             // per location, per facet position: edge id or -1
    std::vector<char> divergent;                     // per location
};

inline PphsContext build_context(const Pphs& h, const SolverOptions& opt) {
    PphsContext ctx;
    const int L = static_cast<int>(h.locations.size());
    ctx.facets.resize(L);
    ctx.canon.resize(L);
    ctx.guard.resize(L);
    ctx.divergent.assign(L, 0);
    for (int q = 0; q < L; ++q) {
        ctx.facets[q] = enumerate_facets(h.locations[q].invariant, opt);
        ctx.guard[q].assign(ctx.facets[q].size(), -1);
        for (size_t k = 0; k < ctx.facets[q].size(); ++k) {
            auto fs = facet_set(h.locations[q].invariant, ctx.facets[q][k]);
            int id = -1;
            for (size_t c = 0; c < ctx.canon_sets.size(); ++c) {
                if (pgeom::sets_equal(h.dim, fs, ctx.canon_sets[c], opt)) {
                    id = static_cast<int>(c);
                    break;
                }
            }
            if (id < 0) {
                id = static_cast<int>(ctx.canon_sets.size());
                ctx.canon_sets.push_back(std::move(fs));
                ctx.canon_rep.push_back({q, ctx.facets[q][k].active_index});
            }
            ctx.canon[q].push_back(id);
        }
        ctx.divergent[q] = location_divergent(h, q, opt) ? 1 : 0;
    }
    for (size_t e = 0; e < h.edges.size(); ++e)
        ctx.guard[h.edges[e].loc][h.edges[e].facet_index] = static_cast<int>(e);
    return ctx;
}

}  // namespace detail

/// Abstracts the PPHS to a finite WMDP over (location, facet) pairs
/// reachable from the abstract init state. Guarded facets reachable by a
/// positive-duration continuous transition become actions weighted by the
/// 4 n^2 LPs; a state whose flow admits no such transition falls back to
/// instant-exit actions through guards containing its facet (the execution
/// is already on the guard, so the switch fires with log-ratio 0).
inline AbstractWmdp abstract_pphs(const Pphs& h, const SolverOptions& opt = {}) {
    {
        auto violations = validate_pphs(h, opt);
        if (!violations.empty()) throw ValidationError("invalid PPHS: " + violations.front());
    }
    const int n = h.dim;
    detail::PphsContext ctx = detail::build_context(h, opt);

    AbstractWmdp out;
    out.facet_sets = ctx.canon_sets;
    out.facet_rep = ctx.canon_rep;
    for (size_t q = 0; q < h.locations.size(); ++q)
        if (ctx.divergent[q]) out.divergent_locations.push_back(static_cast<int>(q));

    // Abstract init: the unique facet of I(init_loc) containing the init point.
    const double ptol = 1e-9 * std::max(1.0, [&] {
        double m = 0.0;
        for (double v : h.init_point) m = std::max(m, std::fabs(v));
        return m;
    }());
    if (!pgeom::point_in(h.locations[h.init_loc].invariant.base.halfspaces, h.init_point, ptol))
        throw InitNotOnFacet("init point lies outside the invariant of its location");
    std::vector<int> candidates;
    for (size_t k = 0; k < ctx.facets[h.init_loc].size(); ++k) {
        auto fs = facet_set(h.locations[h.init_loc].invariant, ctx.facets[h.init_loc][k]);
        if (pgeom::point_in(fs, h.init_point, ptol)) {
            int id = ctx.canon[h.init_loc][k];
            if (std::find(candidates.begin(), candidates.end(), id) == candidates.end())
                candidates.push_back(id);
        }
    }
    if (candidates.empty())
        throw InitNotOnFacet("init point lies on no facet of its location invariant");
    if (candidates.size() > 1) {
        std::string msg = "init point lies on several facets:";
        for (int c : candidates) msg += " #" + std::to_string(c);
        throw InitNotOnFacet(msg);
    }

    // BFS over (location, canonical facet) states.
    std::map<std::pair<int, int>, int> id_of;
    std::vector<AbstractState> states;
    struct PendingAction {
        WmdpAction action;
        ActionProvenance prov;
    };
    std::vector<std::vector<PendingAction>> acts;
    auto state_id = [&](int loc, int facet) {
        auto [it, inserted] = id_of.emplace(std::make_pair(loc, facet), static_cast<int>(states.size()));
        if (inserted) {
            states.push_back({loc, facet});
            acts.emplace_back();
        }
        return it->second;
    };
    const int init_id = state_id(h.init_loc, candidates.front());

    for (int cur = 0; cur < static_cast<int>(states.size()); ++cur) {
        const auto [q, fid] = states[cur];
        const auto& f1 = ctx.canon_sets[fid];
        std::vector<PendingAction> list;
        for (size_t k = 0; k < ctx.facets[q].size(); ++k) {
            const int eid = ctx.guard[q][k];
            if (eid < 0) continue;
            const int gid = ctx.canon[q][k];
            const auto& f2 = ctx.canon_sets[gid];
            if (continuous_edge_feasible(h, q, f1, f2, opt)) {
                EdgeWeightResult w = edge_weight_lps(h, q, f1, f2, opt);
                PendingAction pa;
                pa.action.weight = w.weight;
                for (auto [to, p] : h.edges[eid].dist)
                    if (p > 0.0) pa.action.dist.push_back({state_id(to, gid), p});
                std::sort(pa.action.dist.begin(), pa.action.dist.end());
                pa.prov = {ActionProvenance::Kind::Strict, w.case_lps, gid};
                list.push_back(std::move(pa));
            }
            // Instant exit: every point of the state's facet already lies on
            // this guard, so the switch may fire with log-ratio 0 before any
            // continuous motion.
            if (gid == fid || pgeom::set_contained(n, f1, f2, opt)) {
                PendingAction pa;
                pa.action.weight = 0.0;
                for (auto [to, p] : h.edges[eid].dist)
                    if (p > 0.0) pa.action.dist.push_back({state_id(to, fid), p});
                std::sort(pa.action.dist.begin(), pa.action.dist.end());
                pa.prov = {ActionProvenance::Kind::PassThrough, 0, fid};
                list.push_back(std::move(pa));
            }
        }
        if (ctx.divergent[q]) {
            PendingAction pa;
            pa.action.weight = kInf;
            pa.action.dist.push_back({cur, 1.0});
            pa.prov = {ActionProvenance::Kind::DivergentLoop, 0, fid};
            list.push_back(std::move(pa));
        }
        acts[cur] = std::move(list);
    }

    // Dead-end cascade: drop states without actions and every action whose
    // support touches a dropped state.
    std::vector<char> alive(states.size(), 1);
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t s = 0; s < states.size(); ++s) {
            if (!alive[s]) continue;
            auto& list = acts[s];
            for (size_t a = 0; a < list.size();) {
                bool ok = true;
                for (auto [to, p] : list[a].action.dist)
                    if (!alive[to]) ok = false;
                if (!ok) {
                    list.erase(list.begin() + a);
                    changed = true;
                } else {
                    ++a;
                }
            }
            if (list.empty()) {
                alive[s] = 0;
                changed = true;
            }
        }
    }

    for (size_t s = 0; s < states.size(); ++s)
        if (!alive[s]) out.pruned.push_back(states[s]);

    if (!alive[init_id]) {
        // Execution cannot continue from init at all: absorb with an
        // infinitely contracting self-loop (trivially convergent).
        out.init_surrogate = true;
        out.states = {states[init_id]};
        out.wmdp.state_count = 1;
        out.wmdp.init_state = 0;
        out.wmdp.actions = {{WmdpAction{{{0, 1.0}}, kNegInfiniteWeight}}};
        out.provenance = {{{ActionProvenance::Kind::Surrogate, 0, states[init_id].facet}}};
        return out;
    }

    std::vector<int> remap(states.size(), -1);
    for (size_t s = 0; s < states.size(); ++s) {
        if (!alive[s]) continue;
        remap[s] = static_cast<int>(out.states.size());
        out.states.push_back(states[s]);
    }
    out.wmdp.state_count = static_cast<int>(out.states.size());
    out.wmdp.init_state = remap[init_id];
    out.wmdp.actions.resize(out.wmdp.state_count);
    out.provenance.resize(out.wmdp.state_count);
    for (size_t s = 0; s < states.size(); ++s) {
        if (!alive[s]) continue;
        for (auto& pa : acts[s]) {
            WmdpAction act;
            act.weight = pa.action.weight;
            for (auto [to, p] : pa.action.dist) act.dist.push_back({remap[to], p});
            out.wmdp.actions[remap[s]].push_back(std::move(act));
            out.provenance[remap[s]].push_back(pa.prov);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// End-to-end stability verdict

struct PphsVerdict {
    Verdict verdict = Verdict::Unknown;
    MeanPayoffValue payoff;
    bool infinite_edge = false;
    AbstractWmdp abstraction;
};

/// Stability of the PPHS via its abstraction: sound but not complete, so a
/// non-negative (or infinite) payoff only yields Unknown.
inline PphsVerdict pphs_stability_verdict(const Pphs& h, const SolverOptions& opt = {}, int threads = 1) {
    PphsVerdict out;
    out.abstraction = abstract_pphs(h, opt);
    StabilityResult r = wmdp_stability_verdict(out.abstraction.wmdp, opt, threads);
    out.verdict = r.verdict;
    out.payoff = r.payoff;
    out.infinite_edge = r.infinite_edge;
    return out;
}

}  // namespace polystab
