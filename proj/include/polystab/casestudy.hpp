#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "polystab/pphs.hpp"

namespace polystab {

using Mat2 = std::array<std::array<double, 2>, 2>;

// Probabilistically switched planar system from the experiments: the
// dynamics matrix flips between these two with equal probability at
// sector boundaries.
inline constexpr Mat2 kSwitchedA1{{{-5.0, -4.0}, {-1.0, -2.0}}};
inline constexpr Mat2 kSwitchedA2{{{-2.0, -4.0}, {20.0, -2.0}}};

namespace detail {

inline std::vector<double> mat_apply(const Mat2& a, double x, double y) {
    return {a[0][0] * x + a[0][1] * y, a[1][0] * x + a[1][1] * y};
}

/// Segment between the two image points, as halfspaces. The reachable
/// displacements f*R (R >= 0) span the same cone as the full image of the
/// sector, but the polyhedron itself stays away from the origin, so the
/// system cannot stall at a nonzero state.
inline Polyhedron segment_of(std::vector<double> u, std::vector<double> v) {
    Polyhedron p;
    p.dim = 2;
    const std::vector<double> dir{v[0] - u[0], v[1] - u[1]};
    const std::vector<double> n{-dir[1], dir[0]};
    const double c = n[0] * u[0] + n[1] * u[1];
    const double dlen = std::max(std::fabs(dir[0]), std::fabs(dir[1]));
    if (dlen > 1e-12 && std::fabs(c) > 1e-9) {
        p.halfspaces.push_back({n, Relation::Equal, c});
        const double lo = dir[0] * u[0] + dir[1] * u[1];
        const double hi = dir[0] * v[0] + dir[1] * v[1];
        p.halfspaces.push_back({{-dir[0], -dir[1]}, Relation::LessEq, -lo});
        p.halfspaces.push_back({dir, Relation::LessEq, hi});
        return p;
    }
    // Degenerate: equal points (a fixed rate) or a segment collinear with
    // the origin; pin the flow to the dominant image point.
    const double nu = std::max(std::fabs(u[0]), std::fabs(u[1]));
    const double nv = std::max(std::fabs(v[0]), std::fabs(v[1]));
    const std::vector<double>& w = (nu >= nv) ? u : v;
    p.halfspaces.push_back({{1.0, 0.0}, Relation::Equal, w[0]});
    p.halfspaces.push_back({{0.0, 1.0}, Relation::Equal, w[1]});
    return p;
}

}  // namespace detail

/// Hybridization of the switched system over uniform angular sectors: two
/// locations per sector (one per dynamics matrix), flow spanned by the
/// images of the sector's extreme rays, and guards on every boundary ray
/// the flow can actually cross, switching to the adjacent sector's two
/// locations with probability 1/2 each. Sectors are centered on the axes
/// (boundary rays sit at half-sector angles).
inline Pphs switched_system_pphs(int sectors, const Mat2& a1 = kSwitchedA1, const Mat2& a2 = kSwitchedA2) {
    if (sectors < 3) throw ValidationError("switched_system_pphs: need at least 3 sectors");
    const int k = sectors;
    Pphs h;
    h.dim = 2;

    const double pi = std::acos(-1.0);
    std::vector<std::vector<double>> ray(k);
    for (int i = 0; i < k; ++i) {
        const double th = 2.0 * pi * (i + 0.5) / k;
        ray[i] = {std::cos(th), std::sin(th)};
    }
    auto loc_index = [&](int sector, int dyn) { return 2 * ((sector % k + k) % k) + dyn; };

    for (int s = 0; s < k; ++s) {
        const auto& r0 = ray[s];
        const auto& r1 = ray[(s + 1) % k];
        Polyhedron inv;
        inv.dim = 2;
        // Inside: cross(r0, x) >= 0 and cross(r1, x) <= 0.
        inv.halfspaces.push_back({{r0[1], -r0[0]}, Relation::LessEq, 0.0});
        inv.halfspaces.push_back({{-r1[1], r1[0]}, Relation::LessEq, 0.0});
        for (int dyn = 0; dyn < 2; ++dyn) {
            const Mat2& a = (dyn == 0) ? a1 : a2;
            PphsLocation loc;
            loc.invariant.base = inv;
            loc.flow = detail::segment_of(detail::mat_apply(a, r0[0], r0[1]),
                                          detail::mat_apply(a, r1[0], r1[1]));
            h.locations.push_back(std::move(loc));
        }
    }

    // Guards: facet 0 of sector s is the ray toward sector s-1, facet 1 the
    // ray toward sector s+1. A guard exists when some flow direction has a
    // strictly outward component there.
    for (int s = 0; s < k; ++s) {
        for (int dyn = 0; dyn < 2; ++dyn) {
            const int loc = loc_index(s, dyn);
            const Mat2& a = (dyn == 0) ? a1 : a2;
            const auto u = detail::mat_apply(a, ray[s][0], ray[s][1]);
            const auto v = detail::mat_apply(a, ray[(s + 1) % k][0], ray[(s + 1) % k][1]);
            const auto& inv = h.locations[loc].invariant.base;
            for (int facet = 0; facet < 2; ++facet) {
                const auto& outward = inv.halfspaces[facet].normal;  // a.x <= 0 inside
                const double du = outward[0] * u[0] + outward[1] * u[1];
                const double dv = outward[0] * v[0] + outward[1] * v[1];
                if (std::max(du, dv) <= 1e-9) continue;
                const int target = (facet == 0) ? s - 1 : s + 1;
                PphsEdge e;
                e.loc = loc;
                e.facet_index = facet;
                e.dist = {{loc_index(target, 0), 0.5}, {loc_index(target, 1), 0.5}};
                h.edges.push_back(std::move(e));
            }
        }
    }

    h.init_loc = loc_index(0, 0);
    h.init_point = ray[0];
    return h;
}

}  // namespace polystab
