#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "siacmra/mesh.hpp"

namespace siacmra {

namespace detail {

struct DTri {
    int a, b, c;
    bool alive = true;
};

struct Circum {
    Vec2 c;
    double r2;
};

inline Circum circumcircle(Vec2 a, Vec2 b, Vec2 c) {
    Vec2 ab = b - a, ac = c - a;
    double d = 2.0 * cross(ab, ac);
    double ab2 = dot(ab, ab), ac2 = dot(ac, ac);
    Vec2 cc{a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
    return {cc, dot(cc - a, cc - a)};
}

}  // namespace detail

// Bowyer-Watson triangulation of a point set. Cocircular ties (exact lattice
// squares) stay outside the insertion cavity, so either diagonal may appear;
// both are valid Delaunay triangulations.
inline std::vector<std::array<int, 3>> bowyer_watson(const std::vector<Vec2>& pts, double tie_tol) {
    using detail::DTri;
    const int n = static_cast<int>(pts.size());
    if (n < 3) throw geometry_error("bowyer_watson: need at least three points");
    Vec2 lo = pts[0], hi = pts[0];
    for (const Vec2& p : pts) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    double span = std::max({hi.x - lo.x, hi.y - lo.y, 1e-30});
    Vec2 mid = 0.5 * (lo + hi);
    std::vector<Vec2> all(pts);
    all.push_back({mid.x - 40.0 * span, mid.y - 20.0 * span});
    all.push_back({mid.x + 40.0 * span, mid.y - 20.0 * span});
    all.push_back({mid.x, mid.y + 40.0 * span});
    std::vector<DTri> tris;
    tris.push_back({n, n + 1, n + 2});

    auto ccw = [&](DTri& t) {
        if (cross(all[static_cast<std::size_t>(t.b)] - all[static_cast<std::size_t>(t.a)],
                  all[static_cast<std::size_t>(t.c)] - all[static_cast<std::size_t>(t.a)]) < 0)
            std::swap(t.b, t.c);
    };
    ccw(tris[0]);

    for (int ip = 0; ip < n; ++ip) {
        Vec2 p = all[static_cast<std::size_t>(ip)];
        std::vector<int> bad;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (!tris[t].alive) continue;
            auto cc = detail::circumcircle(all[static_cast<std::size_t>(tris[t].a)], all[static_cast<std::size_t>(tris[t].b)],
                                           all[static_cast<std::size_t>(tris[t].c)]);
            if (dot(p - cc.c, p - cc.c) < cc.r2 - tie_tol) bad.push_back(static_cast<int>(t));
        }
        if (bad.empty()) throw geometry_error("bowyer_watson: degenerate point set");
        // boundary of the cavity: edges used exactly once
        std::map<std::pair<int, int>, std::array<int, 2>> edge_use;
        for (int t : bad) {
            const DTri& tr = tris[static_cast<std::size_t>(t)];
            int vs[3] = {tr.a, tr.b, tr.c};
            for (int i = 0; i < 3; ++i) {
                int u = vs[i], w = vs[(i + 1) % 3];
                auto key = std::make_pair(std::min(u, w), std::max(u, w));
                auto it = edge_use.find(key);
                if (it == edge_use.end())
                    edge_use[key] = {u, w};
                else
                    it->second = {-1, -1};
            }
        }
        for (int t : bad) tris[static_cast<std::size_t>(t)].alive = false;
        for (auto& [key, dir] : edge_use) {
            if (dir[0] < 0) continue;
            DTri t{dir[0], dir[1], ip};
            ccw(t);
            tris.push_back(t);
        }
    }

    std::vector<std::array<int, 3>> out;
    for (const DTri& t : tris) {
        if (!t.alive) continue;
        if (t.a >= n || t.b >= n || t.c >= n) continue;
        out.push_back({t.a, t.b, t.c});
    }
    if (out.empty()) throw geometry_error("bowyer_watson: degenerate (collinear) point set");
    return out;
}

// Delaunay triangulation of the perturbed lattice nodes
inline Mesh perturbed_delaunay_mesh(int nx, int ny, double p_scale, std::uint64_t seed,
                                    Box box = {{0, 0}, {1, 1}},
                                    std::array<bool, 2> periodic_flags = {true, true}) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("perturbed_delaunay_mesh: need at least one element");
    std::vector<Vec2> nodes = perturbed_lattice(nx, ny, p_scale, seed, box);
    double h = std::min(box.len(0) / nx, box.len(1) / ny);
    auto tris = bowyer_watson(nodes, 1e-12 * h * h);
    Mesh m;
    m.dim = 2;
    m.kind = ElemKind::triangle;
    m.box = box;
    m.periodic = periodic_flags;
    m.verts = nodes;
    for (auto& t : tris) {
        m.elems.push_back({t[0], t[1], t[2], -1});
        m.levels.push_back(0);
    }
    m.finalize();
    return m;
}

}  // namespace siacmra
