#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "siacmra/mesh.hpp"

namespace siacmra {

// One piece of a traced line: [t0,t1] lies inside a single element. Adding
// `shift` to the unwrapped point x0 + t*dir lands in that element's stored
// coordinates (shift is a multiple of the domain period per axis).
struct TraceSegment {
    double t0, t1;
    int elem;
    Vec2 shift;
};

struct LineTrace {
    Vec2 origin;
    Vec2 dir;
    std::vector<TraceSegment> segments;

    Vec2 point(const TraceSegment& s, double t) const { return origin + t * dir + s.shift; }
    double length() const {
        double L = 0.0;
        for (const auto& s : segments) L += s.t1 - s.t0;
        return L;
    }
};

namespace detail {

inline long long floor_div(long long a, long long b) {
    long long q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace detail

// Partition the segment x0 + t*dir, t in [t_min, t_max], at every element
// boundary crossing (with periodic unwrapping). Crossings closer than the
// geometric tolerance are merged. Non-periodic meshes reject exiting traces.
inline LineTrace trace_line(const Mesh& mesh, Vec2 x0, double theta, double t_min, double t_max) {
    if (mesh.dim != 2) throw std::invalid_argument("trace_line: 2D meshes only");
    if (!(t_max > t_min)) throw std::invalid_argument("trace_line: empty parameter range");
    Vec2 d{std::cos(theta), std::sin(theta)};
    Vec2 a = x0 + t_min * d, b = x0 + t_max * d;
    double tol = 1e-12 * mesh.domain_scale();
    for (int axis = 0; axis < 2; ++axis) {
        if (mesh.periodic[static_cast<std::size_t>(axis)]) continue;
        double lo = axis == 0 ? mesh.box.lo.x : mesh.box.lo.y;
        double hi = axis == 0 ? mesh.box.hi.x : mesh.box.hi.y;
        double pa = axis == 0 ? a.x : a.y, pb = axis == 0 ? b.x : b.y;
        if (std::min(pa, pb) < lo - tol || std::max(pa, pb) > hi + tol)
            throw domain_exit_error("trace_line: trace exits non-periodic domain");
    }

    // gather candidate (element, period shift) pairs along the ray via a
    // grid walk in unwrapped cell coordinates, expanded by one ring
    const double Lx = mesh.box.len(0), Ly = mesh.box.len(1);
    const int nbx = mesh.bins_nx(), nby = mesh.bins_ny();
    const double bx = Lx / nbx, by = Ly / nby;
    std::set<std::pair<long long, long long>> cells;
    {
        Vec2 p0 = a;
        long long ci = static_cast<long long>(std::floor((p0.x - mesh.box.lo.x) / bx));
        long long cj = static_cast<long long>(std::floor((p0.y - mesh.box.lo.y) / by));
        int si = d.x > 0 ? 1 : (d.x < 0 ? -1 : 0);
        int sj = d.y > 0 ? 1 : (d.y < 0 ? -1 : 0);
        const double inf = std::numeric_limits<double>::infinity();
        double tmx = inf, tmy = inf, tdx = inf, tdy = inf;
        if (si != 0) {
            double next_x = mesh.box.lo.x + (ci + (si > 0 ? 1 : 0)) * bx;
            tmx = (next_x - x0.x) / d.x;
            tdx = bx / std::abs(d.x);
        }
        if (sj != 0) {
            double next_y = mesh.box.lo.y + (cj + (sj > 0 ? 1 : 0)) * by;
            tmy = (next_y - x0.y) / d.y;
            tdy = by / std::abs(d.y);
        }
        while (true) {
            cells.insert({ci, cj});
            if (tmx <= tmy) {
                if (tmx > t_max) break;
                ci += si;
                tmx += tdx;
            } else {
                if (tmy > t_max) break;
                cj += sj;
                tmy += tdy;
            }
            if (cells.size() > 1000000) throw geometry_error("trace_line: runaway grid walk");
        }
    }
    std::set<std::pair<long long, long long>> expanded;
    for (auto [i, j] : cells)
        for (long long di = -1; di <= 1; ++di)
            for (long long dj = -1; dj <= 1; ++dj) expanded.insert({i + di, j + dj});

    std::set<std::array<long long, 3>> seen;  // {elem, kx, ky}
    std::vector<double> cuts{t_min, t_max};
    for (auto [i, j] : expanded) {
        long long kx = detail::floor_div(i, nbx), ky = detail::floor_div(j, nby);
        int iw = static_cast<int>(i - kx * nbx), jw = static_cast<int>(j - ky * nby);
        if (!mesh.periodic[0] && kx != 0) continue;
        if (!mesh.periodic[1] && ky != 0) continue;
        Vec2 shift{static_cast<double>(kx) * Lx, static_cast<double>(ky) * Ly};
        for (int e : mesh.bin_cell(iw, jw)) {
            if (!seen.insert({e, kx, ky}).second) continue;
            int nv = mesh.nv_per_elem();
            for (int v = 0; v < nv; ++v) {
                Vec2 A = mesh.vertex(e, v) + shift;
                Vec2 B = mesh.vertex(e, (v + 1) % nv) + shift;
                Vec2 eab = B - A;
                double den = cross(d, eab);
                if (std::abs(den) < 1e-14 * norm(eab)) continue;
                double t = cross(A - x0, eab) / den;
                if (t < t_min - tol || t > t_max + tol) continue;
                Vec2 hit = x0 + t * d;
                double u = dot(hit - A, eab) / dot(eab, eab);
                if (u < -1e-10 || u > 1.0 + 1e-10) continue;
                cuts.push_back(std::clamp(t, t_min, t_max));
            }
        }
    }

    std::sort(cuts.begin(), cuts.end());
    std::vector<double> merged;
    for (double t : cuts)
        if (merged.empty() || t - merged.back() > tol) merged.push_back(t);
    if (merged.back() < t_max - tol)
        merged.push_back(t_max);
    else
        merged.back() = t_max;
    merged.front() = t_min;

    LineTrace tr;
    tr.origin = x0;
    tr.dir = d;
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        double ta = merged[i], tb = merged[i + 1];
        if (tb - ta <= tol) continue;
        Vec2 mid = x0 + 0.5 * (ta + tb) * d;
        Vec2 wrapped = mesh.wrap(mid);
        int e = mesh.locate(wrapped);
        tr.segments.push_back({ta, tb, e, wrapped - mid});
    }
    if (tr.segments.empty()) throw geometry_error("trace_line: empty trace");
    tr.segments.front().t0 = t_min;
    tr.segments.back().t1 = t_max;
    return tr;
}

}  // namespace siacmra
