#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "siacmra/basis.hpp"
#include "siacmra/core.hpp"

namespace siacmra {

struct Box {
    Vec2 lo{0.0, 0.0};
    Vec2 hi{1.0, 0.0};
    double len(int axis) const { return axis == 0 ? hi.x - lo.x : hi.y - lo.y; }
};

// ---------------------------------------------------------------------------
// Geometry of a single element: reference <-> physical maps.
// Reference elements: [-1,1] (interval), [-1,1]^2 (quad, bilinear map from
// CCW corners), unit right triangle (affine map).
// ---------------------------------------------------------------------------
struct ElemGeom {
    ElemKind kind = ElemKind::interval;
    std::array<Vec2, 4> v{};
    bool affine = true;
    double area = 0.0;

    double mean_jac() const { return area / reference_measure(kind); }
    // physical orthonormal modes are reference modes divided by this
    double norm_scale() const { return std::sqrt(mean_jac()); }

    Vec2 map(Vec2 r) const {
        switch (kind) {
            case ElemKind::interval:
                return {v[0].x + 0.5 * (r.x + 1.0) * (v[1].x - v[0].x), 0.0};
            case ElemKind::triangle:
                return v[0] + r.x * (v[1] - v[0]) + r.y * (v[2] - v[0]);
            case ElemKind::quad: {
                double n0 = 0.25 * (1 - r.x) * (1 - r.y), n1 = 0.25 * (1 + r.x) * (1 - r.y);
                double n2 = 0.25 * (1 + r.x) * (1 + r.y), n3 = 0.25 * (1 - r.x) * (1 + r.y);
                return n0 * v[0] + n1 * v[1] + n2 * v[2] + n3 * v[3];
            }
        }
        return {};
    }

    double jac_det(Vec2 r) const {
        switch (kind) {
            case ElemKind::interval:
                return 0.5 * (v[1].x - v[0].x);
            case ElemKind::triangle:
                return cross(v[1] - v[0], v[2] - v[0]);
            case ElemKind::quad: {
                Vec2 dxi = 0.25 * ((v[1] - v[0]) * (1 - r.y) + (v[2] - v[3]) * (1 + r.y));
                Vec2 deta = 0.25 * ((v[3] - v[0]) * (1 - r.x) + (v[2] - v[1]) * (1 + r.x));
                return cross(dxi, deta);
            }
        }
        return 0.0;
    }

    Vec2 inv_map(Vec2 x) const {
        switch (kind) {
            case ElemKind::interval:
                return {2.0 * (x.x - v[0].x) / (v[1].x - v[0].x) - 1.0, 0.0};
            case ElemKind::triangle: {
                Vec2 e1 = v[1] - v[0], e2 = v[2] - v[0], rhs = x - v[0];
                double det = cross(e1, e2);
                return {cross(rhs, e2) / det, cross(e1, rhs) / det};
            }
            case ElemKind::quad: {
                Vec2 r{0.0, 0.0};
                for (int it = 0; it < 30; ++it) {
                    Vec2 res = map(r) - x;
                    Vec2 dxi = 0.25 * ((v[1] - v[0]) * (1 - r.y) + (v[2] - v[3]) * (1 + r.y));
                    Vec2 deta = 0.25 * ((v[3] - v[0]) * (1 - r.x) + (v[2] - v[1]) * (1 + r.x));
                    double det = cross(dxi, deta);
                    Vec2 dr{(res.x * deta.y - res.y * deta.x) / det,
                            (dxi.x * res.y - dxi.y * res.x) / det};
                    r = r - dr;
                    if (std::abs(dr.x) + std::abs(dr.y) < 1e-15) break;
                }
                return r;
            }
        }
        return {};
    }

    double diameter() const {
        int nv = kind_nverts(kind);
        double d = 0.0;
        for (int i = 0; i < nv; ++i)
            for (int j = i + 1; j < nv; ++j) d = std::max(d, norm(v[i] - v[j]));
        return d;
    }
};

// ---------------------------------------------------------------------------
// Hierarchical mesh: 1D intervals or 2D quads/triangles tiling a box, with
// per-element refinement levels, parent/child links into the mesh it was
// refined from, and an edge-midpoint registry that makes hanging-face
// topology a pure integer lookup. Meshes are immutable once built.
// ---------------------------------------------------------------------------
class Mesh {
 public:
    int dim = 1;
    ElemKind kind = ElemKind::interval;
    std::vector<Vec2> verts;
    std::vector<std::array<int, 4>> elems;  // unused slots -1
    std::vector<int> levels;
    std::array<bool, 2> periodic{false, false};
    Box box;

    // vertex provenance: midpoint_parent[v] = edge whose midpoint created v
    std::vector<std::array<int, 2>> midpoint_parent;
    // links to the mesh this one was refined from (empty for root meshes)
    std::uint64_t parent_hash = 0;
    std::vector<std::array<int, 4>> child_map;  // parent elem -> children here
    std::vector<int> parent_of;                 // elem -> parent elem index

    int n_elems() const { return static_cast<int>(elems.size()); }
    int n_verts() const { return static_cast<int>(verts.size()); }
    int nv_per_elem() const { return kind_nverts(kind); }

    Vec2 vertex(int e, int i) const { return verts[static_cast<std::size_t>(elems[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)])]; }

    ElemGeom geom(int e) const {
        ElemGeom g;
        g.kind = kind;
        int nv = nv_per_elem();
        for (int i = 0; i < nv; ++i) g.v[static_cast<std::size_t>(i)] = vertex(e, i);
        g.area = areas_[static_cast<std::size_t>(e)];
        if (kind == ElemKind::quad) {
            Vec2 q = g.v[0] - g.v[1] + g.v[2] - g.v[3];
            g.affine = std::abs(q.x) + std::abs(q.y) < 1e-13 * g.diameter();
        }
        return g;
    }

    double elem_area(int e) const { return areas_[static_cast<std::size_t>(e)]; }
    double total_area() const {
        double s = 0.0;
        for (double a : areas_) s += a;
        return s;
    }

    Vec2 elem_center(int e) const {
        Vec2 c{0.0, 0.0};
        int nv = nv_per_elem();
        for (int i = 0; i < nv; ++i) c = c + vertex(e, i);
        return (1.0 / nv) * c;
    }

    double elem_max_edge(int e) const {
        if (kind == ElemKind::interval) return vertex(e, 1).x - vertex(e, 0).x;
        int nv = nv_per_elem();
        double m = 0.0;
        for (int i = 0; i < nv; ++i) m = std::max(m, norm(vertex(e, (i + 1) % nv) - vertex(e, i)));
        return m;
    }

    double elem_min_edge(int e) const {
        if (kind == ElemKind::interval) return vertex(e, 1).x - vertex(e, 0).x;
        int nv = nv_per_elem();
        double m = std::numeric_limits<double>::max();
        for (int i = 0; i < nv; ++i) m = std::min(m, norm(vertex(e, (i + 1) % nv) - vertex(e, i)));
        return m;
    }

    double max_edge_length() const {
        double m = 0.0;
        for (int e = 0; e < n_elems(); ++e) m = std::max(m, elem_max_edge(e));
        return m;
    }
    double min_edge_length() const {
        double m = std::numeric_limits<double>::max();
        for (int e = 0; e < n_elems(); ++e) m = std::min(m, elem_min_edge(e));
        return m;
    }

    std::uint64_t hash() const { return hash_; }

    // ---------------------------------------------------------- point queries

    Vec2 wrap(Vec2 x) const {
        Vec2 y = x;
        if (periodic[0]) {
            double L = box.len(0);
            y.x = box.lo.x + std::fmod(y.x - box.lo.x, L);
            if (y.x < box.lo.x) y.x += L;
            if (y.x >= box.hi.x) y.x -= L;
        }
        if (dim == 2 && periodic[1]) {
            double L = box.len(1);
            y.y = box.lo.y + std::fmod(y.y - box.lo.y, L);
            if (y.y < box.lo.y) y.y += L;
            if (y.y >= box.hi.y) y.y -= L;
        }
        return y;
    }

    bool contains(int e, Vec2 x, double tol_scale = 1e-12) const {
        int nv = nv_per_elem();
        if (kind == ElemKind::interval)
            return x.x >= vertex(e, 0).x - tol_scale && x.x <= vertex(e, 1).x + tol_scale;
        for (int i = 0; i < nv; ++i) {
            Vec2 a = vertex(e, i), b = vertex(e, (i + 1) % nv);
            double c = cross(b - a, x - a);
            if (c < -tol_scale * norm(b - a)) return false;
        }
        return true;
    }

    // lowest-index element containing x (after periodic wrap)
    int locate(Vec2 x) const {
        Vec2 y = wrap(x);
        double tol = 1e-12 * domain_scale();
        if (!periodic[0]) {
            if (y.x < box.lo.x - tol || y.x > box.hi.x + tol)
                throw geometry_error("locate: point outside domain");
            y.x = std::clamp(y.x, box.lo.x, box.hi.x);
        }
        if (dim == 2 && !periodic[1]) {
            if (y.y < box.lo.y - tol || y.y > box.hi.y + tol)
                throw geometry_error("locate: point outside domain");
            y.y = std::clamp(y.y, box.lo.y, box.hi.y);
        }
        for (int e : bin_candidates(y))
            if (contains(e, y, tol)) return e;
        // fallback scan; bin registration uses inflated boxes so this should
        // only trigger for points sitting exactly on bin seams
        for (int e = 0; e < n_elems(); ++e)
            if (contains(e, y, tol)) return e;
        throw geometry_error("locate: no containing element at (" + g17(y.x) + "," + g17(y.y) + ")");
    }

    double domain_scale() const { return std::max({1.0, box.len(0), dim == 2 ? box.len(1) : 0.0}); }

    // ------------------------------------------------- characteristic lengths

    // area-weighted average of incident max edge lengths; periodically paired
    // boundary vertices are identified so the torus sees one value
    std::vector<double> vertex_char_lengths() const {
        std::vector<int> canon = canonical_vertices();
        std::vector<double> num(verts.size(), 0.0), den(verts.size(), 0.0);
        for (int e = 0; e < n_elems(); ++e) {
            double L = elem_max_edge(e), A = elem_area(e);
            for (int i = 0; i < nv_per_elem(); ++i) {
                int v = canon[static_cast<std::size_t>(elems[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)])];
                num[static_cast<std::size_t>(v)] += L * A;
                den[static_cast<std::size_t>(v)] += A;
            }
        }
        std::vector<double> h(verts.size(), 0.0);
        for (std::size_t v = 0; v < verts.size(); ++v) {
            std::size_t c = static_cast<std::size_t>(canon[v]);
            if (den[c] == 0.0)
                throw geometry_error("vertex_char_lengths: isolated vertex " + std::to_string(v));
            h[v] = num[c] / den[c];
        }
        return h;
    }

    // barycentric interpolation of vertex characteristic lengths at x
    // (bilinear shape-function weights on quads)
    double scaling_at_point(Vec2 x, const std::vector<double>& hv) const {
        int e = locate(x);
        Vec2 y = wrap(x);
        ElemGeom g = geom(e);
        auto hval = [&](int i) { return hv[static_cast<std::size_t>(elems[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)])]; };
        switch (kind) {
            case ElemKind::interval: {
                double xi = std::clamp((y.x - g.v[0].x) / (g.v[1].x - g.v[0].x), 0.0, 1.0);
                return (1.0 - xi) * hval(0) + xi * hval(1);
            }
            case ElemKind::triangle: {
                Vec2 r = g.inv_map(y);
                double l1 = std::clamp(r.x, 0.0, 1.0), l2 = std::clamp(r.y, 0.0, 1.0);
                double l0 = std::clamp(1.0 - l1 - l2, 0.0, 1.0);
                return l0 * hval(0) + l1 * hval(1) + l2 * hval(2);
            }
            case ElemKind::quad: {
                Vec2 r = g.inv_map(y);
                double xi = std::clamp(r.x, -1.0, 1.0), eta = std::clamp(r.y, -1.0, 1.0);
                double n0 = 0.25 * (1 - xi) * (1 - eta), n1 = 0.25 * (1 + xi) * (1 - eta);
                double n2 = 0.25 * (1 + xi) * (1 + eta), n3 = 0.25 * (1 - xi) * (1 + eta);
                return n0 * hval(0) + n1 * hval(1) + n2 * hval(2) + n3 * hval(3);
            }
        }
        return 0.0;
    }

    // sorted interval breakpoints (1D only)
    std::vector<double> breakpoints() const {
        if (kind != ElemKind::interval) throw std::invalid_argument("breakpoints: 1D meshes only");
        std::vector<double> b;
        b.reserve(static_cast<std::size_t>(n_elems()) + 1);
        for (int e = 0; e < n_elems(); ++e) b.push_back(vertex(e, 0).x);
        b.push_back(vertex(n_elems() - 1, 1).x);
        return b;
    }

    // ------------------------------------------------------------ face table

    struct FaceTable {
        std::vector<std::array<int, 4>> conforming;  // {e1, e2, a, b}, e1 < e2
        std::vector<std::array<int, 4>> hanging;     // {fine_e, coarse_e, a, b}
        std::vector<std::array<int, 3>> boundary;    // {e, a, b}
        std::vector<std::array<int, 2>> periodic;    // adjacency pairs across the wrap
    };

    FaceTable face_table() const {
        FaceTable t;
        if (kind == ElemKind::interval) {
            for (int e = 0; e + 1 < n_elems(); ++e)
                t.conforming.push_back({e, e + 1, elems[static_cast<std::size_t>(e)][1], elems[static_cast<std::size_t>(e)][1]});
            t.boundary.push_back({0, elems[0][0], elems[0][0]});
            t.boundary.push_back({n_elems() - 1, elems[static_cast<std::size_t>(n_elems() - 1)][1], elems[static_cast<std::size_t>(n_elems() - 1)][1]});
            if (periodic[0] && n_elems() > 1) t.periodic.push_back({0, n_elems() - 1});
            return t;
        }
        std::map<std::pair<int, int>, std::vector<std::array<int, 3>>> table;  // key -> {e,a,b}
        int nv = nv_per_elem();
        for (int e = 0; e < n_elems(); ++e)
            for (int i = 0; i < nv; ++i) {
                int a = elems[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)];
                int b = elems[static_cast<std::size_t>(e)][static_cast<std::size_t>((i + 1) % nv)];
                table[{std::min(a, b), std::max(a, b)}].push_back({e, a, b});
            }
        std::vector<std::array<int, 3>> unmatched;
        for (auto& [key, owners] : table) {
            if (owners.size() == 2)
                t.conforming.push_back({std::min(owners[0][0], owners[1][0]),
                                        std::max(owners[0][0], owners[1][0]), key.first, key.second});
            else if (owners.size() == 1)
                unmatched.push_back(owners[0]);
            else
                throw geometry_error("face_table: edge shared by more than two elements");
        }
        // single-owner faces: either the fine side of a hanging pair, the
        // coarse face those sub-faces cover, a true boundary face, or a
        // periodic partner
        std::set<std::pair<int, int>> consumed;  // coarse faces covered by hanging sub-faces
        for (auto& f : unmatched) {
            int e = f[0], a = f[1], b = f[2];
            for (int sel = 0; sel < 2; ++sel) {
                int m = sel == 0 ? a : b;
                int other = sel == 0 ? b : a;
                auto mp = midpoint_parent[static_cast<std::size_t>(m)];
                if (mp[0] < 0) continue;
                if (mp[0] != other && mp[1] != other) continue;
                std::pair<int, int> pkey{std::min(mp[0], mp[1]), std::max(mp[0], mp[1])};
                auto it = table.find(pkey);
                if (it != table.end() && it->second.size() == 1) {
                    t.hanging.push_back({e, it->second[0][0], a, b});
                    consumed.insert(pkey);
                    break;
                }
            }
        }
        for (auto& f : unmatched) {
            std::pair<int, int> key{std::min(f[1], f[2]), std::max(f[1], f[2])};
            if (consumed.count(key)) continue;
            bool is_fine_side = false;
            for (auto& h : t.hanging)
                if (h[0] == f[0] && ((h[2] == f[1] && h[3] == f[2]) || (h[2] == f[2] && h[3] == f[1]))) {
                    is_fine_side = true;
                    break;
                }
            if (!is_fine_side) t.boundary.push_back(f);
        }
        if (periodic[0] || periodic[1]) match_periodic(t);
        return t;
    }

    // hanging vertices: midpoints of an edge that still exists as a whole
    // face of some (coarser) element
    std::vector<int> hanging_nodes() const {
        std::vector<int> out;
        if (kind == ElemKind::interval) return out;
        FaceTable t = face_table();
        for (auto& h : t.hanging) {
            int a = h[2], b = h[3];
            int m = midpoint_parent[static_cast<std::size_t>(a)][0] >= 0 &&
                            (midpoint_parent[static_cast<std::size_t>(a)][0] == b || midpoint_parent[static_cast<std::size_t>(a)][1] == b)
                        ? a
                        : b;
            out.push_back(m);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // ---------------------------------------------------------------- output

    void dump(std::ostream& os) const {
        os << dim << ' ' << kind_name(kind) << ' ' << n_verts() << ' ' << n_elems() << '\n';
        for (const Vec2& v : verts) {
            os << g17(v.x);
            if (dim == 2) os << ' ' << g17(v.y);
            os << '\n';
        }
        int nv = nv_per_elem();
        for (int e = 0; e < n_elems(); ++e) {
            for (int i = 0; i < nv; ++i) os << (i ? " " : "") << elems[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)];
            os << '\n';
        }
    }

    // called once by every constructor after the raw arrays are filled
    void finalize() {
        if (midpoint_parent.size() != verts.size()) midpoint_parent.resize(verts.size(), {-1, -1});
        areas_.resize(static_cast<std::size_t>(n_elems()));
        for (int e = 0; e < n_elems(); ++e) {
            double a = signed_area(e);
            if (a <= 0.0) throw geometry_error("mesh: element " + std::to_string(e) + " has non-positive area");
            areas_[static_cast<std::size_t>(e)] = a;
        }
        build_bins();
        compute_hash();
    }

    const std::vector<int>& bin_candidates(Vec2 y) const {
        int i = std::clamp(static_cast<int>((y.x - box.lo.x) / box.len(0) * nbx_), 0, nbx_ - 1);
        int j = 0;
        if (dim == 2) j = std::clamp(static_cast<int>((y.y - box.lo.y) / box.len(1) * nby_), 0, nby_ - 1);
        return bins_[static_cast<std::size_t>(j * nbx_ + i)];
    }
    int bins_nx() const { return nbx_; }
    int bins_ny() const { return nby_; }
    const std::vector<int>& bin_cell(int i, int j) const { return bins_[static_cast<std::size_t>(j * nbx_ + i)]; }

 private:
    double signed_area(int e) const {
        if (kind == ElemKind::interval) return vertex(e, 1).x - vertex(e, 0).x;
        int nv = nv_per_elem();
        double s = 0.0;
        for (int i = 0; i < nv; ++i) s += cross(vertex(e, i), vertex(e, (i + 1) % nv));
        return 0.5 * s;
    }

    // map each vertex to the lowest-index vertex it is periodically paired with
    std::vector<int> canonical_vertices() const {
        std::vector<int> canon(verts.size());
        for (std::size_t v = 0; v < verts.size(); ++v) canon[v] = static_cast<int>(v);
        if (!periodic[0] && !(dim == 2 && periodic[1])) return canon;
        double tol = 1e-12 * domain_scale();
        auto key = [&](Vec2 p) {
            auto r = [&](double t) { return std::llround(t / tol); };
            return std::pair<long long, long long>(r(p.x), r(p.y));
        };
        std::map<std::pair<long long, long long>, int> first;
        for (std::size_t v = 0; v < verts.size(); ++v) {
            Vec2 p = verts[v];
            // fold onto the low boundary along periodic axes
            if (periodic[0] && std::abs(p.x - box.hi.x) < tol) p.x = box.lo.x;
            if (dim == 2 && periodic[1] && std::abs(p.y - box.hi.y) < tol) p.y = box.lo.y;
            auto [it, inserted] = first.try_emplace(key(p), static_cast<int>(v));
            canon[v] = it->second;
        }
        return canon;
    }

    // pair boundary faces across the wrap (axis-aligned box faces)
    void match_periodic(FaceTable& t) const {
        double tol = 1e-10 * domain_scale();
        struct BFace {
            int e;
            double t0, t1;
        };
        for (int axis = 0; axis < 2; ++axis) {
            if (!periodic[static_cast<std::size_t>(axis)]) continue;
            std::vector<BFace> lo, hi;
            double clo = axis == 0 ? box.lo.x : box.lo.y;
            double chi = axis == 0 ? box.hi.x : box.hi.y;
            for (auto& f : t.boundary) {
                Vec2 a = verts[static_cast<std::size_t>(f[1])], b = verts[static_cast<std::size_t>(f[2])];
                double ca = axis == 0 ? a.x : a.y, cb = axis == 0 ? b.x : b.y;
                double ta = axis == 0 ? a.y : a.x, tb = axis == 0 ? b.y : b.x;
                if (std::abs(ca - clo) < tol && std::abs(cb - clo) < tol)
                    lo.push_back({f[0], std::min(ta, tb), std::max(ta, tb)});
                else if (std::abs(ca - chi) < tol && std::abs(cb - chi) < tol)
                    hi.push_back({f[0], std::min(ta, tb), std::max(ta, tb)});
            }
            for (auto& fl : lo)
                for (auto& fh : hi)
                    if (std::min(fl.t1, fh.t1) - std::max(fl.t0, fh.t0) > tol)
                        t.periodic.push_back({fl.e, fh.e});
        }
    }

    void build_bins() {
        double mean_d = 0.0;
        for (int e = 0; e < n_elems(); ++e) mean_d += geom_diam(e);
        mean_d /= std::max(1, n_elems());
        nbx_ = std::clamp(static_cast<int>(box.len(0) / mean_d + 0.5), 1, 4096);
        nby_ = dim == 2 ? std::clamp(static_cast<int>(box.len(1) / mean_d + 0.5), 1, 4096) : 1;
        bins_.assign(static_cast<std::size_t>(nbx_) * nby_, {});
        for (int e = 0; e < n_elems(); ++e) {
            Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
            Vec2 hi{-lo.x, -lo.y};
            for (int i = 0; i < nv_per_elem(); ++i) {
                Vec2 p = vertex(e, i);
                lo.x = std::min(lo.x, p.x);
                lo.y = std::min(lo.y, p.y);
                hi.x = std::max(hi.x, p.x);
                hi.y = std::max(hi.y, p.y);
            }
            double inf = 1e-9 * geom_diam(e);
            int i0 = std::clamp(static_cast<int>((lo.x - inf - box.lo.x) / box.len(0) * nbx_), 0, nbx_ - 1);
            int i1 = std::clamp(static_cast<int>((hi.x + inf - box.lo.x) / box.len(0) * nbx_), 0, nbx_ - 1);
            int j0 = 0, j1 = 0;
            if (dim == 2) {
                j0 = std::clamp(static_cast<int>((lo.y - inf - box.lo.y) / box.len(1) * nby_), 0, nby_ - 1);
                j1 = std::clamp(static_cast<int>((hi.y + inf - box.lo.y) / box.len(1) * nby_), 0, nby_ - 1);
            }
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) bins_[static_cast<std::size_t>(j * nbx_ + i)].push_back(e);
        }
    }

    double geom_diam(int e) const {
        int nv = nv_per_elem();
        double d = 0.0;
        for (int i = 0; i < nv; ++i)
            for (int j = i + 1; j < nv; ++j) d = std::max(d, norm(vertex(e, i) - vertex(e, j)));
        return d;
    }

    void compute_hash() {
        Fnv1a h;
        h.add(static_cast<std::int64_t>(dim));
        h.add(static_cast<std::int64_t>(kind));
        h.add(static_cast<std::int64_t>(n_verts()));
        h.add(static_cast<std::int64_t>(n_elems()));
        h.add(static_cast<std::int64_t>(periodic[0]) * 2 + static_cast<std::int64_t>(periodic[1]));
        h.add(box.lo.x);
        h.add(box.lo.y);
        h.add(box.hi.x);
        h.add(box.hi.y);
        for (const Vec2& v : verts) {
            h.add(v.x);
            h.add(v.y);
        }
        for (int e = 0; e < n_elems(); ++e) {
            for (int i = 0; i < nv_per_elem(); ++i) h.add(static_cast<std::int64_t>(elems[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)]));
            h.add(static_cast<std::int64_t>(levels[static_cast<std::size_t>(e)]));
        }
        hash_ = h.value();
    }

    std::vector<double> areas_;
    std::vector<std::vector<int>> bins_;
    int nbx_ = 1, nby_ = 1;
    std::uint64_t hash_ = 0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

// ------------------------------------------------------------- constructors

inline Mesh uniform_interval_mesh(int n, double a, double b, bool periodic_flag = true) {
    if (n < 1) throw std::invalid_argument("uniform_interval_mesh: need at least one element");
    if (!(b > a)) throw std::invalid_argument("uniform_interval_mesh: empty domain");
    Mesh m;
    m.dim = 1;
    m.kind = ElemKind::interval;
    m.box = {{a, 0.0}, {b, 0.0}};
    m.periodic = {periodic_flag, false};
    m.verts.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) m.verts.push_back({a + (b - a) * i / n, 0.0});
    for (int i = 0; i < n; ++i) {
        m.elems.push_back({i, i + 1, -1, -1});
        m.levels.push_back(0);
    }
    m.finalize();
    return m;
}

inline Mesh interval_mesh_from_breakpoints(const std::vector<double>& bp, bool periodic_flag = false) {
    if (bp.size() < 2) throw std::invalid_argument("interval mesh needs two breakpoints");
    Mesh m;
    m.dim = 1;
    m.kind = ElemKind::interval;
    m.box = {{bp.front(), 0.0}, {bp.back(), 0.0}};
    m.periodic = {periodic_flag, false};
    for (double x : bp) m.verts.push_back({x, 0.0});
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        m.elems.push_back({static_cast<int>(i), static_cast<int>(i + 1), -1, -1});
        m.levels.push_back(0);
    }
    m.finalize();
    return m;
}

inline Mesh uniform_quad_mesh(int nx, int ny, Box box = {{0, 0}, {1, 1}},
                              std::array<bool, 2> periodic_flags = {true, true}) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("uniform_quad_mesh: need at least one element");
    Mesh m;
    m.dim = 2;
    m.kind = ElemKind::quad;
    m.box = box;
    m.periodic = periodic_flags;
    auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.verts.push_back({box.lo.x + box.len(0) * i / nx, box.lo.y + box.len(1) * j / ny});
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            m.elems.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
            m.levels.push_back(0);
        }
    m.finalize();
    return m;
}

// lattice node positions with seeded interior perturbation; boundary nodes
// only move tangentially and periodically paired nodes share draws
inline std::vector<Vec2> perturbed_lattice(int nx, int ny, double p_scale, std::uint64_t seed,
                                           Box box) {
    if (p_scale < 0.0 || p_scale >= 1.0)
        throw std::invalid_argument("perturbation scale must lie in [0,1)");
    double hx = box.len(0) / nx, hy = box.len(1) / ny;
    Pcg32 rng(seed);
    std::vector<std::array<double, 2>> draw(static_cast<std::size_t>(nx) * ny);
    for (auto& d : draw) {
        d[0] = rng.uniform_half();
        d[1] = rng.uniform_half();
    }
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            auto d = draw[static_cast<std::size_t>((j % ny) * nx + (i % nx))];
            double dx = (i == 0 || i == nx) ? 0.0 : p_scale * hx * d[0];
            double dy = (j == 0 || j == ny) ? 0.0 : p_scale * hy * d[1];
            nodes.push_back({box.lo.x + hx * i + dx, box.lo.y + hy * j + dy});
        }
    return nodes;
}

inline Mesh perturbed_quad_mesh(int nx, int ny, double p_scale, std::uint64_t seed,
                                Box box = {{0, 0}, {1, 1}},
                                std::array<bool, 2> periodic_flags = {true, true}) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("perturbed_quad_mesh: need at least one element");
    Mesh m = uniform_quad_mesh(nx, ny, box, periodic_flags);
    m.verts = perturbed_lattice(nx, ny, p_scale, seed, box);
    m.finalize();
    return m;
}

inline Mesh graded_quad_mesh(int n, double ratio, Box box = {{0, 0}, {1, 1}},
                             std::array<bool, 2> periodic_flags = {true, true}) {
    if (n < 1) throw std::invalid_argument("graded_quad_mesh: need at least one element");
    if (ratio < 1.0) throw std::invalid_argument("graded_quad_mesh: ratio must be >= 1");
    // symmetric geometric grading: small at the boundary, large in the center
    int half = std::max(1, (n - 1) / 2);
    double q = std::pow(ratio, 1.0 / half);
    std::vector<double> w(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i)] = std::pow(q, std::min(i, n - 1 - i));
        sum += w[static_cast<std::size_t>(i)];
    }
    std::vector<double> bx(static_cast<std::size_t>(n) + 1);
    bx[0] = 0.0;
    for (int i = 0; i < n; ++i) bx[static_cast<std::size_t>(i + 1)] = bx[static_cast<std::size_t>(i)] + w[static_cast<std::size_t>(i)] / sum;
    bx[static_cast<std::size_t>(n)] = 1.0;

    Mesh m;
    m.dim = 2;
    m.kind = ElemKind::quad;
    m.box = box;
    m.periodic = periodic_flags;
    auto vid = [&](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            m.verts.push_back({box.lo.x + box.len(0) * bx[static_cast<std::size_t>(i)],
                               box.lo.y + box.len(1) * bx[static_cast<std::size_t>(j)]});
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            m.elems.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
            m.levels.push_back(0);
        }
    m.finalize();
    return m;
}

// ---------------------------------------------------------------- refinement

namespace detail {

class Refiner {
 public:
    explicit Refiner(const Mesh& parent) : parent_(parent) {
        child_.dim = parent.dim;
        child_.kind = parent.kind;
        child_.box = parent.box;
        child_.periodic = parent.periodic;
        child_.verts = parent.verts;
        child_.midpoint_parent = parent.midpoint_parent;
        child_.midpoint_parent.resize(parent.verts.size(), {-1, -1});
        child_.parent_hash = parent.hash();
        child_.child_map.assign(static_cast<std::size_t>(parent.n_elems()), {-1, -1, -1, -1});
        registry_ = collect_registry(parent);
    }

    void copy_element(int e) {
        int idx = child_.n_elems();
        child_.elems.push_back(parent_.elems[static_cast<std::size_t>(e)]);
        child_.levels.push_back(parent_.levels[static_cast<std::size_t>(e)]);
        child_.parent_of.push_back(e);
        child_.child_map[static_cast<std::size_t>(e)][0] = idx;
    }

    void split_element(int e) {
        const auto& ev = parent_.elems[static_cast<std::size_t>(e)];
        int lvl = parent_.levels[static_cast<std::size_t>(e)] + 1;
        switch (parent_.kind) {
            case ElemKind::interval: {
                int m = midpoint(ev[0], ev[1]);
                push(e, {ev[0], m, -1, -1}, lvl, 0);
                push(e, {m, ev[1], -1, -1}, lvl, 1);
                break;
            }
            case ElemKind::triangle: {
                int m01 = midpoint(ev[0], ev[1]);
                int m12 = midpoint(ev[1], ev[2]);
                int m20 = midpoint(ev[2], ev[0]);
                push(e, {ev[0], m01, m20, -1}, lvl, 0);
                push(e, {m01, ev[1], m12, -1}, lvl, 1);
                push(e, {m20, m12, ev[2], -1}, lvl, 2);
                push(e, {m01, m12, m20, -1}, lvl, 3);
                break;
            }
            case ElemKind::quad: {
                int m01 = midpoint(ev[0], ev[1]);
                int m12 = midpoint(ev[1], ev[2]);
                int m23 = midpoint(ev[2], ev[3]);
                int m30 = midpoint(ev[3], ev[0]);
                Vec2 c = 0.25 * (child_.verts[static_cast<std::size_t>(m01)] + child_.verts[static_cast<std::size_t>(m12)] +
                                 child_.verts[static_cast<std::size_t>(m23)] + child_.verts[static_cast<std::size_t>(m30)]);
                int vc = add_vertex(c, {-1, -1});
                // SW, SE, NW, NE; each child keeps the parent's orientation
                push(e, {ev[0], m01, vc, m30}, lvl, 0);
                push(e, {m01, ev[1], m12, vc}, lvl, 1);
                push(e, {m30, vc, m23, ev[3]}, lvl, 2);
                push(e, {vc, m12, ev[2], m23}, lvl, 3);
                break;
            }
        }
    }

    Mesh take() {
        child_.finalize();
        return std::move(child_);
    }

 private:
    static std::map<std::pair<int, int>, int> collect_registry(const Mesh& m) {
        std::map<std::pair<int, int>, int> reg;
        for (std::size_t v = 0; v < m.midpoint_parent.size(); ++v) {
            auto mp = m.midpoint_parent[v];
            if (mp[0] >= 0) reg[{std::min(mp[0], mp[1]), std::max(mp[0], mp[1])}] = static_cast<int>(v);
        }
        return reg;
    }

    int add_vertex(Vec2 p, std::array<int, 2> parents) {
        child_.verts.push_back(p);
        child_.midpoint_parent.push_back(parents);
        return child_.n_verts() - 1;
    }

    int midpoint(int a, int b) {
        std::pair<int, int> key{std::min(a, b), std::max(a, b)};
        auto it = registry_.find(key);
        if (it != registry_.end()) return it->second;
        Vec2 p = 0.5 * (child_.verts[static_cast<std::size_t>(a)] + child_.verts[static_cast<std::size_t>(b)]);
        int v = add_vertex(p, {key.first, key.second});
        registry_.emplace(key, v);
        return v;
    }

    void push(int parent_e, std::array<int, 4> vs, int lvl, int slot) {
        int idx = child_.n_elems();
        child_.elems.push_back(vs);
        child_.levels.push_back(lvl);
        child_.parent_of.push_back(parent_e);
        child_.child_map[static_cast<std::size_t>(parent_e)][static_cast<std::size_t>(slot)] = idx;
    }

    const Mesh& parent_;
    Mesh child_;
    std::map<std::pair<int, int>, int> registry_;
};

}  // namespace detail

inline Mesh refine_all(const Mesh& m) {
    detail::Refiner r(m);
    for (int e = 0; e < m.n_elems(); ++e) r.split_element(e);
    return r.take();
}

// split the marked elements, propagating marks until every face satisfies
// the 2:1 level rule (also across the periodic wrap)
inline Mesh refine_marked(const Mesh& m, const std::vector<int>& marks) {
    if (m.kind == ElemKind::triangle)
        throw std::invalid_argument("refine_marked: quadtree meshes only (intervals or quads)");
    std::vector<char> marked(static_cast<std::size_t>(m.n_elems()), 0);
    for (int e : marks) {
        if (e < 0 || e >= m.n_elems())
            throw std::invalid_argument("refine_marked: mark references a dead element");
        marked[static_cast<std::size_t>(e)] = 1;
    }
    Mesh::FaceTable faces = m.face_table();
    std::vector<std::array<int, 2>> adj;
    for (auto& f : faces.conforming) adj.push_back({f[0], f[1]});
    for (auto& f : faces.hanging) adj.push_back({f[0], f[1]});
    for (auto& f : faces.periodic) adj.push_back({f[0], f[1]});
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& [a, b] : adj) {
            int ta = m.levels[static_cast<std::size_t>(a)] + (marked[static_cast<std::size_t>(a)] ? 1 : 0);
            int tb = m.levels[static_cast<std::size_t>(b)] + (marked[static_cast<std::size_t>(b)] ? 1 : 0);
            if (ta > tb + 1 && !marked[static_cast<std::size_t>(b)]) {
                marked[static_cast<std::size_t>(b)] = 1;
                changed = true;
            }
            if (tb > ta + 1 && !marked[static_cast<std::size_t>(a)]) {
                marked[static_cast<std::size_t>(a)] = 1;
                changed = true;
            }
        }
    }
    detail::Refiner r(m);
    for (int e = 0; e < m.n_elems(); ++e)
        marked[static_cast<std::size_t>(e)] ? r.split_element(e) : r.copy_element(e);
    return r.take();
}

inline MeshPtr share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

}  // namespace siacmra
