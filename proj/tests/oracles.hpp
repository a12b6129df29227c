#pragma once

// Test-only reference computations, independent of the library's projection
// and transform paths.

#include <cmath>
#include <functional>
#include <vector>

#include "siacmra/field.hpp"
#include "siacmra/quadrature.hpp"

namespace oracles {

using siacmra::gauss_legendre;
using siacmra::GaussRule;

// dense composite Gauss integration of f over [a,b], split at the given
// interior breakpoints
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           std::vector<double> breaks = {}, int pts = 20) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    const GaussRule& g = gauss_legendre(pts);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double lo = std::max(breaks[i], a), hi = std::min(breaks[i + 1], b);
        if (hi - lo <= 1e-15) continue;
        for (int q = 0; q < g.n(); ++q) {
            double x = lo + 0.5 * (g.x[q] + 1.0) * (hi - lo);
            acc += 0.5 * (hi - lo) * g.w[q] * f(x);
        }
    }
    return acc;
}

// inner product over [-1,1] (break at 0 handles the multiwavelet kink)
inline double inner_product_pm1(const std::function<double(double)>& f,
                                const std::function<double(double)>& g) {
    return integrate_1d([&](double x) { return f(x) * g(x); }, -1.0, 1.0, {0.0}, 24);
}

// brute-force L2 norm over one mesh element via dense tensor quadrature
inline double element_l2(const siacmra::Mesh& mesh, int e,
                         const std::function<double(siacmra::Vec2)>& f, int pts = 16) {
    siacmra::ElemGeom g = mesh.geom(e);
    siacmra::QuadRule2D rule;
    if (mesh.kind == siacmra::ElemKind::interval) {
        const GaussRule& gr = gauss_legendre(pts);
        for (int i = 0; i < gr.n(); ++i) {
            rule.x.push_back({gr.x[i], 0.0});
            rule.w.push_back(gr.w[i]);
        }
    } else if (mesh.kind == siacmra::ElemKind::quad) {
        rule = siacmra::tensor_rule(pts, pts);
    } else {
        rule = siacmra::triangle_rule(2 * pts);
    }
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
        double v = f(g.map(rule.x[q]));
        acc += rule.w[q] * std::abs(g.jac_det(rule.x[q])) * v * v;
    }
    return std::sqrt(acc);
}

// circumcircle test data for the Delaunay oracle
struct Circle {
    double cx, cy, r2;
};

inline Circle circumcircle(siacmra::Vec2 a, siacmra::Vec2 b, siacmra::Vec2 c) {
    double d = 2.0 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
    double ab2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    double ac2 = (c.x - a.x) * (c.x - a.x) + (c.y - a.y) * (c.y - a.y);
    double ux = a.x + ((c.y - a.y) * ab2 - (b.y - a.y) * ac2) / d;
    double uy = a.y + ((b.x - a.x) * ac2 - (c.x - a.x) * ab2) / d;
    return {ux, uy, (ux - a.x) * (ux - a.x) + (uy - a.y) * (uy - a.y)};
}

}  // namespace oracles
