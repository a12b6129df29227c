#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "siacmra/core.hpp"

namespace siacmra {

// Gauss-Legendre rule on [-1,1], exact for polynomials of degree <= 2n-1.
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
    int n() const { return static_cast<int>(x.size()); }
};

namespace detail {

inline GaussRule make_gauss(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration from the Chebyshev-like initial guess
        double t = std::cos(pi * (i + 0.75) / (n + 0.5));
        double p0, p1;
        for (int it = 0; it < 100; ++it) {
            p0 = 1.0;
            p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        p0 = 1.0;
        p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        r.x[i] = -t;
        r.x[n - 1 - i] = t;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

inline const std::vector<GaussRule>& gauss_table() {
    static const std::vector<GaussRule> table = [] {
        std::vector<GaussRule> t;
        t.reserve(41);
        t.push_back({});  // n = 0 placeholder
        for (int n = 1; n <= 40; ++n) t.push_back(make_gauss(n));
        return t;
    }();
    return table;
}

}  // namespace detail

inline const GaussRule& gauss_legendre(int n) {
    if (n < 1 || n > 40) throw std::invalid_argument("gauss_legendre: n out of range");
    return detail::gauss_table()[static_cast<std::size_t>(n)];
}

// number of points needed for exactness up to the given polynomial degree
inline int gauss_points_for_degree(int degree) { return degree / 2 + 1; }

// Quadrature rule on a reference element in 2D (unit weights sum to |ref|).
struct QuadRule2D {
    std::vector<Vec2> x;
    std::vector<double> w;
};

// tensor rule on [-1,1]^2
inline QuadRule2D tensor_rule(int nx, int ny) {
    const GaussRule& gx = gauss_legendre(nx);
    const GaussRule& gy = gauss_legendre(ny);
    QuadRule2D r;
    r.x.reserve(static_cast<std::size_t>(nx) * ny);
    r.w.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            r.x.push_back({gx.x[i], gy.x[j]});
            r.w.push_back(gx.w[i] * gy.w[j]);
        }
    return r;
}

// Rule on the unit right triangle {x,y >= 0, x+y <= 1}, exact for total
// degree <= `degree`. Collapsed-coordinate construction: x = u, y = (1-u) v
// with dxdy = (1-u) du dv raises the u-degree by one.
inline QuadRule2D triangle_rule(int degree) {
    int nu = gauss_points_for_degree(degree + 1);
    int nv = gauss_points_for_degree(degree);
    const GaussRule& gu = gauss_legendre(nu);
    const GaussRule& gv = gauss_legendre(nv);
    QuadRule2D r;
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            double u = 0.5 * (gu.x[i] + 1.0);
            double v = 0.5 * (gv.x[j] + 1.0);
            r.x.push_back({u, (1.0 - u) * v});
            r.w.push_back(0.25 * gu.w[i] * gv.w[j] * (1.0 - u));
        }
    return r;
}

}  // namespace siacmra
