#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "siacmra/field.hpp"
#include "siacmra/line_trace.hpp"
#include "siacmra/mesh.hpp"

namespace siacmra {

// central B-spline of order ell: B^1 is the unit indicator on [-1/2,1/2),
// higher orders follow the two-term recursion
inline double bspline(int ell, double t) {
    if (ell < 1) throw std::invalid_argument("bspline: order must be >= 1");
    if (ell == 1) return (t >= -0.5 && t < 0.5) ? 1.0 : 0.0;
    if (std::abs(t) >= 0.5 * ell) return 0.0;
    int l = ell - 1;
    return ((l + 1) * 0.5 + t) / l * bspline(l, t + 0.5) +
           ((l + 1) * 0.5 - t) / l * bspline(l, t - 0.5);
}

// ---------------------------------------------------------------------------
// Symmetric SIAC kernel: r+1 B-splines of order ell centered on the uniform
// knots -r/2, -r/2+1, ..., r/2, with coefficients chosen so convolution
// reproduces polynomials through degree r.
// ---------------------------------------------------------------------------
class SiacKernel {
 public:
    SiacKernel() = default;

    int order() const { return ell_; }
    int reproduction_degree() const { return r_; }
    int n_splines() const { return r_ + 1; }
    double center(int j) const { return -0.5 * r_ + j; }
    const std::vector<double>& coefficients() const { return c_; }
    // half width of the support in t/H units
    double support_radius() const { return 0.5 * (r_ + ell_); }

    double eval(double t, double H) const {
        if (H <= 0.0) throw std::invalid_argument("SiacKernel::eval: scaling must be positive");
        double s = t / H, acc = 0.0;
        for (int j = 0; j <= r_; ++j) acc += c_[static_cast<std::size_t>(j)] * bspline(ell_, s - center(j));
        return acc / H;
    }

    // sorted unique breakpoints of the kernel in t/H units
    std::vector<double> breakpoints() const {
        std::vector<double> b;
        for (int j = 0; j <= r_; ++j)
            for (int i = 0; i <= ell_; ++i) b.push_back(center(j) - 0.5 * ell_ + i);
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
                b.end());
        return b;
    }

    // m-th raw moment of B^ell centered at x0, integrated exactly span by span
    static double bspline_moment(int ell, double x0, int m) {
        const GaussRule& g = gauss_legendre(gauss_points_for_degree(m + ell));
        double acc = 0.0;
        for (int span = 0; span < ell; ++span) {
            double a = x0 - 0.5 * ell + span, b = a + 1.0;
            for (int q = 0; q < g.n(); ++q) {
                double t = a + 0.5 * (g.x[q] + 1.0) * (b - a);
                double tm = 1.0;
                for (int e = 0; e < m; ++e) tm *= t;
                acc += 0.5 * (b - a) * g.w[q] * tm * bspline(ell, t - x0);
            }
        }
        return acc;
    }

    friend SiacKernel make_siac_kernel(int ell, int r);

 private:
    int ell_ = 1;
    int r_ = 0;
    std::vector<double> c_;
};

inline SiacKernel make_siac_kernel(int ell, int r) {
    if (ell < 1) throw std::invalid_argument("make_siac_kernel: spline order must be >= 1");
    if (r < 0) throw std::invalid_argument("make_siac_kernel: reproduction degree must be >= 0");
    SiacKernel k;
    k.ell_ = ell;
    k.r_ = r;
    int n = r + 1;
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j) A(m, j) = SiacKernel::bspline_moment(ell, k.center(j), m);
    Eigen::VectorXd c = A.fullPivLu().solve(rhs);
    double res = (A * c - rhs).norm();
    if (!(res <= 1e-12 * std::max(1.0, c.norm())))
        throw numeric_error("make_siac_kernel: moment system residual " + g17(res));
    k.c_.assign(c.data(), c.data() + n);
    return k;
}

// kernel appropriate for degree-p data: 2p+1 splines of order 1 by default,
// or the classic smoothness kernel with 2p+1 splines of order p+1
inline SiacKernel default_kernel(int p) { return make_siac_kernel(1, 2 * p); }
inline SiacKernel smoothness_kernel(int p) { return make_siac_kernel(p + 1, 2 * p); }

// ------------------------------------------------------------- kernel scaling

struct ScalingStrategy {
    enum class Kind { constant, max_edge, min_edge, adaptive };
    Kind kind = Kind::constant;
    double value = 0.0;  // constant only; <= 0 derives max_edge (x sqrt(2) in 2D)

    static ScalingStrategy constant(double H) { return {Kind::constant, H}; }
    static ScalingStrategy default_constant() { return {Kind::constant, 0.0}; }
    static ScalingStrategy max_edge() { return {Kind::max_edge, 0.0}; }
    static ScalingStrategy min_edge() { return {Kind::min_edge, 0.0}; }
    static ScalingStrategy adaptive() { return {Kind::adaptive, 0.0}; }
};

// strategy bound to a mesh; adaptive binding precomputes the per-vertex
// characteristic lengths
class BoundScaling {
 public:
    BoundScaling(MeshPtr mesh, ScalingStrategy s) : mesh_(std::move(mesh)) {
        switch (s.kind) {
            case ScalingStrategy::Kind::constant:
                // derived default: sqrt(2) h on quad meshes whose edges are the
                // axis spacings; unstructured meshes already count diagonals
                fixed_ = s.value > 0.0
                             ? s.value
                             : (mesh_->kind == ElemKind::quad ? std::sqrt(2.0) : 1.0) *
                                   mesh_->max_edge_length();
                break;
            case ScalingStrategy::Kind::max_edge:
                fixed_ = mesh_->max_edge_length();
                break;
            case ScalingStrategy::Kind::min_edge:
                fixed_ = mesh_->min_edge_length();
                break;
            case ScalingStrategy::Kind::adaptive:
                vh_ = mesh_->vertex_char_lengths();
                break;
        }
    }

    bool position_dependent() const { return !vh_.empty(); }
    double at(Vec2 x) const { return vh_.empty() ? fixed_ : mesh_->scaling_at_point(x, vh_); }
    double at(double x) const { return at(Vec2{x, 0.0}); }

 private:
    MeshPtr mesh_;
    double fixed_ = 0.0;
    std::vector<double> vh_;
};

inline double scaling_value(ScalingStrategy s, MeshPtr mesh, Vec2 x) {
    return BoundScaling(std::move(mesh), s).at(x);
}

// ------------------------------------------------------------- 1D filtering

// exact convolution of a 1D field with the scaled kernel at point x: the
// support is cut at every kernel breakpoint and every (periodically
// unwrapped) element boundary, then integrated span by span
inline double filter_point_1d(const DGField& u, const SiacKernel& k, double x, double H) {
    const Mesh& mesh = *u.mesh;
    if (mesh.dim != 1) throw std::invalid_argument("filter_point_1d: 1D fields only");
    if (H <= 0.0) throw std::invalid_argument("filter_point_1d: scaling must be positive");
    double a = H * k.support_radius();
    double period = mesh.box.len(0);
    if (mesh.periodic[0]) {
        if (!(2.0 * a < period))
            throw std::invalid_argument("filter_point_1d: kernel support exceeds the domain period");
    } else {
        double tol = 1e-12 * mesh.domain_scale();
        if (x - a < mesh.box.lo.x - tol || x + a > mesh.box.hi.x + tol)
            throw domain_exit_error("filter_point_1d: kernel support leaves the domain");
    }

    double tol = 1e-12 * mesh.domain_scale();
    std::vector<double> cuts;
    for (double kb : k.breakpoints()) cuts.push_back(x + H * kb);
    std::vector<double> bp = mesh.breakpoints();
    if (mesh.periodic[0]) {
        long k0 = static_cast<long>(std::floor((x - a - mesh.box.lo.x) / period));
        long k1 = static_cast<long>(std::ceil((x + a - mesh.box.lo.x) / period));
        for (long img = k0; img <= k1; ++img)
            for (double b : bp) {
                double y = b + img * period;
                if (y > x - a - tol && y < x + a + tol) cuts.push_back(y);
            }
    } else {
        for (double b : bp)
            if (b > x - a - tol && b < x + a + tol) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> m{x - a};
    for (double t : cuts)
        if (t > m.back() + tol && t < x + a - tol) m.push_back(t);
    m.push_back(x + a);

    int nq = (u.p() + k.order()) / 2 + 2;
    const GaussRule& g = gauss_legendre(nq);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
        double ya = m[i], yb = m[i + 1];
        Vec2 wmid = mesh.wrap({0.5 * (ya + yb), 0.0});
        int e = mesh.locate(wmid);
        double shift = wmid.x - 0.5 * (ya + yb);
        for (int q = 0; q < g.n(); ++q) {
            double y = ya + 0.5 * (g.x[q] + 1.0) * (yb - ya);
            double uval = u.eval_in_element(e, {y + shift, 0.0});
            acc += 0.5 * (yb - ya) * g.w[q] * k.eval(y - x, H) * uval;
        }
    }
    return acc;
}

// ------------------------------------------------------------- line filtering

// convolution along the line through x with direction theta; element
// crossings come from the mesh trace and each segment is further cut at the
// kernel breakpoints
inline double filter_point_line(const DGField& u, const SiacKernel& k, Vec2 x, double theta,
                                double H) {
    const Mesh& mesh = *u.mesh;
    if (mesh.dim != 2) throw std::invalid_argument("filter_point_line: 2D fields only");
    if (H <= 0.0) throw std::invalid_argument("filter_point_line: scaling must be positive");
    double a = H * k.support_radius();
    if (mesh.periodic[0] && mesh.periodic[1]) {
        // first parameter at which the trace can revisit a wrapped coordinate
        double c = std::abs(std::cos(theta)), s = std::abs(std::sin(theta));
        double tx = c > 1e-14 ? mesh.box.len(0) / c : std::numeric_limits<double>::infinity();
        double ty = s > 1e-14 ? mesh.box.len(1) / s : std::numeric_limits<double>::infinity();
        if (!(2.0 * a < std::min(tx, ty)))
            throw std::invalid_argument("filter_point_line: kernel support wraps onto itself");
    }

    LineTrace tr = trace_line(mesh, x, theta, -a, a);
    std::vector<double> kb = k.breakpoints();
    int nq = (u.p() + k.order()) / 2 + 3;
    const GaussRule& g = gauss_legendre(nq);
    double tol = 1e-12 * mesh.domain_scale();
    double acc = 0.0;
    for (const TraceSegment& seg : tr.segments) {
        std::vector<double> m{seg.t0};
        for (double b : kb) {
            double t = H * b;
            if (t > m.back() + tol && t < seg.t1 - tol) m.push_back(t);
        }
        m.push_back(seg.t1);
        for (std::size_t i = 0; i + 1 < m.size(); ++i) {
            double ta = m[i], tb = m[i + 1];
            for (int q = 0; q < g.n(); ++q) {
                double t = ta + 0.5 * (g.x[q] + 1.0) * (tb - ta);
                double uval = u.eval_in_element(seg.elem, tr.point(seg, t));
                acc += 0.5 * (tb - ta) * g.w[q] * k.eval(t, H) * uval;
            }
        }
    }
    return acc;
}

}  // namespace siacmra
