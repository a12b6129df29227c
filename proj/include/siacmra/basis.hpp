#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <vector>

#include "siacmra/core.hpp"
#include "siacmra/quadrature.hpp"

namespace siacmra {

enum class ElemKind { interval, quad, triangle };

inline const char* kind_name(ElemKind k) {
    switch (k) {
        case ElemKind::interval: return "interval";
        case ElemKind::quad: return "quad";
        case ElemKind::triangle: return "triangle";
    }
    return "?";
}

inline int kind_dim(ElemKind k) { return k == ElemKind::interval ? 1 : 2; }
inline int kind_nverts(ElemKind k) {
    return k == ElemKind::interval ? 2 : (k == ElemKind::triangle ? 3 : 4);
}
// measure of the reference element: [-1,1], [-1,1]^2, unit right triangle
inline double reference_measure(ElemKind k) {
    return k == ElemKind::interval ? 2.0 : (k == ElemKind::quad ? 4.0 : 0.5);
}

inline int mode_count(ElemKind k, int p) {
    switch (k) {
        case ElemKind::interval: return p + 1;
        case ElemKind::quad: return (p + 1) * (p + 1);
        case ElemKind::triangle: return (p + 1) * (p + 2) / 2;
    }
    return 0;
}

// P_0..P_p at x (standard three-term recurrence)
inline void legendre_values(int p, double x, double* out) {
    out[0] = 1.0;
    if (p >= 1) out[1] = x;
    for (int k = 2; k <= p; ++k)
        out[k] = ((2.0 * k - 1.0) * x * out[k - 1] - (k - 1.0) * out[k - 2]) / k;
}

inline void legendre_derivs(int p, double x, const double* vals, double* out) {
    out[0] = 0.0;
    if (p >= 1) out[1] = 1.0;
    for (int k = 2; k <= p; ++k)
        out[k] = out[k - 2] + (2.0 * k - 1.0) * vals[k - 1];
}

// normalized Legendre mode on [-1,1]: sqrt((2k+1)/2) P_k
inline double scaled_legendre(int k, double x) {
    double v[16];
    legendre_values(k, x, v);
    return std::sqrt((2.0 * k + 1.0) / 2.0) * v[k];
}

constexpr int max_degree = 3;

// ---------------------------------------------------------------------------
// Orthonormal modal basis on a reference element.
//   interval:  phi_k(x) = sqrt((2k+1)/2) P_k(x)
//   quad:      tensor products, flat index k = ky*(p+1) + kx
//   triangle:  Gram-Schmidt on monomials ordered by total degree; within a
//              degree the y-power increases, so the last mode carries y^p.
// ---------------------------------------------------------------------------
class ModalBasis {
 public:
    ModalBasis() = default;

    ModalBasis(ElemKind kind, int p) : kind_(kind), p_(p) {
        if (p < 0 || p > max_degree) throw std::invalid_argument("ModalBasis: unsupported degree");
        n_ = mode_count(kind, p);
        if (kind_ == ElemKind::triangle) build_triangle();
    }

    ElemKind kind() const { return kind_; }
    int degree() const { return p_; }
    int n_modes() const { return n_; }

    double eval(int mode, Vec2 xi) const {
        switch (kind_) {
            case ElemKind::interval:
                return scaled_legendre(mode, xi.x);
            case ElemKind::quad: {
                int kx = mode % (p_ + 1), ky = mode / (p_ + 1);
                return scaled_legendre(kx, xi.x) * scaled_legendre(ky, xi.y);
            }
            case ElemKind::triangle: {
                double acc = 0.0;
                for (int j = 0; j < n_; ++j)
                    acc += tri_coef_(mode, j) * mono(j, xi);
                return acc;
            }
        }
        return 0.0;
    }

    // gradient with respect to reference coordinates
    Vec2 grad(int mode, Vec2 xi) const {
        switch (kind_) {
            case ElemKind::interval: {
                double v[16], d[16];
                legendre_values(p_, xi.x, v);
                legendre_derivs(p_, xi.x, v, d);
                return {std::sqrt((2.0 * mode + 1.0) / 2.0) * d[mode], 0.0};
            }
            case ElemKind::quad: {
                int kx = mode % (p_ + 1), ky = mode / (p_ + 1);
                double vx[16], dx[16], vy[16], dy[16];
                legendre_values(p_, xi.x, vx);
                legendre_derivs(p_, xi.x, vx, dx);
                legendre_values(p_, xi.y, vy);
                legendre_derivs(p_, xi.y, vy, dy);
                double cx = std::sqrt((2.0 * kx + 1.0) / 2.0);
                double cy = std::sqrt((2.0 * ky + 1.0) / 2.0);
                return {cx * dx[kx] * cy * vy[ky], cx * vx[kx] * cy * dy[ky]};
            }
            case ElemKind::triangle: {
                Vec2 g{0.0, 0.0};
                for (int j = 0; j < n_; ++j) {
                    auto [a, b] = tri_monos_[static_cast<std::size_t>(j)];
                    double c = tri_coef_(mode, j);
                    if (a > 0) g.x += c * a * ipow(xi.x, a - 1) * ipow(xi.y, b);
                    if (b > 0) g.y += c * b * ipow(xi.x, a) * ipow(xi.y, b - 1);
                }
                return g;
            }
        }
        return {0.0, 0.0};
    }

 private:
    static double ipow(double x, int n) {
        double r = 1.0;
        for (int i = 0; i < n; ++i) r *= x;
        return r;
    }

    double mono(int j, Vec2 xi) const {
        auto [a, b] = tri_monos_[static_cast<std::size_t>(j)];
        return ipow(xi.x, a) * ipow(xi.y, b);
    }

    // exact integral of x^a y^b over the unit right triangle: a! b! / (a+b+2)!
    static double tri_mono_integral(int a, int b) {
        double v = 1.0;
        // a! b! / (a+b+2)! computed stably for the small exponents used here
        for (int i = 1; i <= a; ++i) v *= i;
        for (int i = 1; i <= b; ++i) v *= i;
        for (int i = 1; i <= a + b + 2; ++i) v /= i;
        return v;
    }

    void build_triangle() {
        tri_monos_.clear();
        for (int d = 0; d <= p_; ++d)
            for (int b = 0; b <= d; ++b) tri_monos_.push_back({d - b, b});
        // Gram matrix of monomials, then Gram-Schmidt rows (run twice)
        Eigen::MatrixXd gram(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                auto [ai, bi] = tri_monos_[static_cast<std::size_t>(i)];
                auto [aj, bj] = tri_monos_[static_cast<std::size_t>(j)];
                gram(i, j) = tri_mono_integral(ai + aj, bi + bj);
            }
        tri_coef_ = Eigen::MatrixXd::Identity(n_, n_);
        for (int pass = 0; pass < 3; ++pass) {
            for (int i = 0; i < n_; ++i) {
                for (int j = 0; j < i; ++j) {
                    double proj = tri_coef_.row(i) * gram * tri_coef_.row(j).transpose();
                    tri_coef_.row(i) -= proj * tri_coef_.row(j);
                }
                double nrm = std::sqrt(tri_coef_.row(i) * gram * tri_coef_.row(i).transpose());
                tri_coef_.row(i) /= nrm;
            }
        }
    }

    ElemKind kind_ = ElemKind::interval;
    int p_ = 0;
    int n_ = 1;
    std::vector<std::array<int, 2>> tri_monos_;
    Eigen::MatrixXd tri_coef_;
};

inline ModalBasis build_basis(ElemKind kind, int p) { return ModalBasis(kind, p); }

}  // namespace siacmra
