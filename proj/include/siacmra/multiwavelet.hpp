#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <stdexcept>

#include "siacmra/basis.hpp"
#include "siacmra/quadrature.hpp"

namespace siacmra {

// ---------------------------------------------------------------------------
// Alpert multiwavelets psi_0..psi_p on [-1,1] with a break at 0.
//
// They are represented in the orthonormal "fine" basis
//   { sqrt(2) phi_r(2x+1) on [-1,0],  sqrt(2) phi_r(2x-1) on [0,1] },
// so all inner products reduce to Euclidean dot products of coefficient
// vectors. psi_k is orthogonal to x^m for m <= p+k; the sign is fixed so the
// leading coefficient of psi_k on (0,1] is positive.
// ---------------------------------------------------------------------------
class MultiwaveletBasis {
 public:
    explicit MultiwaveletBasis(int p) : p_(p) {
        if (p < 0 || p > max_degree) throw std::invalid_argument("MultiwaveletBasis: unsupported degree");
        build();
    }

    int degree() const { return p_; }

    // coefficient of psi_k on fine mode (half, r); half 0 = [-1,0], 1 = [0,1]
    double fine_coef(int k, int half, int r) const { return psi_(half * (p_ + 1) + r, k); }

    double eval(int k, double x) const {
        int half = x < 0.0 ? 0 : 1;
        double t = half == 0 ? 2.0 * x + 1.0 : 2.0 * x - 1.0;
        double v = 0.0;
        for (int r = 0; r <= p_; ++r)
            v += fine_coef(k, half, r) * std::sqrt(2.0) * scaled_legendre(r, t);
        return v;
    }

    // <phi_l, fine mode (half, r)> -- these are the scaling-function
    // coordinates in the fine basis and double as the H filter entries.
    const Eigen::MatrixXd& scaling_coords() const { return v_; }

 private:
    void build() {
        const int m = p_ + 1;
        const int dim = 2 * m;
        const GaussRule& g = gauss_legendre(2 * m + 2);

        // scaling functions in fine coordinates
        v_.resize(dim, m);
        for (int half = 0; half < 2; ++half) {
            double a = half == 0 ? -1.0 : 0.0;
            for (int l = 0; l < m; ++l)
                for (int r = 0; r < m; ++r) {
                    double acc = 0.0;
                    for (int q = 0; q < g.n(); ++q) {
                        double x = a + 0.5 * (g.x[q] + 1.0);  // map to [a, a+1]
                        double fine = std::sqrt(2.0) * scaled_legendre(r, 2.0 * x - 2.0 * a - 1.0);
                        acc += 0.5 * g.w[q] * scaled_legendre(l, x) * fine;
                    }
                    v_(half * m + r, l) = acc;
                }
        }

        // moment vectors <x^q, fine mode> for q = 0 .. 2p
        Eigen::MatrixXd mom(dim, 2 * p_ + 1);
        for (int half = 0; half < 2; ++half) {
            double a = half == 0 ? -1.0 : 0.0;
            for (int r = 0; r < m; ++r)
                for (int q = 0; q <= 2 * p_; ++q) {
                    double acc = 0.0;
                    for (int i = 0; i < g.n(); ++i) {
                        double x = a + 0.5 * (g.x[i] + 1.0);
                        double fine = std::sqrt(2.0) * scaled_legendre(r, 2.0 * x - 2.0 * a - 1.0);
                        double xp = 1.0;
                        for (int e = 0; e < q; ++e) xp *= x;
                        acc += 0.5 * g.w[i] * xp * fine;
                    }
                    mom(half * m + r, q) = acc;
                }
        }

        // orthonormal basis of the wavelet space W = span(fine) minus span(V)
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(v_);
        Eigen::MatrixXd Q = qr.householderQ();
        Eigen::MatrixXd W = Q.rightCols(m);

        // moments p+1 .. 2p expressed in W coordinates
        Eigen::MatrixXd momW(m, p_);
        for (int j = 0; j < p_; ++j) momW.col(j) = W.transpose() * mom.col(p_ + 1 + j);

        psi_.resize(dim, m);
        Eigen::MatrixXd psiW(m, m);
        for (int k = p_; k >= 0; --k) {
            // constraints: extra moments p+1..p+k, plus orthogonality to the
            // already-built psi_{k+1..p}
            int nc = k + (p_ - k);
            Eigen::MatrixXd C(nc, m);
            for (int j = 0; j < k; ++j) C.row(j) = momW.col(j).transpose();
            for (int j = k + 1; j <= p_; ++j) C.row(k + (j - k - 1)) = psiW.col(j).transpose();
            Eigen::VectorXd n;
            if (nc == 0) {
                n = Eigen::VectorXd::Zero(m);
                n(0) = 1.0;
            } else {
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
                n = svd.matrixV().col(m - 1);
            }
            n.normalize();
            psiW.col(k) = n;
            psi_.col(k) = W * n;
            fix_sign(k);
            psiW.col(k) = W.transpose() * psi_.col(k);
        }
    }

    void fix_sign(int k) {
        const int m = p_ + 1;
        // monomial coefficients of the right-hand piece; leading one positive
        Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
        const GaussRule& g = gauss_legendre(m + 2);
        // evaluate right piece at Gauss points of [0,1] and fit the monomials
        Eigen::MatrixXd A(g.n(), m);
        Eigen::VectorXd b(g.n());
        for (int i = 0; i < g.n(); ++i) {
            double x = 0.5 * (g.x[i] + 1.0);
            double xp = 1.0;
            for (int j = 0; j < m; ++j) {
                A(i, j) = xp;
                xp *= x;
            }
            double v = 0.0;
            for (int r = 0; r < m; ++r)
                v += psi_(m + r, k) * std::sqrt(2.0) * scaled_legendre(r, 2.0 * x - 1.0);
            b(i) = v;
        }
        c = A.colPivHouseholderQr().solve(b);
        int lead = 0;
        for (int j = m - 1; j >= 0; --j)
            if (std::abs(c(j)) > 1e-9) {
                lead = j;
                break;
            }
        if (c(lead) < 0.0) psi_.col(k) = -psi_.col(k);
    }

    int p_;
    Eigen::MatrixXd v_;    // scaling functions in fine coordinates, dim x (p+1)
    Eigen::MatrixXd psi_;  // multiwavelets in fine coordinates, dim x (p+1)
};

inline MultiwaveletBasis build_multiwavelets(int p) { return MultiwaveletBasis(p); }

}  // namespace siacmra
