#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <stdexcept>

#include "siacmra/multiwavelet.hpp"

namespace siacmra {

// ---------------------------------------------------------------------------
// Quadrature mirror filters for one polynomial degree. The four matrices
// turn the scaling coefficients of two sibling children into parent scaling
// and detail coefficients; the stacked block matrix [[H0,H1],[G0,G1]] is
// orthogonal, so the inverse transform is its transpose. The matrices do not
// depend on element size or position.
// ---------------------------------------------------------------------------
struct MRATransform {
    int p = 0;
    Eigen::MatrixXd H0, H1, G0, G1;
};

inline MRATransform build_qmf(int p) {
    MultiwaveletBasis mw(p);
    const int m = p + 1;
    MRATransform t;
    t.p = p;
    t.H0.resize(m, m);
    t.H1.resize(m, m);
    t.G0.resize(m, m);
    t.G1.resize(m, m);
    const Eigen::MatrixXd& v = mw.scaling_coords();
    for (int l = 0; l < m; ++l)
        for (int r = 0; r < m; ++r) {
            t.H0(l, r) = v(r, l);
            t.H1(l, r) = v(m + r, l);
            t.G0(l, r) = mw.fine_coef(l, 0, r);
            t.G1(l, r) = mw.fine_coef(l, 1, r);
        }
    return t;
}

// one cached transform per degree; the local-MRA paths all share these
inline const MRATransform& qmf(int p) {
    if (p < 0 || p > max_degree) throw std::invalid_argument("qmf: unsupported degree");
    static const std::array<MRATransform, max_degree + 1> cache = [] {
        std::array<MRATransform, max_degree + 1> c;
        for (int q = 0; q <= max_degree; ++q) c[static_cast<std::size_t>(q)] = build_qmf(q);
        return c;
    }();
    return cache[static_cast<std::size_t>(p)];
}

// ------------------------------ 1D transforms ------------------------------

struct Decomp1D {
    Eigen::VectorXd s;  // parent scaling coefficients
    Eigen::VectorXd d;  // detail coefficients
};

inline Decomp1D decompose_1d(int p, const Eigen::VectorXd& s_left, const Eigen::VectorXd& s_right) {
    const MRATransform& t = qmf(p);
    if (s_left.size() != p + 1 || s_right.size() != p + 1)
        throw std::invalid_argument("decompose_1d: bad coefficient length");
    return {t.H0 * s_left + t.H1 * s_right, t.G0 * s_left + t.G1 * s_right};
}

inline std::array<Eigen::VectorXd, 2> reconstruct_1d(int p, const Eigen::VectorXd& s,
                                                     const Eigen::VectorXd& d) {
    const MRATransform& t = qmf(p);
    if (s.size() != p + 1 || d.size() != p + 1)
        throw std::invalid_argument("reconstruct_1d: bad coefficient length");
    return {t.H0.transpose() * s + t.G0.transpose() * d,
            t.H1.transpose() * s + t.G1.transpose() * d};
}

// ------------------------------ 2D transforms ------------------------------
//
// Children in SW, SE, NW, NE order; each child block holds (p+1)^2 tensor
// coefficients with flat index k = ky*(p+1) + kx. The alpha/beta/gamma blocks
// carry the x-, y- and xy-direction details.

struct Decomp2D {
    Eigen::VectorXd s, da, db, dg;
};

namespace detail {
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline RowMat as_mat(const Eigen::VectorXd& v, int m) {
    return Eigen::Map<const RowMat>(v.data(), m, m);  // row = ky, col = kx
}
inline Eigen::VectorXd as_vec(const RowMat& a) {
    Eigen::VectorXd v(a.size());
    Eigen::Map<RowMat>(v.data(), a.rows(), a.cols()) = a;
    return v;
}
}  // namespace detail

inline Decomp2D decompose_2d(int p, const std::array<Eigen::VectorXd, 4>& children) {
    const MRATransform& t = qmf(p);
    const int m = p + 1;
    for (const auto& c : children)
        if (c.size() != m * m) throw std::invalid_argument("decompose_2d: bad coefficient length");
    detail::RowMat s = detail::RowMat::Zero(m, m), da = s, db = s, dg = s;
    // child order SW,SE,NW,NE <-> (jx,jy) = (0,0),(1,0),(0,1),(1,1)
    constexpr int jx[4] = {0, 1, 0, 1};
    constexpr int jy[4] = {0, 0, 1, 1};
    for (int c = 0; c < 4; ++c) {
        detail::RowMat M = detail::as_mat(children[static_cast<std::size_t>(c)], m);
        const Eigen::MatrixXd& Hx = jx[c] ? t.H1 : t.H0;
        const Eigen::MatrixXd& Hy = jy[c] ? t.H1 : t.H0;
        const Eigen::MatrixXd& Gx = jx[c] ? t.G1 : t.G0;
        const Eigen::MatrixXd& Gy = jy[c] ? t.G1 : t.G0;
        s += Hy * M * Hx.transpose();
        da += Hy * M * Gx.transpose();
        db += Gy * M * Hx.transpose();
        dg += Gy * M * Gx.transpose();
    }
    return {detail::as_vec(s), detail::as_vec(da), detail::as_vec(db), detail::as_vec(dg)};
}

inline std::array<Eigen::VectorXd, 4> reconstruct_2d(int p, const Decomp2D& dec) {
    const MRATransform& t = qmf(p);
    const int m = p + 1;
    detail::RowMat S = detail::as_mat(dec.s, m);
    detail::RowMat A = detail::as_mat(dec.da, m);
    detail::RowMat B = detail::as_mat(dec.db, m);
    detail::RowMat G = detail::as_mat(dec.dg, m);
    std::array<Eigen::VectorXd, 4> out;
    constexpr int jx[4] = {0, 1, 0, 1};
    constexpr int jy[4] = {0, 0, 1, 1};
    for (int c = 0; c < 4; ++c) {
        const Eigen::MatrixXd& Hx = jx[c] ? t.H1 : t.H0;
        const Eigen::MatrixXd& Hy = jy[c] ? t.H1 : t.H0;
        const Eigen::MatrixXd& Gx = jx[c] ? t.G1 : t.G0;
        const Eigen::MatrixXd& Gy = jy[c] ? t.G1 : t.G0;
        detail::RowMat M = Hy.transpose() * S * Hx + Hy.transpose() * A * Gx +
                           Gy.transpose() * B * Hx + Gy.transpose() * G * Gx;
        out[static_cast<std::size_t>(c)] = detail::as_vec(M);
    }
    return out;
}

// CSV dump of the four filter matrices for cross-implementation comparison
inline std::string qmf_csv(int p) {
    const MRATransform& t = qmf(p);
    std::string out;
    auto emit = [&](const char* name, const Eigen::MatrixXd& m) {
        for (int i = 0; i < m.rows(); ++i) {
            out += name;
            for (int j = 0; j < m.cols(); ++j) {
                out += ',';
                out += g17(m(i, j));
            }
            out += '\n';
        }
    };
    emit("H0", t.H0);
    emit("H1", t.H1);
    emit("G0", t.G0);
    emit("G1", t.G1);
    return out;
}

}  // namespace siacmra
