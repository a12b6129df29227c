#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "siacmra/field.hpp"
#include "siacmra/multiwavelet.hpp"
#include "siacmra/qmf.hpp"

using namespace siacmra;

TEST_CASE("gauss rules integrate polynomials to their stated degree") {
    for (int n : {1, 2, 4, 7, 12}) {
        const GaussRule& g = gauss_legendre(n);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double acc = 0;
            for (int q = 0; q < g.n(); ++q) acc += g.w[q] * std::pow(g.x[q], d);
            double exact = d % 2 == 1 ? 0.0 : 2.0 / (d + 1);
            REQUIRE(std::abs(acc - exact) < 1e-14);
        }
    }
}

TEST_CASE("triangle rule integrates monomials exactly") {
    QuadRule2D r = triangle_rule(8);
    for (int a = 0; a + 0 <= 8; ++a)
        for (int b = 0; a + b <= 8; ++b) {
            double acc = 0;
            for (std::size_t q = 0; q < r.x.size(); ++q)
                acc += r.w[q] * std::pow(r.x[q].x, a) * std::pow(r.x[q].y, b);
            double exact = 1.0;
            for (int i = 1; i <= a; ++i) exact *= i;
            for (int i = 1; i <= b; ++i) exact *= i;
            for (int i = 1; i <= a + b + 2; ++i) exact /= i;
            REQUIRE(std::abs(acc - exact) < 1e-15);
        }
}

TEST_CASE("modal bases are orthonormal with a constant mode zero") {
    for (ElemKind kind : {ElemKind::interval, ElemKind::quad, ElemKind::triangle}) {
        for (int p = 0; p <= 3; ++p) {
            ModalBasis basis(kind, p);
            QuadRule2D rule;
            if (kind == ElemKind::interval) {
                const GaussRule& g = gauss_legendre(p + 2);
                for (int i = 0; i < g.n(); ++i) {
                    rule.x.push_back({g.x[i], 0.0});
                    rule.w.push_back(g.w[i]);
                }
            } else if (kind == ElemKind::quad) {
                rule = tensor_rule(p + 2, p + 2);
            } else {
                rule = triangle_rule(2 * p + 1);
            }
            for (int i = 0; i < basis.n_modes(); ++i)
                for (int j = 0; j <= i; ++j) {
                    double acc = 0;
                    for (std::size_t q = 0; q < rule.x.size(); ++q)
                        acc += rule.w[q] * basis.eval(i, rule.x[q]) * basis.eval(j, rule.x[q]);
                    REQUIRE(std::abs(acc - (i == j ? 1.0 : 0.0)) < 1e-13);
                }
            double c0 = basis.eval(0, kind == ElemKind::triangle ? Vec2{0.3, 0.2} : Vec2{0.1, -0.4});
            REQUIRE(std::abs(c0 - 1.0 / std::sqrt(reference_measure(kind))) < 1e-14);
        }
    }
    REQUIRE_THROWS_AS(build_basis(ElemKind::interval, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(build_basis(ElemKind::quad, -1), std::invalid_argument);
}

TEST_CASE("interval modes match the scaled Legendre values") {
    ModalBasis b0(ElemKind::interval, 0);
    REQUIRE(std::abs(b0.eval(0, {0.37, 0}) - 1.0 / std::sqrt(2.0)) < 1e-15);
    ModalBasis b1(ElemKind::interval, 1);
    REQUIRE(std::abs(b1.eval(1, {0.37, 0}) - std::sqrt(1.5) * 0.37) < 1e-15);
}

TEST_CASE("multiwavelets satisfy orthogonality and guaranteed moments") {
    for (int p = 0; p <= 3; ++p) {
        MultiwaveletBasis mw(p);
        for (int i = 0; i <= p; ++i) {
            for (int j = 0; j <= p; ++j) {
                double ip = oracles::inner_product_pm1([&](double x) { return mw.eval(i, x); },
                                                       [&](double x) { return mw.eval(j, x); });
                REQUIRE(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-12);
            }
            for (int l = 0; l <= p; ++l) {
                double ip = oracles::inner_product_pm1([&](double x) { return mw.eval(i, x); },
                                                       [&](double x) { return scaled_legendre(l, x); });
                REQUIRE(std::abs(ip) < 1e-12);
            }
            // vanishing moments through m = p + k
            for (int m = 0; m <= p + i; ++m) {
                double mom = oracles::inner_product_pm1([&](double x) { return mw.eval(i, x); },
                                                        [m](double x) { return std::pow(x, m); });
                REQUIRE(std::abs(mom) < 1e-12);
            }
        }
    }
}

TEST_CASE("haar wavelet and its sign convention") {
    MultiwaveletBasis mw(0);
    REQUIRE(std::abs(mw.eval(0, -0.5) + 1.0 / std::sqrt(2.0)) < 1e-14);
    REQUIRE(std::abs(mw.eval(0, 0.5) - 1.0 / std::sqrt(2.0)) < 1e-14);
}

TEST_CASE("degree one wavelet has a nonzero third moment") {
    // the p+k guarantee is sharp: <x^3, psi_1> = 1/(5 sqrt(2)) for p = 1
    MultiwaveletBasis mw(1);
    double m3 = oracles::inner_product_pm1([&](double x) { return mw.eval(1, x); },
                                           [](double x) { return x * x * x; });
    REQUIRE(std::abs(std::abs(m3) - 1.0 / (5.0 * std::sqrt(2.0))) < 1e-12);
}

TEST_CASE("filter matrices match their defining inner products") {
    for (int p = 0; p <= 3; ++p) {
        const MRATransform& t = qmf(p);
        MultiwaveletBasis mw(p);
        auto fine = [&](int r, int half, double x) {
            // sqrt(2) phi_r mapped to the half interval
            if (half == 0) return x <= 0.0 ? std::sqrt(2.0) * scaled_legendre(r, 2 * x + 1) : 0.0;
            return x >= 0.0 ? std::sqrt(2.0) * scaled_legendre(r, 2 * x - 1) : 0.0;
        };
        for (int l = 0; l <= p; ++l)
            for (int r = 0; r <= p; ++r) {
                double h0 = oracles::integrate_1d(
                    [&](double x) { return scaled_legendre(l, x) * fine(r, 0, x); }, -1.0, 0.0);
                double h1 = oracles::integrate_1d(
                    [&](double x) { return scaled_legendre(l, x) * fine(r, 1, x); }, 0.0, 1.0);
                double g0 = oracles::integrate_1d(
                    [&](double x) { return mw.eval(l, x) * fine(r, 0, x); }, -1.0, 0.0);
                double g1 = oracles::integrate_1d([&](double x) { return mw.eval(l, x) * fine(r, 1, x); },
                                                  0.0, 1.0);
                REQUIRE(std::abs(t.H0(l, r) - h0) < 1e-13);
                REQUIRE(std::abs(t.H1(l, r) - h1) < 1e-13);
                REQUIRE(std::abs(t.G0(l, r) - g0) < 1e-13);
                REQUIRE(std::abs(t.G1(l, r) - g1) < 1e-13);
            }
        int m2 = 2 * (p + 1);
        Eigen::MatrixXd B(m2, m2);
        B << t.H0, t.H1, t.G0, t.G1;
        REQUIRE((B * B.transpose() - Eigen::MatrixXd::Identity(m2, m2)).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("degree zero filter values") {
    const MRATransform& t = qmf(0);
    double s2 = 1.0 / std::sqrt(2.0);
    REQUIRE(std::abs(t.H0(0, 0) - s2) < 1e-14);
    REQUIRE(std::abs(t.H1(0, 0) - s2) < 1e-14);
    REQUIRE(std::abs(t.G0(0, 0) + s2) < 1e-14);
    REQUIRE(std::abs(t.G1(0, 0) - s2) < 1e-14);
}

TEST_CASE("decompose and reconstruct invert each other") {
    Pcg32 rng(7);
    for (int p = 0; p <= 3; ++p) {
        int m = p + 1;
        for (int trial = 0; trial < 25; ++trial) {
            Eigen::VectorXd sl(m), sr(m);
            for (int i = 0; i < m; ++i) {
                sl(i) = rng.uniform_half();
                sr(i) = rng.uniform_half();
            }
            Decomp1D dec = decompose_1d(p, sl, sr);
            auto rec = reconstruct_1d(p, dec.s, dec.d);
            REQUIRE((rec[0] - sl).lpNorm<Eigen::Infinity>() < 1e-13);
            REQUIRE((rec[1] - sr).lpNorm<Eigen::Infinity>() < 1e-13);
            double in2 = sl.squaredNorm() + sr.squaredNorm();
            double out2 = dec.s.squaredNorm() + dec.d.squaredNorm();
            REQUIRE(std::abs(in2 - out2) < 1e-13 * std::max(1.0, in2));
        }
    }
}

TEST_CASE("functions already on the parent level have zero details") {
    Pcg32 rng(11);
    for (int p = 0; p <= 3; ++p) {
        int m = p + 1;
        Eigen::VectorXd s(m);
        for (int i = 0; i < m; ++i) s(i) = rng.uniform_half();
        auto kids = reconstruct_1d(p, s, Eigen::VectorXd::Zero(m));
        Decomp1D dec = decompose_1d(p, kids[0], kids[1]);
        REQUIRE(dec.d.lpNorm<Eigen::Infinity>() < 1e-13);
        REQUIRE((dec.s - s).lpNorm<Eigen::Infinity>() < 1e-13);
        // basis correspondence: s = 0, d = e_k reproduces wavelet mode k
        MultiwaveletBasis mw(p);
        for (int k = 0; k <= p; ++k) {
            Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
            d(k) = 1.0;
            auto ch = reconstruct_1d(p, Eigen::VectorXd::Zero(m), d);
            // evaluate the reconstructed piecewise polynomial at a few points
            for (double x : {-0.73, -0.21, 0.4, 0.9}) {
                int half = x < 0 ? 0 : 1;
                double t = half == 0 ? 2 * x + 1 : 2 * x - 1;
                double v = 0;
                for (int r = 0; r <= p; ++r)
                    v += ch[half](r) * std::sqrt(2.0) * scaled_legendre(r, t);
                REQUIRE(std::abs(v - mw.eval(k, x)) < 1e-12);
            }
        }
    }
}

TEST_CASE("two dimensional transform: round trip, energy, in-space data") {
    Pcg32 rng(13);
    for (int p = 0; p <= 3; ++p) {
        int n = (p + 1) * (p + 1);
        for (int trial = 0; trial < 25; ++trial) {
            std::array<Eigen::VectorXd, 4> ch;
            double in2 = 0;
            for (auto& c : ch) {
                c.resize(n);
                for (int i = 0; i < n; ++i) c(i) = rng.uniform_half();
                in2 += c.squaredNorm();
            }
            Decomp2D dec = decompose_2d(p, ch);
            double out2 = dec.s.squaredNorm() + dec.da.squaredNorm() + dec.db.squaredNorm() +
                          dec.dg.squaredNorm();
            REQUIRE(std::abs(in2 - out2) < 1e-12 * std::max(1.0, in2));
            auto rec = reconstruct_2d(p, dec);
            for (int c = 0; c < 4; ++c)
                REQUIRE((rec[c] - ch[c]).lpNorm<Eigen::Infinity>() < 1e-13);
        }
        // parent-level data: zero alpha/beta/gamma blocks
        Eigen::VectorXd s(n);
        for (int i = 0; i < n; ++i) s(i) = rng.uniform_half();
        Decomp2D zero{s, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
        auto kids = reconstruct_2d(p, zero);
        Decomp2D dec = decompose_2d(p, kids);
        REQUIRE(dec.da.lpNorm<Eigen::Infinity>() < 1e-13);
        REQUIRE(dec.db.lpNorm<Eigen::Infinity>() < 1e-13);
        REQUIRE(dec.dg.lpNorm<Eigen::Infinity>() < 1e-13);
    }
}

TEST_CASE("constant children carry no detail") {
    Eigen::VectorXd sl(2), sr(2);
    sl << 3.1, 0.0;
    sr << 3.1, 0.0;
    Decomp1D dec = decompose_1d(1, sl, sr);
    REQUIRE(dec.d.lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("decomposition of projected fields matches direct coarse projection") {
    // nestedness through the physical element bases, on an off-reference
    // element and its children; polynomial data keeps both projections inside
    // the quadrature's exactness so the identity holds to roundoff
    auto f = [](double x) { return ((0.3 * x - 0.8) * x + 0.2) * x * x - x + 0.4; };
    for (int p = 0; p <= 3; ++p) {
        auto coarse = share(uniform_interval_mesh(3, 0.4, 2.2, false));
        auto fine = share(refine_all(*coarse));
        DGField uc = project(coarse, p, f);
        DGField uf = project(fine, p, f);
        for (int e = 0; e < coarse->n_elems(); ++e) {
            auto kids = fine->child_map[static_cast<std::size_t>(e)];
            Decomp1D dec = decompose_1d(p, uf.elem_coef(kids[0]), uf.elem_coef(kids[1]));
            REQUIRE((dec.s - Eigen::VectorXd(uc.elem_coef(e))).lpNorm<Eigen::Infinity>() < 1e-12);
        }
    }
}

TEST_CASE("transform cache returns one instance per degree") {
    for (int p = 0; p <= 3; ++p) REQUIRE(&qmf(p) == &qmf(p));
    REQUIRE_THROWS_AS(qmf(5), std::invalid_argument);
}

TEST_CASE("filter matrix dump is parseable and row major") {
    std::string csv = qmf_csv(1);
    REQUIRE(csv.find("H0,") != std::string::npos);
    REQUIRE(csv.find("G1,") != std::string::npos);
    // first H0 row starts with H0(0,0) = <phi0, child phi0> = 1/sqrt(2)
    std::istringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    REQUIRE(line.substr(0, 3) == "H0,");
    double v = std::stod(line.substr(3));
    REQUIRE(std::abs(v - qmf(1).H0(0, 0)) == 0.0);
}
