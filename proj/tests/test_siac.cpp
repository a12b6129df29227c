#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "siacmra/functions.hpp"
#include "siacmra/siac.hpp"

using namespace siacmra;

TEST_CASE("central b-splines from the recursion") {
    REQUIRE(bspline(1, 0.0) == 1.0);
    REQUIRE(bspline(1, 0.75) == 0.0);
    REQUIRE(std::abs(bspline(2, 0.0) - 1.0) < 1e-15);
    REQUIRE(bspline(2, 1.0) == 0.0);
    REQUIRE(bspline(2, -1.0) == 0.0);
    REQUIRE(std::abs(bspline(3, 0.0) - 0.75) < 1e-15);
    REQUIRE_THROWS_AS(bspline(0, 0.0), std::invalid_argument);

    // partition of unity and unit mass
    for (int ell = 1; ell <= 4; ++ell) {
        double t = 0.3, sum = 0.0;
        for (int j = -6; j <= 6; ++j) sum += bspline(ell, t - j);
        REQUIRE(std::abs(sum - 1.0) < 1e-14);
        std::vector<double> breaks;
        for (int i = 0; i <= ell; ++i) breaks.push_back(-0.5 * ell + i);
        double mass = oracles::integrate_1d([&](double x) { return bspline(ell, x); }, -0.5 * ell,
                                            0.5 * ell, breaks);
        REQUIRE(std::abs(mass - 1.0) < 1e-14);
    }
}

TEST_CASE("kernel coefficients solve the reproduction system") {
    SiacKernel k0 = make_siac_kernel(1, 0);
    REQUIRE(k0.coefficients().size() == 1);
    REQUIRE(std::abs(k0.coefficients()[0] - 1.0) < 1e-14);

    SiacKernel k2 = make_siac_kernel(1, 2);
    REQUIRE(std::abs(k2.coefficients()[0] + 1.0 / 24.0) < 1e-13);
    REQUIRE(std::abs(k2.coefficients()[1] - 13.0 / 12.0) < 1e-13);
    REQUIRE(std::abs(k2.coefficients()[2] + 1.0 / 24.0) < 1e-13);

    for (int r : {2, 4, 6}) {
        SiacKernel k = make_siac_kernel(1, r);
        for (int j = 0; j <= r; ++j)
            REQUIRE(std::abs(k.coefficients()[static_cast<std::size_t>(j)] -
                             k.coefficients()[static_cast<std::size_t>(r - j)]) < 1e-13);
    }
    // smoothness variant builds too
    SiacKernel ks = smoothness_kernel(2);
    REQUIRE(ks.order() == 3);
    REQUIRE(ks.n_splines() == 5);
}

TEST_CASE("kernel evaluation and unit mass") {
    SiacKernel k0 = make_siac_kernel(1, 0);
    REQUIRE(std::abs(k0.eval(0.0, 1.0) - 1.0) < 1e-15);
    SiacKernel k = make_siac_kernel(1, 2);
    double a = k.support_radius();
    REQUIRE(k.eval(1.001 * a, 1.0) == 0.0);
    REQUIRE(k.eval(-1.2 * a * 0.37, 0.37) == 0.0);
    for (double H : {1.0, 0.37}) {
        std::vector<double> breaks;
        for (double b : k.breakpoints()) breaks.push_back(H * b);
        double mass = oracles::integrate_1d([&](double t) { return k.eval(t, H); }, -H * a, H * a, breaks);
        REQUIRE(std::abs(mass - 1.0) < 1e-13);
    }
    REQUIRE_THROWS_AS(k.eval(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("kernel moments vanish through the reproduction degree") {
    for (int p = 0; p <= 3; ++p) {
        SiacKernel k = make_siac_kernel(1, 2 * p);
        double a = k.support_radius();
        for (double H : {1.0, 0.7}) {
            std::vector<double> breaks;
            for (double b : k.breakpoints()) breaks.push_back(H * b);
            for (int m = 0; m <= 2 * p; ++m) {
                double mom = oracles::integrate_1d(
                    [&](double t) { return std::pow(t, m) * k.eval(t, H); }, -H * a, H * a, breaks);
                REQUIRE(std::abs(mom - (m == 0 ? 1.0 : 0.0)) < 1e-11);
            }
        }
    }
}

TEST_CASE("filtering a constant field returns the constant") {
    auto mesh = share(uniform_interval_mesh(12, 0.0, 1.0, true));
    DGField u = project(mesh, 1, [](double) { return 2.5; });
    SiacKernel k = make_siac_kernel(1, 2);
    for (double x : {0.1, 0.55, 0.98})
        REQUIRE(std::abs(filter_point_1d(u, k, x, 1.0 / 12.0) - 2.5) < 1e-13);
}

TEST_CASE("filtering reproduces the underlying quadratic away from the seam") {
    // degree 1 data from x^2, kernel reproduction degree 2, scale H = h: the
    // projection residue is h-periodic and mean free, so the filter recovers
    // the quadratic exactly
    int n = 16;
    double h = 2.0 / n;
    auto mesh = share(uniform_interval_mesh(n, -1.0, 1.0, true));
    DGField u = project(mesh, 1, [](double x) { return x * x; });
    SiacKernel k = make_siac_kernel(1, 2);
    for (double x : {-0.4, 0.0313, 0.52}) {
        REQUIRE(std::abs(filter_point_1d(u, k, x, h) - x * x) < 1e-12);
    }
}

TEST_CASE("filter argument validation") {
    auto mesh = share(uniform_interval_mesh(8, 0.0, 1.0, true));
    DGField u = project(mesh, 1, [](double x) { return x; });
    SiacKernel k = make_siac_kernel(1, 2);
    REQUIRE_THROWS_AS(filter_point_1d(u, k, 0.5, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(filter_point_1d(u, k, 0.5, 0.8), std::invalid_argument);  // support 2.4 * 0.8 > 1

    auto wall = share(uniform_interval_mesh(8, 0.0, 1.0, false));
    DGField v = project(wall, 1, [](double x) { return x; });
    REQUIRE_THROWS_AS(filter_point_1d(v, k, 0.05, 0.125), domain_exit_error);
    REQUIRE(std::isfinite(filter_point_1d(v, k, 0.5, 0.125)));
}

TEST_CASE("line filtering reproduces low degree data") {
    auto mesh = share(uniform_quad_mesh(8, 8));
    DGField c = project(mesh, 1, [](double, double) { return -3.25; });
    SiacKernel k = make_siac_kernel(1, 2);
    REQUIRE(std::abs(filter_point_line(c, k, {0.3, 0.7}, 0.25 * pi, std::sqrt(2.0) / 8) + 3.25) < 1e-12);

    DGField lin = project(mesh, 1, [](double x, double y) { return x + y; });
    for (Vec2 x : {Vec2{0.4, 0.45}, Vec2{0.55, 0.5}})
        REQUIRE(std::abs(filter_point_line(lin, k, x, 0.25 * pi, std::sqrt(2.0) / 8) - (x.x + x.y)) < 1e-11);
}

TEST_CASE("axis aligned line filtering reduces to the 1d filter") {
    int n = 10;
    auto mesh2 = share(uniform_quad_mesh(n, n));
    auto mesh1 = share(uniform_interval_mesh(n, 0.0, 1.0, true));
    auto f = [](double x) { return std::sin(2 * pi * x) + 0.2 * std::cos(4 * pi * x); };
    DGField u2 = project(mesh2, 1, [&](double x, double) { return f(x); });
    DGField u1 = project(mesh1, 1, f);
    SiacKernel k = make_siac_kernel(1, 2);
    double H = 1.0 / n;
    for (double x : {0.23, 0.61}) {
        double v2 = filter_point_line(u2, k, {x, 0.43}, 0.0, H);
        double v1 = filter_point_1d(u1, k, x, H);
        REQUIRE(std::abs(v2 - v1) < 1e-12);
    }
}

TEST_CASE("scaling strategies") {
    auto uni1 = share(uniform_interval_mesh(10, 0.0, 1.0, true));
    for (auto s : {ScalingStrategy::max_edge(), ScalingStrategy::min_edge(), ScalingStrategy::adaptive(),
                   ScalingStrategy::default_constant()})
        REQUIRE(std::abs(scaling_value(s, uni1, {0.37, 0.0}) - 0.1) < 1e-13);

    auto uni2 = share(uniform_quad_mesh(8, 8));
    REQUIRE(std::abs(scaling_value(ScalingStrategy::default_constant(), uni2, {0.5, 0.5}) -
                     std::sqrt(2.0) / 8.0) < 1e-13);
    REQUIRE(std::abs(scaling_value(ScalingStrategy::max_edge(), uni2, {0.5, 0.5}) - 0.125) < 1e-13);

    auto graded = share(graded_quad_mesh(16, 100.0));
    double ratio = scaling_value(ScalingStrategy::max_edge(), graded, {0.5, 0.5}) /
                   scaling_value(ScalingStrategy::min_edge(), graded, {0.5, 0.5});
    REQUIRE(ratio > 95.0);
    REQUIRE(ratio < 105.0);

    BoundScaling fixed(uni2, ScalingStrategy::constant(0.42));
    REQUIRE(fixed.at(Vec2{0.1, 0.9}) == 0.42);
}

TEST_CASE("periodic filtering conserves the mean") {
    auto mesh = share(uniform_interval_mesh(16, 0.0, 1.0, true));
    auto f = [](double x) { return 0.7 + std::sin(2 * pi * x) + 0.3 * std::cos(6 * pi * x); };
    DGField u = project(mesh, 2, f);
    SiacKernel k = make_siac_kernel(1, 4);
    double H = 1.0 / 16.0;
    const GaussRule& g = gauss_legendre(6);
    double mean_filtered = 0.0, mean_field = 0.0;
    for (int e = 0; e < mesh->n_elems(); ++e) {
        ElemGeom ge = mesh->geom(e);
        for (int q = 0; q < g.n(); ++q) {
            double x = ge.map({g.x[q], 0.0}).x;
            double w = 0.5 * g.w[q] * (ge.v[1].x - ge.v[0].x);
            mean_filtered += w * filter_point_1d(u, k, x, H);
            mean_field += w * u.eval(x);
        }
    }
    REQUIRE(std::abs(mean_filtered - mean_field) < 1e-10);
}

TEST_CASE("filtering commutes with dilation of the problem") {
    auto f = [](double x) { return std::sin(2 * pi * x); };
    auto mesh = share(uniform_interval_mesh(12, 0.0, 1.0, true));
    auto big = share(uniform_interval_mesh(12, 0.0, 3.0, true));
    DGField u = project(mesh, 1, f);
    DGField v = project(big, 1, [&](double x) { return f(x / 3.0); });
    SiacKernel k = make_siac_kernel(1, 2);
    double H = 1.0 / 12.0;
    for (double x : {0.31, 0.66})
        REQUIRE(std::abs(filter_point_1d(u, k, x, H) - filter_point_1d(v, k, 3.0 * x, 3.0 * H)) < 1e-12);
}
