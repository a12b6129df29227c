#include <catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "siacmra/delaunay.hpp"
#include "siacmra/field.hpp"
#include "siacmra/functions.hpp"

using namespace siacmra;

TEST_CASE("projection of a constant evaluates to the constant") {
    for (auto mesh : {share(uniform_interval_mesh(4, -1.0, 1.0, false)),
                      share(perturbed_quad_mesh(3, 3, 0.2, 4)),
                      share(perturbed_delaunay_mesh(3, 3, 0.2, 4))}) {
        DGField u = project(mesh, 2, [](double, double = 0) { return 5.0; });
        Vec2 x = mesh->elem_center(1);
        REQUIRE(std::abs(u.eval(x) - 5.0) < 1e-12);
    }
}

TEST_CASE("projection coefficients on a single reference element") {
    auto mesh = share(uniform_interval_mesh(1, -1.0, 1.0, false));
    DGField u = project(mesh, 1, [](double x) { return x; });
    REQUIRE(std::abs(u.elem_coef(0)(0)) < 1e-15);
    REQUIRE(std::abs(u.elem_coef(0)(1) - std::sqrt(2.0 / 3.0)) < 1e-14);
}

TEST_CASE("projecting a basis mode yields a unit coefficient vector") {
    auto mesh = share(uniform_interval_mesh(3, 0.0, 1.0, false));
    DGField probe(mesh, 2);
    probe.elem_coef(1)(2) = 1.0;
    DGField u = project(mesh, 2, [&](double x) { return probe.eval(x); });
    for (int e = 0; e < 3; ++e)
        for (int m = 0; m < 3; ++m)
            REQUIRE(std::abs(u.elem_coef(e)(m) - (e == 1 && m == 2 ? 1.0 : 0.0)) < 1e-13);
}

TEST_CASE("projection reproduces polynomials pointwise") {
    auto poly = [](double x, double y) { return 1.5 - 0.7 * x + 0.2 * y + 0.9 * x * y; };
    for (auto mesh : {share(perturbed_quad_mesh(4, 4, 0.3, 8)), share(perturbed_delaunay_mesh(4, 4, 0.3, 8))}) {
        DGField u = project(mesh, 2, poly);
        Pcg32 rng(3);
        for (int i = 0; i < 20; ++i) {
            Vec2 x{rng.uniform01(), rng.uniform01()};
            REQUIRE(std::abs(u.eval(x) - poly(x.x, x.y)) < 1e-12);
        }
    }
}

TEST_CASE("projection is linear") {
    auto mesh = share(perturbed_quad_mesh(3, 3, 0.25, 2));
    auto f = [](double x, double y) { return std::sin(3 * x) * y; };
    auto g = [](double x, double y) { return std::cos(2 * y) + x; };
    DGField uf = project(mesh, 2, f);
    DGField ug = project(mesh, 2, g);
    DGField uc = project(mesh, 2, [&](double x, double y) { return 2.0 * f(x, y) - 0.5 * g(x, y); });
    for (std::size_t i = 0; i < uc.coef.size(); ++i)
        REQUIRE(std::abs(uc.coef[i] - (2.0 * uf.coef[i] - 0.5 * ug.coef[i])) < 1e-13);
}

TEST_CASE("projection satisfies discrete orthogonality of the residual") {
    auto mesh = share(perturbed_quad_mesh(3, 3, 0.3, 6));
    auto f = [](double x, double y) { return std::exp(x) * std::sin(2 * y); };
    int p = 2;
    DGField u = project(mesh, p, f);
    // the residual is orthogonal to every mode under the projection rule
    QuadRule2D rule = tensor_rule(p + 4, p + 4);
    for (int e = 0; e < mesh->n_elems(); ++e) {
        ElemGeom g = mesh->geom(e);
        double scale = 1.0 / g.norm_scale();
        for (int m = 0; m < u.n_modes(); ++m) {
            double acc = 0;
            for (std::size_t q = 0; q < rule.x.size(); ++q) {
                Vec2 x = g.map(rule.x[q]);
                double diff = f(x.x, x.y) - u.eval_in_element(e, x);
                acc += rule.w[q] * std::abs(g.jac_det(rule.x[q])) * diff * u.basis.eval(m, rule.x[q]) * scale;
            }
            REQUIRE(std::abs(acc) < 1e-12);
        }
    }
}

TEST_CASE("non-finite data is reported with the element") {
    auto mesh = share(uniform_interval_mesh(4, 0.0, 1.0, false));
    REQUIRE_THROWS_AS(project(mesh, 1, [](double x) { return x < 0.3 ? 1.0 : 1.0 / 0.0; }),
                      numeric_error);
}

TEST_CASE("transfer to children preserves the function") {
    for (auto mesh : {share(perturbed_quad_mesh(3, 3, 0.3, 5)), share(perturbed_delaunay_mesh(3, 3, 0.3, 5)),
                      share(uniform_interval_mesh(4, -1.0, 1.0, false))}) {
        int p = 2;
        auto f = [](double x, double y = 0) { return std::sin(2 * x + y) + 0.4 * x * x; };
        DGField u = project(mesh, p, f);
        auto fine = share(refine_all(*mesh));
        DGField v = transfer_to_children(u, fine);
        Pcg32 rng(9);
        for (int i = 0; i < 20; ++i) {
            Vec2 x{mesh->box.lo.x + rng.uniform01() * mesh->box.len(0),
                   mesh->dim == 2 ? rng.uniform01() : 0.0};
            REQUIRE(std::abs(u.eval(x) - v.eval(x)) < 1e-13);
        }
        // global norm is carried over exactly
        double n_old = 0, n_new = 0;
        for (int e = 0; e < mesh->n_elems(); ++e) n_old += elem_norm2(u, e);
        for (int e = 0; e < fine->n_elems(); ++e) n_new += elem_norm2(v, e);
        REQUIRE(std::abs(n_old - n_new) < 1e-12 * std::max(1.0, n_old));
    }
    auto a = share(uniform_interval_mesh(4, 0.0, 1.0, false));
    auto b = share(uniform_interval_mesh(8, 0.0, 1.0, false));
    DGField u = project(a, 1, [](double x) { return x; });
    REQUIRE_THROWS_AS(transfer_to_children(u, b), std::invalid_argument);
}

TEST_CASE("error norms") {
    auto mesh = share(uniform_interval_mesh(8, 0.0, 1.0, true));
    // in-space function: both errors vanish
    auto f = [](double x) { return 1.0 - 2.0 * x; };
    DGField u = project(mesh, 1, f);
    REQUIRE(l2_error(u, f) < 1e-12);
    REQUIRE(linf_error(u, f) < 1e-12);

    // pure mode k against zero: the L2 error is the coefficient magnitude
    DGField w(mesh, 1);
    w.elem_coef(3)(1) = 0.77;
    REQUIRE(std::abs(l2_error(w, [](double) { return 0.0; }) - 0.77) < 1e-13);

    // elementwise consistency
    auto g = [](double x) { return std::sin(5 * x); };
    DGField v = project(mesh, 1, g);
    auto parts = elementwise_l2_error(v, g);
    double acc = 0;
    for (double e : parts) acc += e * e;
    REQUIRE(std::abs(std::sqrt(acc) - l2_error(v, g)) < 1e-13);
    DGField exact_field = project(mesh, 1, f);
    for (double e : elementwise_l2_error(exact_field, f)) REQUIRE(e < 1e-13);
}

TEST_CASE("first order convergence of piecewise constants") {
    auto f = [](double x) { return std::sin(2 * pi * x); };
    auto m16 = share(uniform_interval_mesh(16, 0.0, 1.0, true));
    auto m32 = share(uniform_interval_mesh(32, 0.0, 1.0, true));
    double e16 = l2_error(project(m16, 0, f), f);
    double e32 = l2_error(project(m32, 0, f), f);
    REQUIRE(e16 / e32 > 1.8);
    REQUIRE(e16 / e32 < 2.2);
}

TEST_CASE("projection error never grows under refinement") {
    auto f = [](double x, double y) { return std::sin(2 * pi * x) * std::cos(pi * y); };
    auto mesh = share(perturbed_quad_mesh(4, 4, 0.2, 3));
    for (int p = 0; p <= 2; ++p) {
        DGField u = project(mesh, p, f);
        auto fine = share(refine_all(*mesh));
        DGField v = project(fine, p, f);
        REQUIRE(l2_error(v, f) <= l2_error(u, f) * (1.0 + 1e-12));
    }
}

TEST_CASE("field dump format") {
    auto mesh = share(uniform_interval_mesh(2, 0.0, 1.0, false));
    DGField u = project(mesh, 1, [](double x) { return x; });
    std::ostringstream os;
    dump_field(u, os);
    std::istringstream in(os.str());
    std::uint64_t hash;
    int p, ne;
    in >> hash >> p >> ne;
    REQUIRE(hash == mesh->hash());
    REQUIRE(p == 1);
    REQUIRE(ne == 2);
    double c0, c1;
    in >> c0 >> c1;
    REQUIRE(std::abs(c0 - u.elem_coef(0)(0)) == 0.0);
}

TEST_CASE("study functions stay negligible at the domain ends") {
    REQUIRE(std::abs(fn_gaussian(1.0, 0.0)) < 1e-16);
    REQUIRE(std::abs(fn_gaussian(1.0, 1.0)) < 1e-16);
    REQUIRE(std::abs(fn_double_tanh(1.0, 0.0)) < 1e-16);
    REQUIRE(std::abs(fn_double_tanh(1.0, 1.0)) < 1e-16);
}
