#include <catch_amalgamated.hpp>

#include <set>

#include "oracles.hpp"
#include "siacmra/delaunay.hpp"
#include "siacmra/indicators.hpp"

using namespace siacmra;

namespace {

DGField smooth_field(MeshPtr mesh, int p) {
    if (mesh->dim == 1)
        return project(mesh, p, [](double x) { return std::sin(2 * pi * x) + 0.3 * std::cos(6 * pi * x); });
    return project(mesh, p,
                   [](double x, double y) { return std::sin(2 * pi * x) * std::cos(2 * pi * y); });
}

}  // namespace

TEST_CASE("constant fields produce zero indicators") {
    auto mesh = share(uniform_interval_mesh(8, 0.0, 1.0, true));
    DGField u = project(mesh, 1, [](double) { return 3.0; });
    EnhanceConfig cfg;
    for (IndicatorKind kind : {IndicatorKind::filtered_diff, IndicatorKind::reconstruction_diff,
                               IndicatorKind::spectral_decay, IndicatorKind::small_scale_energy,
                               IndicatorKind::multiwavelet_detail}) {
        IndicatorEvaluator ind(u, kind, cfg);
        for (int e = 0; e < mesh->n_elems(); ++e) REQUIRE(ind.eta(e) < 1e-11);
    }
}

TEST_CASE("mode based indicators follow the closed forms") {
    auto mesh = share(uniform_interval_mesh(4, 0.0, 1.0, false));
    DGField u(mesh, 1);
    double a = 0.8, b = -0.3;
    u.elem_coef(2)(0) = a;
    u.elem_coef(2)(1) = b;
    REQUIRE(std::abs(eta_sd(u, 2) - std::abs(b) / std::hypot(a, b)) < 1e-13);
    REQUIRE(std::abs(eta_ssed(u, 2) - std::abs(b) / std::sqrt(0.25)) < 1e-13);
    // quadrature cross-check of the highest-mode norm
    DGField top(mesh, 1);
    top.elem_coef(2)(1) = b;
    double hm = oracles::element_l2(*mesh, 2, [&](Vec2 x) { return top.eval_in_element(2, x); });
    REQUIRE(std::abs(hm - std::abs(b)) < 1e-13);

    // a pure highest-mode field has unit spectral decay
    DGField pure(mesh, 2);
    pure.elem_coef(1)(2) = 0.7;
    REQUIRE(std::abs(eta_sd(pure, 1) - 1.0) < 1e-14);
    REQUIRE(eta_sd(pure, 0) == 0.0);  // zero solution gives no signal

    REQUIRE_THROWS_AS(IndicatorEvaluator(DGField(mesh, 0), IndicatorKind::spectral_decay, EnhanceConfig{}),
                      std::invalid_argument);
}

TEST_CASE("filtered difference indicator matches a dense independent quadrature") {
    // piecewise constant data with jumps; the filtered field is kinked, so
    // the reference splits every element at the exact breakpoints
    int n = 8;
    double h = 1.0 / n;
    auto mesh = share(uniform_interval_mesh(n, 0.0, 1.0, true));
    DGField u = project(mesh, 0, [](double x) { return x < 0.5 ? 1.0 : -1.0; });
    EnhanceConfig cfg;
    IndicatorEvaluator ind(u, IndicatorKind::filtered_diff, cfg);
    SiacKernel k = make_siac_kernel(1, 0);
    for (int e : {1, 3, 4}) {
        double xa = mesh->vertex(e, 0).x, xb = mesh->vertex(e, 1).x;
        std::vector<double> breaks;
        for (double kb : k.breakpoints())
            for (double b : mesh->breakpoints())
                for (int img = -1; img <= 1; ++img) {
                    double c = b + img - h * kb;
                    if (c > xa && c < xb) breaks.push_back(c);
                }
        double direct = std::sqrt(oracles::integrate_1d(
            [&](double x) {
                double d = filter_point_1d(u, k, x, h) - u.eval(x);
                return d * d;
            },
            xa, xb, breaks, 24));
        REQUIRE(std::abs(direct - ind.eta(e)) < 1e-10);
    }
}

TEST_CASE("reconstruction indicator matches the quadrature oracle") {
    auto mesh = share(uniform_interval_mesh(8, 0.0, 1.0, true));
    int p = 1;
    DGField u = smooth_field(mesh, p);
    EnhanceConfig cfg;
    IndicatorEvaluator ind(u, IndicatorKind::reconstruction_diff, cfg);
    EnhanceOperator op(u, cfg);
    auto fine = op.fine_mesh();
    for (int e : {0, 3, 6}) {
        auto kids_coef = op.element_children(e);
        auto kids = op.children_of(e);
        DGField vf(fine, p);
        vf.elem_coef(kids[0]) = kids_coef[0];
        vf.elem_coef(kids[1]) = kids_coef[1];
        double direct2 = 0.0;
        for (int s = 0; s < 2; ++s) {
            double d = oracles::element_l2(
                *fine, kids[s], [&](Vec2 x) { return vf.eval(x) - u.eval_in_element(e, x); }, 24);
            direct2 += d * d;
        }
        REQUIRE(std::abs(std::sqrt(direct2) - ind.eta(e)) < 1e-11);
    }
}

TEST_CASE("multiwavelet indicator equals the projection difference of filtered data") {
    auto mesh = share(uniform_interval_mesh(8, 0.0, 1.0, true));
    int p = 1;
    DGField u = smooth_field(mesh, p);
    EnhanceConfig cfg;
    IndicatorEvaluator ind(u, IndicatorKind::multiwavelet_detail, cfg);
    EnhanceOperator op(u, cfg);
    auto fine = op.fine_mesh();
    for (int e : {1, 4}) {
        auto kids_coef = op.element_children(e);
        auto kids = op.children_of(e);
        Decomp1D dec = details_from_enhanced_1d(p, kids_coef);
        DGField vf(fine, p);
        vf.elem_coef(kids[0]) = kids_coef[0];
        vf.elem_coef(kids[1]) = kids_coef[1];
        DGField vc(mesh, p);
        vc.elem_coef(e) = dec.s;
        double direct2 = 0.0;
        for (int s = 0; s < 2; ++s) {
            double d = oracles::element_l2(
                *fine, kids[s], [&](Vec2 x) { return vf.eval(x) - vc.eval_in_element(e, x); }, 24);
            direct2 += d * d;
        }
        REQUIRE(std::abs(std::sqrt(direct2) - ind.eta(e)) < 1e-10);
    }
    auto tri = share(perturbed_delaunay_mesh(3, 3, 0.1, 2));
    DGField ut = project(tri, 1, [](double x, double y) { return x + y; });
    IndicatorEvaluator bad(ut, IndicatorKind::multiwavelet_detail, cfg);
    REQUIRE_THROWS_AS(bad.eta(0), std::invalid_argument);
}

TEST_CASE("pythagorean split of the reconstruction indicator") {
    for (int p = 0; p <= 2; ++p) {
        auto mesh = share(uniform_interval_mesh(8, 0.0, 1.0, true));
        DGField u = smooth_field(mesh, p);
        EnhanceConfig cfg;
        EnhanceOperator op(u, cfg);
        IndicatorEvaluator irec(u, IndicatorKind::reconstruction_diff, cfg);
        IndicatorEvaluator iw(u, IndicatorKind::multiwavelet_detail, cfg);
        for (int e = 0; e < mesh->n_elems(); ++e) {
            auto kids = op.element_children(e);
            Decomp1D dec = details_from_enhanced_1d(p, kids);
            double coarse2 = (dec.s - Eigen::VectorXd(u.elem_coef(e))).squaredNorm();
            double rec = irec.eta(e), w = iw.eta(e);
            REQUIRE(std::abs(rec * rec - coarse2 - w * w) < 1e-11);
        }
    }
}

TEST_CASE("effectivity index") {
    std::vector<double> etas{3.0, 4.0};
    double eta = eta_global(etas);
    REQUIRE(std::abs(eta - 5.0) < 1e-15);
    auto i1 = effectivity(eta, 5.0);
    REQUIRE(i1);
    REQUIRE(std::abs(*i1 - 1.0) < 1e-15);
    auto i2 = effectivity(2.0 * eta, 5.0);
    REQUIRE(std::abs(*i2 - 2.0) < 1e-15);
    REQUIRE(!effectivity(eta, 0.0));
}

TEST_CASE("raising the tolerance never enlarges the marked set") {
    auto mesh = share(uniform_interval_mesh(16, 0.0, 1.0, true));
    DGField u = smooth_field(mesh, 1);
    IndicatorEvaluator ind(u, IndicatorKind::reconstruction_diff, EnhanceConfig{});
    auto etas = ind.all();
    auto marked = [&](double tol) {
        std::set<int> s;
        for (int e = 0; e < mesh->n_elems(); ++e)
            if (etas[static_cast<std::size_t>(e)] >= tol) s.insert(e);
        return s;
    };
    auto lo = marked(1e-6), hi = marked(1e-4);
    for (int e : hi) REQUIRE(lo.count(e) == 1);
}

TEST_CASE("adaptation loop bookkeeping") {
    // projection "solver": indicators drive refinement of projected data;
    // non-periodic so the only sharp feature sits at the interior layer
    auto f = [](double x, double) { return std::tanh((x - 0.5) / 0.05); };
    AdaptiveProblem prob;
    prob.solve = [&](MeshPtr m, const DGField*) {
        return project(m, 1, [&](double x) { return f(x, 0.0); });
    };
    prob.exact = f;
    EnhanceConfig cfg;
    cfg.boundary = BoundaryPolicy::skip_overlap;
    cfg.scaling = ScalingStrategy::min_edge();
    auto mesh0 = share(uniform_interval_mesh(8, 0.0, 1.0, false));

    // zero refinement budget: one entry
    AdaptReport r0 = adapt(prob, mesh0, 1, IndicatorKind::reconstruction_diff, cfg, 1e-4, 0);
    REQUIRE(r0.iterations.size() == 1);
    REQUIRE(r0.iterations[0].dof == 16);

    // huge tolerance: nothing marked, mesh unchanged
    AdaptReport rbig = adapt(prob, mesh0, 1, IndicatorKind::reconstruction_diff, cfg, 1e9, 5);
    REQUIRE(rbig.iterations.size() == 1);
    REQUIRE(rbig.iterations[0].marked == 0);
    REQUIRE(!rbig.truncated);
    REQUIRE(rbig.final().mesh->hash() == mesh0->hash());

    // zero tolerance: every element marked, two full refinements
    AdaptReport rfull = adapt(prob, mesh0, 1, IndicatorKind::reconstruction_diff, cfg, 0.0, 2);
    REQUIRE(rfull.iterations.size() == 3);
    REQUIRE(rfull.iterations[0].marked == 8);
    REQUIRE(rfull.iterations[1].mesh->n_elems() == 16);
    REQUIRE(rfull.iterations[2].mesh->n_elems() == 32);
    REQUIRE(rfull.truncated);

    // a realistic run: eta consistency, 2:1 meshes, termination
    AdaptReport r = adapt(prob, mesh0, 1, IndicatorKind::reconstruction_diff, cfg, 3e-4, 6);
    REQUIRE(r.iterations.size() <= 7);
    for (const AdaptIteration& it : r.iterations) {
        double acc = 0;
        for (double e : it.eta_elem) acc += e * e;
        REQUIRE(std::abs(std::sqrt(acc) - it.eta) < 1e-13);
        Mesh::FaceTable t = it.mesh->face_table();
        for (auto& fc : t.conforming)
            REQUIRE(std::abs(it.mesh->levels[static_cast<std::size_t>(fc[0])] -
                             it.mesh->levels[static_cast<std::size_t>(fc[1])]) <= 1);
        REQUIRE(it.dof == static_cast<long>(it.mesh->n_elems()) * 2);
    }
    // refinement concentrates at the interior layer
    const AdaptIteration& fin = r.final();
    int maxlvl = 0;
    for (int lv : fin.mesh->levels) maxlvl = std::max(maxlvl, lv);
    REQUIRE(maxlvl >= 2);
    for (int e = 0; e < fin.mesh->n_elems(); ++e)
        if (fin.mesh->levels[static_cast<std::size_t>(e)] == maxlvl)
            REQUIRE(std::abs(fin.mesh->elem_center(e).x - 0.5) < 0.15);
}

TEST_CASE("solver failures carry the iteration index") {
    AdaptiveProblem prob;
    prob.solve = [](MeshPtr m, const DGField*) -> DGField {
        if (m->n_elems() > 8) throw solver_error("synthetic blowup", 1.0);
        return project(m, 1, [](double x) { return std::sin(2 * pi * x); });
    };
    auto mesh0 = share(uniform_interval_mesh(8, 0.0, 1.0, true));
    try {
        adapt(prob, mesh0, 1, IndicatorKind::spectral_decay, EnhanceConfig{}, 0.0, 3);
        FAIL("expected solver_error");
    } catch (const solver_error& e) {
        REQUIRE(std::string(e.what()).find("iteration 1") != std::string::npos);
    }
}
