#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "siacmra/burgers.hpp"
#include "siacmra/delaunay.hpp"
#include "siacmra/enhance.hpp"
#include "siacmra/functions.hpp"
#include "siacmra/indicators.hpp"
#include "siacmra/poisson.hpp"

namespace siacmra {

inline constexpr const char* kit_version = "siac-mra-kit v1";

// ---------------------------------------------------------------- mesh specs

struct MeshSpec {
    std::string kind = "uniform-quad";  // interval | uniform-quad | perturbed-quad | delaunay | graded
    int n = 16;
    double perturb = 0.0;
    std::uint64_t seed = 1;
    double ratio = 1.0;

    std::string describe() const {
        std::ostringstream os;
        os << kind << n;
        if (kind == "perturbed-quad" || kind == "delaunay") os << "_q" << perturb << "_s" << seed;
        if (kind == "graded") os << "_r" << ratio;
        return os.str();
    }
};

// study meshes live on the periodic unit domain
inline MeshPtr make_study_mesh(const MeshSpec& spec) {
    if (spec.kind == "interval") return share(uniform_interval_mesh(spec.n, 0.0, 1.0, true));
    if (spec.kind == "uniform-quad") return share(uniform_quad_mesh(spec.n, spec.n));
    if (spec.kind == "perturbed-quad")
        return share(perturbed_quad_mesh(spec.n, spec.n, spec.perturb, spec.seed));
    if (spec.kind == "delaunay")
        return share(perturbed_delaunay_mesh(spec.n, spec.n, spec.perturb, spec.seed));
    if (spec.kind == "graded") return share(graded_quad_mesh(spec.n, spec.ratio));
    throw std::invalid_argument("unknown mesh spec: " + spec.kind);
}

inline ScalingStrategy scaling_from_name(const std::string& s) {
    if (s == "const") return ScalingStrategy::default_constant();
    if (s == "max") return ScalingStrategy::max_edge();
    if (s == "min") return ScalingStrategy::min_edge();
    if (s == "adaptive") return ScalingStrategy::adaptive();
    throw std::invalid_argument("unknown scaling: " + s);
}

// ------------------------------------------------------------- file plumbing

inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

struct RunManifest {
    std::string subcommand;
    std::map<std::string, std::string> params;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
};

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m,
                           const std::string& stem) {
    nlohmann::json j;
    j["subcommand"] = m.subcommand;
    j["version"] = kit_version;
    j["params"] = m.params;
    j["seed"] = m.seed;
    j["outputs"] = m.outputs;
    j["wall_seconds"] = m.wall_seconds;
    write_text_atomic(dir / (stem + "_manifest.json"), j.dump(2) + "\n");
}

class StopWatch {
 public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

 private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// --------------------------------------------------------------- subcommands

// kernel coefficients and numeric moments as a long-format CSV
inline std::vector<std::string> run_kernel_check(int p, int ell, int r,
                                                 const std::filesystem::path& out_dir) {
    StopWatch watch;
    if (r < 0) r = 2 * p;
    SiacKernel k = make_siac_kernel(ell, r);
    std::ostringstream os;
    os << "# " << kit_version << " kernel-check\n";
    os << "# p=" << p << " ell=" << ell << " r=" << r << "\n";
    os << "kind,index,value\n";
    for (int j = 0; j <= r; ++j) os << "c," << g17(k.center(j)) << ',' << g17(k.coefficients()[static_cast<std::size_t>(j)]) << '\n';
    bool pass = true;
    for (int m = 0; m <= r; ++m) {
        double mom = 0.0;
        for (int j = 0; j <= r; ++j)
            mom += k.coefficients()[static_cast<std::size_t>(j)] * SiacKernel::bspline_moment(ell, k.center(j), m);
        os << "moment," << m << ',' << g17(mom) << '\n';
        if (std::abs(mom - (m == 0 ? 1.0 : 0.0)) > 1e-11) pass = false;
    }
    os << "pass,0," << (pass ? 1 : 0) << '\n';
    std::ostringstream name;
    name << "kernel_check_p" << p << "_l" << ell << "_r" << r;
    std::filesystem::create_directories(out_dir);
    write_text_atomic(out_dir / (name.str() + ".csv"), os.str());

    RunManifest man;
    man.subcommand = "kernel-check";
    man.params = {{"p", std::to_string(p)}, {"ell", std::to_string(ell)}, {"r", std::to_string(r)}};
    man.outputs = {name.str() + ".csv"};
    man.wall_seconds = watch.seconds();
    write_manifest(out_dir, man, name.str());
    return man.outputs;
}

// per-step error table of the iterated enhancement for one study function
inline std::vector<std::string> run_enhance_study(const std::string& function, double k_freq, int p,
                                                  const MeshSpec& spec, const std::string& scaling,
                                                  int steps, double theta,
                                                  const std::filesystem::path& out_dir) {
    StopWatch watch;
    MeshPtr mesh = make_study_mesh(spec);
    EnhanceConfig cfg;
    cfg.scaling = scaling_from_name(scaling);
    cfg.theta = theta;
    EnhanceSequence seq;
    if (mesh->dim == 1) {
        Fn1 f = study_function_1d(function, k_freq);
        seq = enhance_iterated(project(mesh, p, f), cfg, steps, f, k_freq);
    } else {
        Fn2 f = study_function_2d(function, k_freq);
        seq = enhance_iterated(project(mesh, p, f), cfg, steps, f, k_freq);
    }
    std::ostringstream os;
    os << "# " << kit_version << " enhance-study\n";
    os << "step,n_elements,dof,ppw,L2,Linf\n";
    for (const EnhanceStep& s : seq.steps)
        os << s.step << ',' << s.n_elems << ',' << s.dof << ',' << g17(s.ppw) << ',' << g17(s.l2)
           << ',' << g17(s.linf) << '\n';
    std::ostringstream name;
    name << "enhance_" << function << "_k" << k_freq << "_p" << p << "_" << spec.describe() << "_"
         << scaling;
    std::filesystem::create_directories(out_dir);
    write_text_atomic(out_dir / (name.str() + ".csv"), os.str());

    RunManifest man;
    man.subcommand = "enhance-study";
    man.params = {{"function", function}, {"k", g17(k_freq)},      {"p", std::to_string(p)},
                  {"mesh", spec.describe()}, {"scaling", scaling}, {"steps", std::to_string(steps)},
                  {"theta", g17(theta)}};
    man.seed = spec.seed;
    man.outputs = {name.str() + ".csv"};
    man.wall_seconds = watch.seconds();
    write_manifest(out_dir, man, name.str());
    return man.outputs;
}

// paired error columns for the constant max-edge and adaptive scalings
inline std::vector<std::string> run_scaling_study(const MeshSpec& spec, int p, int steps,
                                                  const std::filesystem::path& out_dir) {
    StopWatch watch;
    MeshPtr mesh = make_study_mesh(spec);
    if (mesh->dim != 2) throw std::invalid_argument("scaling-study: 2D meshes only");
    Fn2 f = study_function_2d("sine", 1.0);
    DGField u0 = project(mesh, p, f);
    EnhanceConfig cmax;
    cmax.scaling = ScalingStrategy::max_edge();
    EnhanceConfig cad;
    cad.scaling = ScalingStrategy::adaptive();
    EnhanceSequence sm = enhance_iterated(u0, cmax, steps, f, 1.0);
    EnhanceSequence sa = enhance_iterated(u0, cad, steps, f, 1.0);
    std::ostringstream os;
    os << "# " << kit_version << " scaling-study\n";
    os << "step,n_elements,dof,L2_const,Linf_const,L2_adaptive,Linf_adaptive\n";
    for (std::size_t i = 0; i < sm.steps.size(); ++i)
        os << sm.steps[i].step << ',' << sm.steps[i].n_elems << ',' << sm.steps[i].dof << ','
           << g17(sm.steps[i].l2) << ',' << g17(sm.steps[i].linf) << ',' << g17(sa.steps[i].l2)
           << ',' << g17(sa.steps[i].linf) << '\n';
    std::ostringstream name;
    name << "scaling_" << spec.describe() << "_p" << p;
    std::filesystem::create_directories(out_dir);
    write_text_atomic(out_dir / (name.str() + ".csv"), os.str());

    RunManifest man;
    man.subcommand = "scaling-study";
    man.params = {{"mesh", spec.describe()}, {"p", std::to_string(p)}, {"steps", std::to_string(steps)}};
    man.seed = spec.seed;
    man.outputs = {name.str() + ".csv"};
    man.wall_seconds = watch.seconds();
    write_manifest(out_dir, man, name.str());
    return man.outputs;
}

// ------------------------------------------------------------ adaptive runs

inline BurgersProblem burgers_tanh_problem() {
    BurgersProblem prob;
    prob.gamma = 0.02;
    prob.periodic = false;
    prob.bc_left = 1.0;
    prob.bc_right = -1.0;
    prob.initial = [](double x) { return -std::tanh(x / (2.0 * 0.02)); };
    return prob;
}

inline BurgersProblem burgers_sine_problem() {
    BurgersProblem prob;
    prob.gamma = 0.5;
    prob.periodic = true;
    prob.initial = [](double x) { return std::sin(2.0 * pi * x); };
    prob.forcing = [g = prob.gamma](double x, double) {
        return 2.0 * pi * std::sin(2.0 * pi * x) * std::cos(2.0 * pi * x) +
               4.0 * pi * pi * g * std::sin(2.0 * pi * x);
    };
    return prob;
}

struct AdaptRunResult {
    AdaptReport report;
    double eta_tol = 0.0;
    double reference_error = 0.0;
    long reference_dof = 0;
    std::vector<std::string> outputs;
};

namespace detail {

inline void write_adapt_csvs(const std::string& subcommand, const std::string& stem,
                             const AdaptRunResult& run, const std::filesystem::path& out_dir,
                             RunManifest man, const StopWatch& watch) {
    std::ostringstream os;
    os << "# " << kit_version << ' ' << subcommand << '\n';
    os << "# eta_tol=" << g17(run.eta_tol) << " reference_error=" << g17(run.reference_error)
       << " reference_dof=" << run.reference_dof << '\n';
    os << "iter,dof,eta,e_h,ieff,marked\n";
    for (std::size_t i = 0; i < run.report.iterations.size(); ++i) {
        const AdaptIteration& it = run.report.iterations[i];
        os << i << ',' << it.dof << ',' << g17(it.eta) << ',' << g17(it.error_l2) << ',';
        if (it.ieff)
            os << g17(*it.ieff);
        else
            os << "exact";
        os << ',' << it.marked << '\n';
    }
    std::ostringstream mt;
    const AdaptIteration& fin = run.report.final();
    mt << "# " << kit_version << ' ' << subcommand << " final-mesh\n";
    mt << "elem,level,cx,cy,eta_tau\n";
    for (int e = 0; e < fin.mesh->n_elems(); ++e) {
        Vec2 c = fin.mesh->elem_center(e);
        mt << e << ',' << fin.mesh->levels[static_cast<std::size_t>(e)] << ',' << g17(c.x) << ','
           << g17(c.y) << ',' << g17(fin.eta_elem[static_cast<std::size_t>(e)]) << '\n';
    }
    std::filesystem::create_directories(out_dir);
    write_text_atomic(out_dir / (stem + "_summary.csv"), os.str());
    write_text_atomic(out_dir / (stem + "_mesh.csv"), mt.str());
    man.outputs = {stem + "_summary.csv", stem + "_mesh.csv"};
    man.wall_seconds = watch.seconds();
    write_manifest(out_dir, man, stem);
}

}  // namespace detail

// reference resolutions for the derived error tolerances
inline constexpr int reference_n_1d = 128;
inline constexpr int reference_n_2d = 64;

inline AdaptRunResult run_adapt_burgers(const std::string& problem, int p, IndicatorKind indicator,
                                        double eta_tol, int max_iters,
                                        const std::filesystem::path& out_dir) {
    StopWatch watch;
    BurgersProblem bp = problem == "tanh" ? burgers_tanh_problem() : burgers_sine_problem();
    double lo = bp.periodic ? 0.0 : -1.0, hi = 1.0;
    Fn1 exact = bp.periodic ? Fn1([](double x) { return std::sin(2.0 * pi * x); }) : bp.initial;

    AdaptRunResult run;
    {
        auto mref = share(uniform_interval_mesh(reference_n_1d, lo, hi, bp.periodic));
        DGField uref = burgers_steady(bp, mref, p);
        auto ew = elementwise_l2_error(uref, exact);
        double mean = 0.0;
        for (double e : ew) mean += e;
        run.eta_tol = eta_tol > 0.0 ? eta_tol : mean / static_cast<double>(ew.size());
        run.reference_error = l2_error(uref, exact);
        run.reference_dof = uref.dof();
    }

    AdaptiveProblem prob;
    prob.solve = [&bp, p](MeshPtr m, const DGField* init) { return burgers_steady(bp, m, p, init); };
    prob.exact = [exact](double x, double) { return exact(x); };
    EnhanceConfig cfg;
    cfg.scaling = ScalingStrategy::min_edge();
    cfg.boundary = bp.periodic ? BoundaryPolicy::periodic : BoundaryPolicy::skip_overlap;
    auto mesh0 = share(uniform_interval_mesh(8, lo, hi, bp.periodic));
    run.report = adapt(prob, mesh0, p, indicator, cfg, run.eta_tol, max_iters);

    std::ostringstream stem;
    stem << "adapt_burgers_" << problem << "_p" << p << "_" << indicator_name(indicator);
    RunManifest man;
    man.subcommand = "adapt-burgers";
    man.params = {{"problem", problem},
                  {"p", std::to_string(p)},
                  {"indicator", indicator_name(indicator)},
                  {"eta_tol", g17(run.eta_tol)},
                  {"max_iters", std::to_string(max_iters)}};
    detail::write_adapt_csvs("adapt-burgers", stem.str(), run, out_dir, man, watch);
    run.outputs = {stem.str() + "_summary.csv", stem.str() + "_mesh.csv"};
    return run;
}

inline AdaptRunResult run_adapt_poisson(const std::string& problem, int p, IndicatorKind indicator,
                                        double eta_tol, int max_iters,
                                        const std::filesystem::path& out_dir) {
    StopWatch watch;
    PoissonProblem pp = problem == "gauss" ? poisson_gaussian_problem() : poisson_sine_problem();

    AdaptRunResult run;
    {
        auto mref = share(uniform_quad_mesh(reference_n_2d, reference_n_2d, {{0, 0}, {1, 1}}, {true, true}));
        DGField uref = poisson_sip(pp, mref, p);
        auto ew = elementwise_l2_error(uref, pp.exact);
        double mean = 0.0;
        for (double e : ew) mean += e;
        run.eta_tol = eta_tol > 0.0 ? eta_tol : mean / static_cast<double>(ew.size());
        run.reference_error = l2_error(uref, pp.exact);
        run.reference_dof = uref.dof();
    }

    AdaptiveProblem prob;
    prob.solve = [&pp, p](MeshPtr m, const DGField*) { return poisson_sip(pp, m, p); };
    prob.exact = pp.exact;
    EnhanceConfig cfg;
    cfg.scaling = ScalingStrategy::min_edge();
    cfg.boundary = BoundaryPolicy::periodic;  // the filter wraps; the solve stays Dirichlet
    auto mesh0 = share(uniform_quad_mesh(8, 8, {{0, 0}, {1, 1}}, {true, true}));
    run.report = adapt(prob, mesh0, p, indicator, cfg, run.eta_tol, max_iters);

    std::ostringstream stem;
    stem << "adapt_poisson_" << problem << "_p" << p << "_" << indicator_name(indicator);
    RunManifest man;
    man.subcommand = "adapt-poisson";
    man.params = {{"problem", problem},
                  {"p", std::to_string(p)},
                  {"indicator", indicator_name(indicator)},
                  {"eta_tol", g17(run.eta_tol)},
                  {"max_iters", std::to_string(max_iters)}};
    detail::write_adapt_csvs("adapt-poisson", stem.str(), run, out_dir, man, watch);
    run.outputs = {stem.str() + "_summary.csv", stem.str() + "_mesh.csv"};
    return run;
}

}  // namespace siacmra
