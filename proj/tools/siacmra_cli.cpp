// Experiment driver: reproduces the enhancement, scaling, and adaptivity
// studies as CSV files with a JSON manifest per invocation.

#include <CLI11.hpp>

#include <atomic>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "siacmra/experiment.hpp"

namespace {

// run independent experiment cells on up to `workers` threads; returns the
// process exit code (0 ok, 2 validation failure, 3 numerical failure)
int run_cells(const std::vector<std::function<void()>>& cells, int workers) {
    std::atomic<std::size_t> next{0};
    std::atomic<int> invalid{0}, numeric{0};
    std::mutex io;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                cells[i]();
            } catch (const std::invalid_argument& e) {
                std::lock_guard<std::mutex> lock(io);
                std::cerr << "error: " << e.what() << "\n";
                invalid.fetch_add(1);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(io);
                std::cerr << "error: " << e.what() << "\n";
                numeric.fetch_add(1);
            }
        }
    };
    int nworkers = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < nworkers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (invalid.load() > 0) return 2;
    if (numeric.load() > 0) return 3;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SIAC-MRA enhancement and adaptivity experiments"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    int workers = 1;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--workers", workers, "parallel experiment cells")->capture_default_str();

    // kernel-check
    auto* kc = app.add_subcommand("kernel-check", "kernel coefficients and numeric moments");
    std::vector<int> kc_p{1};
    int kc_ell = 1, kc_r = -1;
    kc->add_option("--p", kc_p, "data polynomial degree(s)");
    kc->add_option("--ell", kc_ell, "B-spline order")->capture_default_str();
    kc->add_option("--r", kc_r, "reproduction degree (-1 derives 2p)");

    // enhance-study
    auto* es = app.add_subcommand("enhance-study", "iterated enhancement error table");
    std::string es_function = "sine", es_mesh = "uniform-quad", es_scaling = "const";
    std::vector<int> es_p{1};
    std::vector<double> es_k{1.0};
    int es_n = 16, es_steps = 2;
    double es_perturb = 0.0, es_ratio = 1.0, es_theta = 0.25 * siacmra::pi;
    std::uint64_t es_seed = 1;
    es->add_option("--function", es_function, "sine | gauss | tanh")->capture_default_str();
    es->add_option("--k", es_k, "frequency / sharpness factor(s)");
    es->add_option("--p", es_p, "polynomial degree(s)");
    es->add_option("--mesh", es_mesh, "interval | uniform-quad | perturbed-quad | delaunay | graded")
        ->capture_default_str();
    es->add_option("--n", es_n, "elements per direction")->capture_default_str();
    es->add_option("--perturb", es_perturb, "node perturbation fraction in [0,1)")->capture_default_str();
    es->add_option("--seed", es_seed, "perturbation seed")->capture_default_str();
    es->add_option("--ratio", es_ratio, "graded mesh size ratio")->capture_default_str();
    es->add_option("--scaling", es_scaling, "const | max | min | adaptive")->capture_default_str();
    es->add_option("--theta", es_theta, "line filter orientation (radians)")->capture_default_str();
    es->add_option("--steps", es_steps, "enhancement steps")->capture_default_str();

    // scaling-study
    auto* ss = app.add_subcommand("scaling-study", "constant max-edge vs adaptive scaling");
    std::string ss_mesh = "graded";
    std::vector<int> ss_p{1};
    int ss_n = 16, ss_steps = 2;
    double ss_perturb = 0.0, ss_ratio = 100.0;
    std::uint64_t ss_seed = 1;
    ss->add_option("--mesh", ss_mesh)->capture_default_str();
    ss->add_option("--n", ss_n)->capture_default_str();
    ss->add_option("--perturb", ss_perturb)->capture_default_str();
    ss->add_option("--seed", ss_seed)->capture_default_str();
    ss->add_option("--ratio", ss_ratio)->capture_default_str();
    ss->add_option("--p", ss_p, "polynomial degree(s)");
    ss->add_option("--steps", ss_steps)->capture_default_str();

    // adapt-burgers
    auto* ab = app.add_subcommand("adapt-burgers", "adaptive 1D viscous Burgers runs");
    std::string ab_problem = "tanh", ab_indicator = "rec";
    std::vector<int> ab_p{1};
    double ab_eta = -1.0;
    int ab_iters = 7;
    ab->add_option("--problem", ab_problem, "tanh | sine")->capture_default_str();
    ab->add_option("--p", ab_p, "polynomial degree(s)");
    ab->add_option("--indicator", ab_indicator, "star | rec | sd | ssed | wavelet")->capture_default_str();
    ab->add_option("--eta-tol", ab_eta, "local tolerance (<=0 derives it from the uniform reference)")
        ->capture_default_str();
    ab->add_option("--max-iters", ab_iters)->capture_default_str();

    // adapt-poisson
    auto* ap = app.add_subcommand("adapt-poisson", "adaptive 2D Poisson runs");
    std::string ap_problem = "gauss", ap_indicator = "wavelet";
    std::vector<int> ap_p{2};
    double ap_eta = -1.0;
    int ap_iters = 4;
    ap->add_option("--problem", ap_problem, "sine | gauss")->capture_default_str();
    ap->add_option("--p", ap_p, "polynomial degree(s)");
    ap->add_option("--indicator", ap_indicator, "star | rec | sd | ssed | wavelet")->capture_default_str();
    ap->add_option("--eta-tol", ap_eta, "local tolerance (<=0 derives it from the uniform reference)")
        ->capture_default_str();
    ap->add_option("--max-iters", ap_iters)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    std::vector<std::function<void()>> cells;
    try {
        if (kc->parsed()) {
            for (int p : kc_p)
                cells.push_back([=] { siacmra::run_kernel_check(p, kc_ell, kc_r < 0 ? 2 * p : kc_r, out_dir); });
        } else if (es->parsed()) {
            siacmra::MeshSpec spec{es_mesh, es_n, es_perturb, es_seed, es_ratio};
            for (int p : es_p)
                for (double k : es_k)
                    cells.push_back([=] {
                        siacmra::run_enhance_study(es_function, k, p, spec, es_scaling, es_steps,
                                                   es_theta, out_dir);
                    });
        } else if (ss->parsed()) {
            siacmra::MeshSpec spec{ss_mesh, ss_n, ss_perturb, ss_seed, ss_ratio};
            for (int p : ss_p)
                cells.push_back([=] { siacmra::run_scaling_study(spec, p, ss_steps, out_dir); });
        } else if (ab->parsed()) {
            siacmra::IndicatorKind kind = siacmra::indicator_from_name(ab_indicator);
            for (int p : ab_p)
                cells.push_back([=] { siacmra::run_adapt_burgers(ab_problem, p, kind, ab_eta, ab_iters, out_dir); });
        } else if (ap->parsed()) {
            siacmra::IndicatorKind kind = siacmra::indicator_from_name(ap_indicator);
            for (int p : ap_p)
                cells.push_back([=] { siacmra::run_adapt_poisson(ap_problem, p, kind, ap_eta, ap_iters, out_dir); });
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    return run_cells(cells, workers);
}
