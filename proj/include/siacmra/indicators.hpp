#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "siacmra/enhance.hpp"
#include "siacmra/field.hpp"
#include "siacmra/functions.hpp"

namespace siacmra {

enum class IndicatorKind {
    filtered_diff,        // || u* - u_h ||
    reconstruction_diff,  // || P^{n+1} u* - u_h ||
    spectral_decay,       // scaled highest mode
    small_scale_energy,   // highest mode over sqrt(area)
    multiwavelet_detail,  // root sum of squared details of the enhanced data
};

inline const char* indicator_name(IndicatorKind k) {
    switch (k) {
        case IndicatorKind::filtered_diff: return "star";
        case IndicatorKind::reconstruction_diff: return "rec";
        case IndicatorKind::spectral_decay: return "sd";
        case IndicatorKind::small_scale_energy: return "ssed";
        case IndicatorKind::multiwavelet_detail: return "wavelet";
    }
    return "?";
}

inline IndicatorKind indicator_from_name(const std::string& s) {
    if (s == "star") return IndicatorKind::filtered_diff;
    if (s == "rec") return IndicatorKind::reconstruction_diff;
    if (s == "sd") return IndicatorKind::spectral_decay;
    if (s == "ssed") return IndicatorKind::small_scale_energy;
    if (s == "wavelet") return IndicatorKind::multiwavelet_detail;
    throw std::invalid_argument("unknown indicator: " + s);
}

// ---------------------------------------------------------------------------
// Per-element indicator evaluation over one field. Filter-based kinds share
// a single enhancement operator so the refined geometry and scalings are
// built once per field.
// ---------------------------------------------------------------------------
class IndicatorEvaluator {
 public:
    IndicatorEvaluator(const DGField& u, IndicatorKind kind, const EnhanceConfig& cfg)
        : u_(&u), kind_(kind) {
        if (kind == IndicatorKind::spectral_decay && u.p() == 0)
            throw std::invalid_argument("spectral decay indicator needs p > 0");
        bool needs_filter = kind == IndicatorKind::filtered_diff ||
                            kind == IndicatorKind::reconstruction_diff ||
                            kind == IndicatorKind::multiwavelet_detail;
        if (needs_filter) op_ = std::make_unique<EnhanceOperator>(u, cfg);
    }

    double eta(int e) const {
        switch (kind_) {
            case IndicatorKind::filtered_diff: return eta_star(e);
            case IndicatorKind::reconstruction_diff: return eta_rec(e);
            case IndicatorKind::spectral_decay: return eta_sd(e);
            case IndicatorKind::small_scale_energy: return eta_ssed(e);
            case IndicatorKind::multiwavelet_detail: return eta_w(e);
        }
        return 0.0;
    }

    std::vector<double> all() const {
        std::vector<double> out(static_cast<std::size_t>(u_->mesh->n_elems()));
        for (int e = 0; e < u_->mesh->n_elems(); ++e) out[static_cast<std::size_t>(e)] = eta(e);
        return out;
    }

    const EnhanceOperator* op() const { return op_.get(); }

 private:
    double eta_star(int e) const {
        if (op_->skipped(e)) return 0.0;
        const Mesh& mesh = *u_->mesh;
        ElemGeom g = mesh.geom(e);
        QuadRule2D rule;
        detail::error_rule(mesh.kind, rule);
        if (mesh.dim == 1) {
            // the filtered field is only piecewise smooth; apply the error
            // rule between its breakpoints so the integral is exact
            std::vector<double> cuts = op_->filtered_breakpoints(g.v[0].x, g.v[1].x);
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
                for (std::size_t q = 0; q < rule.x.size(); ++q) {
                    double x = cuts[i] + 0.5 * (rule.x[q].x + 1.0) * (cuts[i + 1] - cuts[i]);
                    double diff = op_->filtered_value({x, 0.0}) - u_->eval_in_element(e, {x, 0.0});
                    acc += 0.5 * (cuts[i + 1] - cuts[i]) * rule.w[q] * diff * diff;
                }
            return std::sqrt(acc);
        }
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            Vec2 x = g.map(rule.x[q]);
            double diff = op_->filtered_value(x) - u_->eval_in_element(e, x);
            acc += rule.w[q] * std::abs(g.jac_det(rule.x[q])) * diff * diff;
        }
        return std::sqrt(acc);
    }

    double eta_rec(int e) const {
        auto enhanced = op_->element_children(e);
        auto kids = op_->children_of(e);
        const DGField& tr = op_->transferred();
        double acc = 0.0;
        for (std::size_t s = 0; s < enhanced.size(); ++s) {
            int c = kids[s];
            Eigen::VectorXd diff = enhanced[s] - tr.elem_coef(c);
            ElemGeom g = op_->fine_mesh()->geom(c);
            if (g.affine || op_->fine_mesh()->kind != ElemKind::quad)
                acc += diff.squaredNorm();
            else
                acc += diff.dot(element_gram(g, u_->basis) * diff);
        }
        return std::sqrt(acc);
    }

    double highest_mode_norm(int e) const {
        int last = u_->n_modes() - 1;
        double c = u_->elem_coef(e)(last);
        ElemGeom g = u_->mesh->geom(e);
        if (g.affine || u_->mesh->kind != ElemKind::quad) return std::abs(c);
        Eigen::MatrixXd M = element_gram(g, u_->basis);
        return std::abs(c) * std::sqrt(M(last, last));
    }

    double eta_sd(int e) const {
        double num = highest_mode_norm(e);
        double den = std::sqrt(elem_norm2(*u_, e));
        return den == 0.0 ? 0.0 : num / den;
    }

    double eta_ssed(int e) const {
        return highest_mode_norm(e) / std::sqrt(u_->mesh->elem_area(e));
    }

    double eta_w(int e) const {
        if (u_->mesh->kind == ElemKind::triangle)
            throw std::invalid_argument("multiwavelet indicator is unsupported on triangles");
        auto enhanced = op_->element_children(e);
        if (u_->mesh->dim == 1) {
            Decomp1D d = details_from_enhanced_1d(u_->p(), enhanced);
            return d.d.norm();
        }
        Decomp2D d = details_from_enhanced_2d(u_->p(), enhanced);
        return std::sqrt(d.da.squaredNorm() + d.db.squaredNorm() + d.dg.squaredNorm());
    }

    const DGField* u_;
    IndicatorKind kind_;
    std::unique_ptr<EnhanceOperator> op_;
};

// spec-shaped convenience wrappers
inline double eta_star(const DGField& u, const EnhanceConfig& cfg, int e) {
    return IndicatorEvaluator(u, IndicatorKind::filtered_diff, cfg).eta(e);
}
inline double eta_rec(const DGField& u, const EnhanceConfig& cfg, int e) {
    return IndicatorEvaluator(u, IndicatorKind::reconstruction_diff, cfg).eta(e);
}
inline double eta_sd(const DGField& u, int e) {
    return IndicatorEvaluator(u, IndicatorKind::spectral_decay, EnhanceConfig{}).eta(e);
}
inline double eta_ssed(const DGField& u, int e) {
    return IndicatorEvaluator(u, IndicatorKind::small_scale_energy, EnhanceConfig{}).eta(e);
}
inline double eta_w(const DGField& u, const EnhanceConfig& cfg, int e) {
    return IndicatorEvaluator(u, IndicatorKind::multiwavelet_detail, cfg).eta(e);
}

inline double eta_global(const std::vector<double>& eta_elem) {
    double acc = 0.0;
    for (double e : eta_elem) acc += e * e;
    return std::sqrt(acc);
}

// empty when the true error vanishes (exact approximation)
inline std::optional<double> effectivity(double eta, double e_h) {
    if (e_h == 0.0) return std::nullopt;
    return eta / e_h;
}

// ------------------------------------------------------------ adaptation loop

struct AdaptiveProblem {
    // solve the discrete problem on a mesh; `init` carries the transferred
    // previous solution and is null on the first iteration
    std::function<DGField(MeshPtr, const DGField*)> solve;
    Fn2 exact;  // empty disables error tracking
};

struct AdaptIteration {
    MeshPtr mesh;
    long dof = 0;
    std::vector<double> eta_elem;
    double eta = 0.0;
    double error_l2 = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> ieff;
    int marked = 0;
};

struct AdaptReport {
    std::vector<AdaptIteration> iterations;
    bool truncated = false;
    const AdaptIteration& final() const { return iterations.back(); }
};

// solve / estimate / mark / refine until every element indicator drops below
// eta_tol or max_iters refinements have been spent; the solution is carried
// to each new mesh as the next initialization
inline AdaptReport adapt(const AdaptiveProblem& prob, MeshPtr mesh0, int p, IndicatorKind kind,
                         const EnhanceConfig& cfg, double eta_tol, int max_iters,
                         DGField* final_field = nullptr) {
    AdaptReport report;
    MeshPtr mesh = std::move(mesh0);
    DGField carried;
    bool have_carried = false;
    for (int it = 0;; ++it) {
        DGField u;
        try {
            u = prob.solve(mesh, have_carried ? &carried : nullptr);
        } catch (const solver_error& e) {
            throw solver_error("adapt iteration " + std::to_string(it) + ": " + e.what(), e.residual);
        }
        IndicatorEvaluator ind(u, kind, cfg);
        AdaptIteration rec;
        rec.mesh = mesh;
        rec.dof = u.dof();
        rec.eta_elem = ind.all();
        rec.eta = eta_global(rec.eta_elem);
        if (prob.exact) {
            rec.error_l2 = l2_error(u, prob.exact);
            rec.ieff = effectivity(rec.eta, rec.error_l2);
        }
        std::vector<int> marks;
        for (int e = 0; e < mesh->n_elems(); ++e)
            if (rec.eta_elem[static_cast<std::size_t>(e)] >= eta_tol) marks.push_back(e);
        rec.marked = static_cast<int>(marks.size());
        report.iterations.push_back(std::move(rec));
        if (marks.empty() || it == max_iters) {
            report.truncated = !marks.empty();
            if (final_field) *final_field = std::move(u);
            return report;
        }
        MeshPtr fine = share(refine_marked(*mesh, marks));
        carried = transfer_to_children(u, fine);
        have_carried = true;
        mesh = fine;
    }
}

}  // namespace siacmra
