#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "siacmra/field.hpp"
#include "siacmra/qmf.hpp"
#include "siacmra/siac.hpp"

namespace siacmra {

enum class BoundaryPolicy { periodic, skip_overlap };

struct EnhanceConfig {
    int ell = 1;
    int r = -1;  // -1 derives 2p from the field degree
    ScalingStrategy scaling{};
    double theta = 0.25 * pi;
    BoundaryPolicy boundary = BoundaryPolicy::periodic;
};

// ---------------------------------------------------------------------------
// One enhancement step: filter the coarse field and project the filtered
// values onto the children of every element. Elements whose kernel footprint
// would leave a non-periodic domain are not filtered; their children copy
// the parent polynomial instead.
// ---------------------------------------------------------------------------
class EnhanceOperator {
 public:
    EnhanceOperator(const DGField& u, const EnhanceConfig& cfg)
        : u_(&u), cfg_(cfg),
          kernel_(make_siac_kernel(cfg.ell, cfg.r >= 0 ? cfg.r : 2 * u.p())),
          scaling_(u.mesh, cfg.scaling) {
        const Mesh& mesh = *u.mesh;
        bool fully_periodic = mesh.periodic[0] && (mesh.dim == 1 || mesh.periodic[1]);
        if (cfg_.boundary == BoundaryPolicy::periodic && !fully_periodic)
            throw std::invalid_argument("enhance: periodic boundary policy needs a periodic mesh");
        if (cfg_.boundary == BoundaryPolicy::skip_overlap && fully_periodic)
            throw std::invalid_argument("enhance: skip-overlap policy applies to non-periodic meshes");
        fine_ = share(refine_all(mesh));
        transferred_ = transfer_to_children(u, fine_);
        build_child_rule();
        if (cfg_.boundary == BoundaryPolicy::skip_overlap) mark_skipped();
    }

    const MeshPtr& fine_mesh() const { return fine_; }
    const SiacKernel& kernel() const { return kernel_; }
    const DGField& transferred() const { return transferred_; }
    double scaling_at(Vec2 x) const { return scaling_.at(x); }

    // filtered solution value at one point
    double filtered_value(Vec2 x) const {
        double H = scaling_.at(x);
        return u_->mesh->dim == 1 ? filter_point_1d(*u_, kernel_, x.x, H)
                                  : filter_point_line(*u_, kernel_, x, cfg_.theta, H);
    }

    bool skipped(int e) const {
        return !skip_.empty() && skip_[static_cast<std::size_t>(e)] != 0;
    }

    std::array<int, 4> children_of(int e) const { return fine_->child_map[static_cast<std::size_t>(e)]; }

    // enhanced child coefficient vectors for one coarse element, in the
    // canonical child order
    std::vector<Eigen::VectorXd> element_children(int e) const {
        auto kids = children_of(e);
        int nc = u_->mesh->dim == 1 ? 2 : 4;
        std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(nc));
        if (skipped(e)) {
            for (int s = 0; s < nc; ++s) out[static_cast<std::size_t>(s)] = transferred_.elem_coef(kids[static_cast<std::size_t>(s)]);
            return out;
        }
        for (int s = 0; s < nc; ++s)
            out[static_cast<std::size_t>(s)] = u_->mesh->dim == 1 ? project_child_1d(kids[static_cast<std::size_t>(s)])
                                                                  : project_child_2d(kids[static_cast<std::size_t>(s)]);
        return out;
    }

    DGField run() const {
        DGField v(fine_, u_->p());
        for (int e = 0; e < u_->mesh->n_elems(); ++e) {
            auto kids = children_of(e);
            auto vals = element_children(e);
            for (std::size_t s = 0; s < vals.size(); ++s) v.elem_coef(kids[s]) = vals[s];
        }
        return v;
    }

    // 1D only: points in (xa, xb) where the filtered field x -> u*(x) loses
    // smoothness, one per (kernel breakpoint, element boundary) pair
    std::vector<double> filtered_breakpoints(double xa, double xb) const {
        const Mesh& mesh = *u_->mesh;
        double h_ref = scaling_.at(Vec2{0.5 * (xa + xb), 0.0});
        double tol = 1e-12 * mesh.domain_scale();
        std::vector<double> cuts{xa, xb};
        double period = mesh.box.len(0);
        std::vector<double> bp = mesh.breakpoints();
        long k0 = 0, k1 = 0;
        if (mesh.periodic[0]) {
            double reach = h_ref * kernel_.support_radius();
            k0 = static_cast<long>(std::floor((xa - reach - mesh.box.lo.x) / period)) - 1;
            k1 = static_cast<long>(std::ceil((xb + reach - mesh.box.lo.x) / period)) + 1;
        }
        for (double kb : kernel_.breakpoints())
            for (long img = k0; img <= k1; ++img)
                for (double b : bp) {
                    double xcut = b + img * period - h_ref * kb;
                    if (xcut > xa + tol && xcut < xb - tol) cuts.push_back(xcut);
                }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end(),
                               [&](double a, double b) { return std::abs(a - b) < tol; }),
                   cuts.end());
        return cuts;
    }

 private:
    // exact projection of the filtered data onto one child interval: the
    // filtered function is piecewise polynomial with breaks wherever a kernel
    // breakpoint meets an element boundary, so cut there and use exact Gauss
    Eigen::VectorXd project_child_1d(int c) const {
        ElemGeom g = fine_->geom(c);
        double xa = g.v[0].x, xb = g.v[1].x;
        double scale = 1.0 / g.norm_scale();
        int p = u_->p();
        double h_ref = scaling_.at(Vec2{0.5 * (xa + xb), 0.0});
        std::vector<double> cuts = filtered_breakpoints(xa, xb);

        int nq = (2 * p + kernel_.order() + 1) / 2 + 2;
        const GaussRule& gr = gauss_legendre(nq);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            for (int q = 0; q < gr.n(); ++q) {
                double x = cuts[i] + 0.5 * (gr.x[q] + 1.0) * (cuts[i + 1] - cuts[i]);
                double H = scaling_.position_dependent() ? scaling_.at(Vec2{x, 0.0}) : h_ref;
                double star = filter_point_1d(*u_, kernel_, x, H);
                double w = 0.5 * (cuts[i + 1] - cuts[i]) * gr.w[q];
                double xi = 2.0 * (x - xa) / (xb - xa) - 1.0;
                for (int m = 0; m <= p; ++m) b(m) += w * star * u_->basis.eval(m, {xi, 0.0}) * scale;
            }
        }
        return b;
    }

    Eigen::VectorXd project_child_2d(int c) const {
        ElemGeom g = fine_->geom(c);
        double scale = 1.0 / g.norm_scale();
        int n = u_->n_modes();
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        for (std::size_t q = 0; q < child_rule_.x.size(); ++q) {
            Vec2 x = g.map(child_rule_.x[q]);
            double H = scaling_.at(x);
            double star = filter_point_line(*u_, kernel_, x, cfg_.theta, H);
            double w = child_rule_.w[q] * std::abs(g.jac_det(child_rule_.x[q]));
            for (int m = 0; m < n; ++m) b(m) += w * star * u_->basis.eval(m, child_rule_.x[q]) * scale;
        }
        if (!g.affine && fine_->kind == ElemKind::quad)
            return element_gram(g, u_->basis).llt().solve(b).eval();
        return b;
    }

    void build_child_rule() {
        int p = u_->p();
        if (u_->mesh->dim == 1) {
            detail::projection_rule(ElemKind::interval, p, p + 4, child_rule_);
        } else if (u_->mesh->kind == ElemKind::quad) {
            child_rule_ = tensor_rule(p + 3, p + 3);
        } else {
            child_rule_ = triangle_rule(2 * p + 4);
        }
    }

    // conservative footprint test: an element is filtered only if a kernel
    // support anchored anywhere in the element stays inside the domain. The
    // scaling bound comes from the child quadrature nodes; the anchor bound
    // from the element box, since projection points can approach its ends.
    void mark_skipped() {
        const Mesh& mesh = *u_->mesh;
        skip_.assign(static_cast<std::size_t>(mesh.n_elems()), 0);
        double tol = 1e-12 * mesh.domain_scale();
        Vec2 dir{std::cos(cfg_.theta), std::sin(cfg_.theta)};
        for (int e = 0; e < mesh.n_elems(); ++e) {
            auto kids = children_of(e);
            double hmax = 0.0;
            Vec2 blo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
            Vec2 bhi{-blo.x, -blo.y};
            int nc = mesh.dim == 1 ? 2 : 4;
            for (int s = 0; s < nc; ++s) {
                ElemGeom g = fine_->geom(kids[static_cast<std::size_t>(s)]);
                for (const Vec2& r : child_rule_.x) hmax = std::max(hmax, scaling_.at(g.map(r)));
                for (int v = 0; v < kind_nverts(mesh.kind); ++v) {
                    Vec2 q = g.v[static_cast<std::size_t>(v)];
                    blo = {std::min(blo.x, q.x), std::min(blo.y, q.y)};
                    bhi = {std::max(bhi.x, q.x), std::max(bhi.y, q.y)};
                }
            }
            double a = hmax * kernel_.support_radius();
            double rx = mesh.dim == 1 ? a : a * std::abs(dir.x);
            double ry = mesh.dim == 1 ? 0.0 : a * std::abs(dir.y);
            bool exits = false;
            if (!mesh.periodic[0] &&
                (blo.x - rx < mesh.box.lo.x + tol || bhi.x + rx > mesh.box.hi.x - tol))
                exits = true;
            if (mesh.dim == 2 && !mesh.periodic[1] &&
                (blo.y - ry < mesh.box.lo.y + tol || bhi.y + ry > mesh.box.hi.y - tol))
                exits = true;
            skip_[static_cast<std::size_t>(e)] = exits ? 1 : 0;
        }
    }

    const DGField* u_;
    EnhanceConfig cfg_;
    SiacKernel kernel_;
    BoundScaling scaling_;
    MeshPtr fine_;
    DGField transferred_;
    QuadRule2D child_rule_;
    std::vector<char> skip_;
};

inline DGField enhance(const DGField& u, const EnhanceConfig& cfg) {
    return EnhanceOperator(u, cfg).run();
}

// ------------------------------------------------------- iterated enhancement

struct EnhanceStep {
    int step;
    int n_elems;
    long dof;
    double ppw;
    double l2;
    double linf;
};

struct EnhanceSequence {
    std::vector<EnhanceStep> steps;
    DGField final_field;
};

// repeated enhancement with per-step errors; ppw follows the study
// convention n_dir * (p+1) * 2^step / k with n_dir from the initial mesh
template <class Exact>
EnhanceSequence enhance_iterated(const DGField& u0, const EnhanceConfig& cfg, int n_steps,
                                 Exact&& exact, double k_freq = 1.0) {
    if (n_steps < 0) throw std::invalid_argument("enhance_iterated: negative step count");
    EnhanceSequence seq;
    double n_dir = u0.mesh->dim == 1
                       ? u0.mesh->n_elems()
                       : std::sqrt(static_cast<double>(u0.mesh->n_elems()) /
                                   (u0.mesh->kind == ElemKind::triangle ? 2.0 : 1.0));
    double kf = k_freq > 0.0 ? k_freq : 1.0;
    DGField cur = u0;
    for (int s = 0; s <= n_steps; ++s) {
        EnhanceStep rec;
        rec.step = s;
        rec.n_elems = cur.mesh->n_elems();
        rec.dof = cur.dof();
        rec.ppw = n_dir * (cur.p() + 1) * std::pow(2.0, s) / kf;
        rec.l2 = l2_error(cur, exact);
        rec.linf = linf_error(cur, exact);
        seq.steps.push_back(rec);
        if (s < n_steps) cur = enhance(cur, cfg);
    }
    seq.final_field = std::move(cur);
    return seq;
}

// ------------------------------------------------- details of enhanced data

// local multiwavelet details of one parent element from its enhanced child
// coefficients; the children are already expressed in per-child orthonormal
// bases, so the filters apply directly
inline Decomp1D details_from_enhanced_1d(int p, const std::vector<Eigen::VectorXd>& children) {
    if (children.size() != 2)
        throw std::invalid_argument("details_from_enhanced_1d: expected two children");
    return decompose_1d(p, children[0], children[1]);
}

inline Decomp2D details_from_enhanced_2d(int p, const std::vector<Eigen::VectorXd>& children) {
    if (children.size() != 4)
        throw std::invalid_argument("details_from_enhanced_2d: expected four children");
    return decompose_2d(p, {children[0], children[1], children[2], children[3]});
}

}  // namespace siacmra
