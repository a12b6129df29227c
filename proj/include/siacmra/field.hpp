#pragma once

#include <Eigen/Dense>
#include <functional>
#include <ostream>
#include <vector>

#include "siacmra/mesh.hpp"
#include "siacmra/qmf.hpp"
#include "siacmra/quadrature.hpp"

namespace siacmra {

namespace detail {

// accept either f(x) or f(x,y) callables
template <class F>
double eval_fn(F&& f, Vec2 x, int dim) {
    constexpr bool two = std::is_invocable_v<F&, double, double>;
    constexpr bool one = std::is_invocable_v<F&, double>;
    static_assert(one || two, "callable must take (double) or (double,double)");
    if constexpr (one && two) return dim == 1 ? f(x.x) : f(x.x, x.y);
    else if constexpr (two) return f(x.x, x.y);
    else return f(x.x);
}

// reference rule for element-local projections
inline void projection_rule(ElemKind kind, int p, int n_per_dir, QuadRule2D& out) {
    switch (kind) {
        case ElemKind::interval: {
            const GaussRule& g = gauss_legendre(n_per_dir);
            out.x.clear();
            out.w.clear();
            for (int i = 0; i < g.n(); ++i) {
                out.x.push_back({g.x[i], 0.0});
                out.w.push_back(g.w[i]);
            }
            break;
        }
        case ElemKind::quad:
            out = tensor_rule(n_per_dir, n_per_dir);
            break;
        case ElemKind::triangle:
            out = triangle_rule(2 * p + 6);
            break;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Piecewise polynomial field: modal coefficients per element over the
// orthonormal basis pushed onto each element. On affine elements (intervals,
// parallelograms, triangles) the physical basis is exactly orthonormal; on
// bilinear quads projections solve the small local Gram system.
// ---------------------------------------------------------------------------
class DGField {
 public:
    MeshPtr mesh;
    ModalBasis basis;
    std::vector<double> coef;  // n_elems * n_modes

    DGField() = default;
    DGField(MeshPtr m, int p)
        : mesh(std::move(m)), basis(mesh->kind, p),
          coef(static_cast<std::size_t>(mesh->n_elems()) * static_cast<std::size_t>(basis.n_modes()), 0.0) {}

    int p() const { return basis.degree(); }
    int n_modes() const { return basis.n_modes(); }
    long dof() const { return static_cast<long>(coef.size()); }

    Eigen::Map<const Eigen::VectorXd> elem_coef(int e) const {
        return {coef.data() + static_cast<std::size_t>(e) * static_cast<std::size_t>(n_modes()),
                n_modes()};
    }
    Eigen::Map<Eigen::VectorXd> elem_coef(int e) {
        return {coef.data() + static_cast<std::size_t>(e) * static_cast<std::size_t>(n_modes()),
                n_modes()};
    }

    double eval_in_element(int e, Vec2 x) const {
        ElemGeom g = mesh->geom(e);
        Vec2 r = g.inv_map(x);
        double scale = 1.0 / g.norm_scale();
        double acc = 0.0;
        auto c = elem_coef(e);
        for (int m = 0; m < n_modes(); ++m) acc += c(m) * basis.eval(m, r) * scale;
        return acc;
    }

    double eval(Vec2 x) const {
        Vec2 y = mesh->wrap(x);
        return eval_in_element(mesh->locate(y), y);
    }
    double eval(double x) const { return eval(Vec2{x, 0.0}); }
};

// Gram matrix of the pushed-forward basis on one element (identity on affine
// elements; assembled exactly for bilinear quads)
inline Eigen::MatrixXd element_gram(const ElemGeom& g, const ModalBasis& basis) {
    int n = basis.n_modes();
    if (g.affine || g.kind != ElemKind::quad) return Eigen::MatrixXd::Identity(n, n);
    int npt = basis.degree() + 4;
    QuadRule2D rule = tensor_rule(npt, npt);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    double mj = g.mean_jac();
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
        double wq = rule.w[q] * g.jac_det(rule.x[q]) / mj;
        Eigen::VectorXd phi(n);
        for (int m = 0; m < n; ++m) phi(m) = basis.eval(m, rule.x[q]);
        M.noalias() += wq * phi * phi.transpose();
    }
    return M;
}

// L2 projection; on affine elements the coefficients are plain inner
// products against the orthonormal modes
template <class F>
DGField project(MeshPtr mesh, int p, F&& f) {
    DGField u(mesh, p);
    const ModalBasis& basis = u.basis;
    int n = basis.n_modes();
    QuadRule2D rule;
    detail::projection_rule(mesh->kind, p, p + 4, rule);
    Eigen::VectorXd phi(n), b(n);
    for (int e = 0; e < mesh->n_elems(); ++e) {
        ElemGeom g = mesh->geom(e);
        double scale = 1.0 / g.norm_scale();
        b.setZero();
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            Vec2 x = g.map(rule.x[q]);
            double fv = detail::eval_fn(f, x, mesh->dim);
            if (!std::isfinite(fv))
                throw numeric_error("project: non-finite value in element " + std::to_string(e));
            double wq = rule.w[q] * std::abs(g.jac_det(rule.x[q]));
            for (int m = 0; m < n; ++m) b(m) += wq * fv * basis.eval(m, rule.x[q]) * scale;
        }
        if (g.affine || mesh->kind != ElemKind::quad) {
            u.elem_coef(e) = b;
        } else {
            Eigen::MatrixXd M = element_gram(g, basis);
            u.elem_coef(e) = M.llt().solve(b);
        }
    }
    return u;
}

// ------------------------------------------------------------- transfer down

// exact re-expansion of each parent polynomial on its children
inline DGField transfer_to_children(const DGField& u, MeshPtr fine) {
    const Mesh& coarse = *u.mesh;
    if (fine->parent_hash != coarse.hash() ||
        static_cast<int>(fine->child_map.size()) != coarse.n_elems())
        throw std::invalid_argument("transfer_to_children: mesh is not a refinement of the field's mesh");
    DGField v(fine, u.p());
    int n = u.n_modes();
    int p = u.p();
    QuadRule2D rule;
    // parent polynomial composed with the child map stays polynomial of the
    // same degree; one extra point absorbs the bilinear Jacobian
    if (coarse.kind == ElemKind::triangle)
        rule = triangle_rule(2 * p);
    else
        detail::projection_rule(coarse.kind, p, p + 2, rule);
    Eigen::VectorXd b(n);
    for (int e = 0; e < coarse.n_elems(); ++e) {
        ElemGeom gp = coarse.geom(e);
        double pscale = 1.0 / gp.norm_scale();
        auto kids = fine->child_map[static_cast<std::size_t>(e)];
        if (kids[1] < 0) {  // copied element
            v.elem_coef(kids[0]) = u.elem_coef(e);
            continue;
        }
        for (int s = 0; s < 4 && kids[static_cast<std::size_t>(s)] >= 0; ++s) {
            int c = kids[static_cast<std::size_t>(s)];
            ElemGeom gc = fine->geom(c);
            double cscale = 1.0 / gc.norm_scale();
            b.setZero();
            for (std::size_t q = 0; q < rule.x.size(); ++q) {
                Vec2 x = gc.map(rule.x[q]);
                Vec2 rp = gp.inv_map(x);
                double up = 0.0;
                auto uc = u.elem_coef(e);
                for (int m = 0; m < n; ++m) up += uc(m) * u.basis.eval(m, rp) * pscale;
                double wq = rule.w[q] * std::abs(gc.jac_det(rule.x[q]));
                for (int m = 0; m < n; ++m) b(m) += wq * up * u.basis.eval(m, rule.x[q]) * cscale;
            }
            if (gc.affine || fine->kind != ElemKind::quad)
                v.elem_coef(c) = b;
            else
                v.elem_coef(c) = element_gram(gc, u.basis).llt().solve(b);
        }
    }
    return v;
}

// --------------------------------------------------------------- error norms

namespace detail {

inline void error_rule(ElemKind kind, QuadRule2D& out) {
    switch (kind) {
        case ElemKind::interval: {
            const GaussRule& g = gauss_legendre(6);
            out.x.clear();
            out.w.clear();
            for (int i = 0; i < 6; ++i) {
                out.x.push_back({g.x[i], 0.0});
                out.w.push_back(g.w[i]);
            }
            break;
        }
        case ElemKind::quad:
            out = tensor_rule(6, 6);
            break;
        case ElemKind::triangle:
            out = triangle_rule(10);  // 6x6 collapsed points
            break;
    }
}

}  // namespace detail

template <class F>
std::vector<double> elementwise_l2_error(const DGField& u, F&& exact) {
    const Mesh& mesh = *u.mesh;
    QuadRule2D rule;
    detail::error_rule(mesh.kind, rule);
    int n = u.n_modes();
    std::vector<double> out(static_cast<std::size_t>(mesh.n_elems()));
    for (int e = 0; e < mesh.n_elems(); ++e) {
        ElemGeom g = mesh.geom(e);
        double scale = 1.0 / g.norm_scale();
        double acc = 0.0;
        auto c = u.elem_coef(e);
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            Vec2 x = g.map(rule.x[q]);
            double uh = 0.0;
            for (int m = 0; m < n; ++m) uh += c(m) * u.basis.eval(m, rule.x[q]) * scale;
            double fv = detail::eval_fn(exact, x, mesh.dim);
            double diff = fv - uh;
            acc += rule.w[q] * std::abs(g.jac_det(rule.x[q])) * diff * diff;
        }
        out[static_cast<std::size_t>(e)] = std::sqrt(acc);
    }
    return out;
}

template <class F>
double l2_error(const DGField& u, F&& exact) {
    double acc = 0.0;
    for (double e : elementwise_l2_error(u, exact)) acc += e * e;
    return std::sqrt(acc);
}

// sup norm sampled on the same node set as the L2 error rule
template <class F>
double linf_error(const DGField& u, F&& exact) {
    const Mesh& mesh = *u.mesh;
    QuadRule2D rule;
    detail::error_rule(mesh.kind, rule);
    int n = u.n_modes();
    double worst = 0.0;
    for (int e = 0; e < mesh.n_elems(); ++e) {
        ElemGeom g = mesh.geom(e);
        double scale = 1.0 / g.norm_scale();
        auto c = u.elem_coef(e);
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            Vec2 x = g.map(rule.x[q]);
            double uh = 0.0;
            for (int m = 0; m < n; ++m) uh += c(m) * u.basis.eval(m, rule.x[q]) * scale;
            double fv = detail::eval_fn(exact, x, mesh.dim);
            worst = std::max(worst, std::abs(fv - uh));
        }
    }
    return worst;
}

// squared L2 norm of the field restricted to one element
inline double elem_norm2(const DGField& u, int e) {
    ElemGeom g = u.mesh->geom(e);
    auto c = u.elem_coef(e);
    if (g.affine || u.mesh->kind != ElemKind::quad) return c.squaredNorm();
    Eigen::MatrixXd M = element_gram(g, u.basis);
    return c.dot(M * c);
}

inline void dump_field(const DGField& u, std::ostream& os) {
    os << u.mesh->hash() << ' ' << u.p() << ' ' << u.mesh->n_elems() << '\n';
    int n = u.n_modes();
    for (int e = 0; e < u.mesh->n_elems(); ++e) {
        auto c = u.elem_coef(e);
        for (int m = 0; m < n; ++m) os << (m ? " " : "") << g17(c(m));
        os << '\n';
    }
}

}  // namespace siacmra
