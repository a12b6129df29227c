#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <vector>

#include "siacmra/field.hpp"
#include "siacmra/functions.hpp"
#include "siacmra/mesh.hpp"

namespace siacmra {

struct PoissonProblem {
    Fn2 forcing;    // laplacian(u) = f
    Fn2 dirichlet;  // boundary data g
    Fn2 exact;      // optional
    double penalty_const = 10.0;
};

struct PoissonStats {
    int iterations = 0;
    double residual = 0.0;
};

// ---------------------------------------------------------------------------
// Symmetric interior penalty discretization of laplacian(u) = f with weakly
// imposed Dirichlet data on axis-aligned rectangle meshes. Hanging faces
// from the 2:1 refinement are integrated sub-face by sub-face from the fine
// side. The system is solved by diagonally preconditioned CG.
// ---------------------------------------------------------------------------
class PoissonSolver {
 public:
    PoissonSolver(const PoissonProblem& prob, MeshPtr mesh, int p)
        : prob_(prob), mesh_(std::move(mesh)), basis_(ElemKind::quad, p), p_(p) {
        if (mesh_->kind != ElemKind::quad)
            throw std::invalid_argument("poisson_sip: quad meshes only");
        nm_ = basis_.n_modes();
        ne_ = mesh_->n_elems();
        check_rectangles();
        build_reference_tables();
    }

    DGField solve(PoissonStats* stats = nullptr) {
        const long n = static_cast<long>(ne_) * nm_;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(5 * nm_));
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

        assemble_volume(trip, rhs);
        assemble_faces(trip, rhs);

        Eigen::SparseMatrix<double> A(n, n);
        A.setFromTriplets(trip.begin(), trip.end());

        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>>
            cg;
        cg.setTolerance(1e-12);
        cg.setMaxIterations(static_cast<int>(50.0 * std::sqrt(static_cast<double>(n))));
        cg.compute(A);
        Eigen::VectorXd x = cg.solve(rhs);
        double rel = rhs.norm() > 0.0 ? (A * x - rhs).norm() / rhs.norm() : (A * x).norm();
        if (cg.info() != Eigen::Success && rel > 1e-10)
            throw solver_error("poisson_sip: CG did not converge, relative residual " + g17(rel), rel);
        if (stats) {
            stats->iterations = static_cast<int>(cg.iterations());
            stats->residual = rel;
        }

        DGField u(mesh_, p_);
        for (long i = 0; i < n; ++i) u.coef[static_cast<std::size_t>(i)] = x(i);
        return u;
    }

    // assembled matrix (tests use it for symmetry / definiteness checks)
    Eigen::SparseMatrix<double> matrix() {
        const long n = static_cast<long>(ne_) * nm_;
        std::vector<Eigen::Triplet<double>> trip;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        assemble_volume(trip, rhs);
        assemble_faces(trip, rhs);
        Eigen::SparseMatrix<double> A(n, n);
        A.setFromTriplets(trip.begin(), trip.end());
        return A;
    }

 private:
    void check_rectangles() const {
        for (int e = 0; e < ne_; ++e) {
            Vec2 ex = mesh_->vertex(e, 1) - mesh_->vertex(e, 0);
            Vec2 ey = mesh_->vertex(e, 3) - mesh_->vertex(e, 0);
            double d = mesh_->geom(e).diameter();
            if (std::abs(ex.y) > 1e-12 * d || std::abs(ey.x) > 1e-12 * d)
                throw std::invalid_argument("poisson_sip: mesh elements must be axis-aligned rectangles");
        }
    }

    void build_reference_tables() {
        mxx_ = Eigen::MatrixXd::Zero(nm_, nm_);
        myy_ = Eigen::MatrixXd::Zero(nm_, nm_);
        QuadRule2D r = tensor_rule(p_ + 1, p_ + 1);
        for (std::size_t q = 0; q < r.x.size(); ++q) {
            Eigen::VectorXd gx(nm_), gy(nm_);
            for (int m = 0; m < nm_; ++m) {
                Vec2 g = basis_.grad(m, r.x[q]);
                gx(m) = g.x;
                gy(m) = g.y;
            }
            mxx_.noalias() += r.w[q] * gx * gx.transpose();
            myy_.noalias() += r.w[q] * gy * gy.transpose();
        }
        rhs_rule_ = tensor_rule(std::max(p_ + 4, 10), std::max(p_ + 4, 10));
        rhs_phi_.resize(rhs_rule_.x.size());
        for (std::size_t q = 0; q < rhs_rule_.x.size(); ++q) {
            rhs_phi_[q].resize(nm_);
            for (int m = 0; m < nm_; ++m) rhs_phi_[q](m) = basis_.eval(m, rhs_rule_.x[q]);
        }
    }

    void assemble_volume(std::vector<Eigen::Triplet<double>>& trip, Eigen::VectorXd& rhs) const {
        for (int e = 0; e < ne_; ++e) {
            double hx = mesh_->vertex(e, 1).x - mesh_->vertex(e, 0).x;
            double hy = mesh_->vertex(e, 3).y - mesh_->vertex(e, 0).y;
            Eigen::MatrixXd K = (4.0 / (hx * hx)) * mxx_ + (4.0 / (hy * hy)) * myy_;
            long base = static_cast<long>(e) * nm_;
            for (int i = 0; i < nm_; ++i)
                for (int j = 0; j < nm_; ++j)
                    if (K(i, j) != 0.0) trip.emplace_back(base + i, base + j, K(i, j));
            // volume load: solving -lap(u) = -f
            ElemGeom g = mesh_->geom(e);
            double scale = 1.0 / g.norm_scale();
            double jac = 0.25 * hx * hy;
            for (std::size_t q = 0; q < rhs_rule_.x.size(); ++q) {
                Vec2 x = g.map(rhs_rule_.x[q]);
                double f = prob_.forcing(x.x, x.y);
                double w = rhs_rule_.w[q] * jac;
                for (int m = 0; m < nm_; ++m) rhs(base + m) += -w * f * rhs_phi_[q](m) * scale;
            }
        }
    }

    struct Trace {
        Eigen::VectorXd val, dn;
    };

    Trace element_trace(int e, Vec2 x, Vec2 n) const {
        ElemGeom g = mesh_->geom(e);
        double hx = g.v[1].x - g.v[0].x, hy = g.v[3].y - g.v[0].y;
        double scale = 1.0 / g.norm_scale();
        Vec2 r = g.inv_map(x);
        Trace t;
        t.val.resize(nm_);
        t.dn.resize(nm_);
        for (int m = 0; m < nm_; ++m) {
            t.val(m) = basis_.eval(m, r) * scale;
            Vec2 gr = basis_.grad(m, r);
            t.dn(m) = (gr.x * 2.0 / hx * n.x + gr.y * 2.0 / hy * n.y) * scale;
        }
        return t;
    }

    void add_block(std::vector<Eigen::Triplet<double>>& trip, long row_base, long col_base,
                   const Eigen::MatrixXd& B) const {
        for (int i = 0; i < nm_; ++i)
            for (int j = 0; j < nm_; ++j)
                if (B(i, j) != 0.0) trip.emplace_back(row_base + i, col_base + j, B(i, j));
    }

    void assemble_faces(std::vector<Eigen::Triplet<double>>& trip, Eigen::VectorXd& rhs) const {
        Mesh::FaceTable faces = mesh_->face_table();
        const GaussRule& g1 = gauss_legendre(p_ + 2);

        auto face_points = [&](int a, int b, std::vector<Vec2>& pts, std::vector<double>& w,
                               double& len) {
            Vec2 A = mesh_->verts[static_cast<std::size_t>(a)], B = mesh_->verts[static_cast<std::size_t>(b)];
            len = norm(B - A);
            pts.clear();
            w.clear();
            for (int q = 0; q < g1.n(); ++q) {
                double s = 0.5 * (g1.x[q] + 1.0);
                pts.push_back(A + s * (B - A));
                w.push_back(0.5 * len * g1.w[q]);
            }
        };

        auto interior = [&](int eminus, int eplus, int a, int b) {
            std::vector<Vec2> pts;
            std::vector<double> w;
            double len;
            face_points(a, b, pts, w, len);
            Vec2 n = outward_normal(eminus, pts.front(), pts.back());
            double sigma = prob_.penalty_const * (p_ + 1) * (p_ + 1) / len;
            Eigen::MatrixXd mm = Eigen::MatrixXd::Zero(nm_, nm_), mp = mm, pm = mm, pp = mm;
            for (std::size_t q = 0; q < pts.size(); ++q) {
                Trace tm = element_trace(eminus, pts[q], n);
                Trace tp = element_trace(eplus, pts[q], n);
                double wq = w[q];
                // -({grad u}.n [v] + {grad v}.n [u]) + sigma [u][v], [w] = w- - w+
                mm += wq * (-0.5 * (tm.val * tm.dn.transpose() + tm.dn * tm.val.transpose()) +
                            sigma * tm.val * tm.val.transpose());
                mp += wq * (-0.5 * tm.val * tp.dn.transpose() + 0.5 * tm.dn * tp.val.transpose() -
                            sigma * tm.val * tp.val.transpose());
                pm += wq * (0.5 * tp.val * tm.dn.transpose() - 0.5 * tp.dn * tm.val.transpose() -
                            sigma * tp.val * tm.val.transpose());
                pp += wq * (0.5 * (tp.val * tp.dn.transpose() + tp.dn * tp.val.transpose()) +
                            sigma * tp.val * tp.val.transpose());
            }
            long bm = static_cast<long>(eminus) * nm_, bp = static_cast<long>(eplus) * nm_;
            add_block(trip, bm, bm, mm);
            add_block(trip, bm, bp, mp);
            add_block(trip, bp, bm, pm);
            add_block(trip, bp, bp, pp);
        };

        for (auto& f : faces.conforming) interior(f[0], f[1], f[2], f[3]);
        for (auto& f : faces.hanging) interior(f[0], f[1], f[2], f[3]);

        for (auto& f : faces.boundary) {
            int e = f[0];
            std::vector<Vec2> pts;
            std::vector<double> w;
            double len;
            face_points(f[1], f[2], pts, w, len);
            Vec2 n = outward_normal(e, pts.front(), pts.back());
            double sigma = prob_.penalty_const * (p_ + 1) * (p_ + 1) / len;
            Eigen::MatrixXd mm = Eigen::MatrixXd::Zero(nm_, nm_);
            long base = static_cast<long>(e) * nm_;
            for (std::size_t q = 0; q < pts.size(); ++q) {
                Trace t = element_trace(e, pts[q], n);
                double wq = w[q];
                mm += wq * (-(t.val * t.dn.transpose() + t.dn * t.val.transpose()) +
                            sigma * t.val * t.val.transpose());
                double gval = prob_.dirichlet ? prob_.dirichlet(pts[q].x, pts[q].y) : 0.0;
                rhs.segment(base, nm_) += wq * gval * (-t.dn + sigma * t.val);
            }
            add_block(trip, base, base, mm);
        }
    }

    Vec2 outward_normal(int e, Vec2 fa, Vec2 fb) const {
        Vec2 mid = 0.5 * (fa + fb);
        Vec2 c = mesh_->elem_center(e);
        if (std::abs(fa.x - fb.x) < std::abs(fa.y - fb.y))  // vertical face
            return {mid.x > c.x ? 1.0 : -1.0, 0.0};
        return {0.0, mid.y > c.y ? 1.0 : -1.0};
    }

    PoissonProblem prob_;
    MeshPtr mesh_;
    ModalBasis basis_;
    int p_, nm_ = 1, ne_ = 0;
    Eigen::MatrixXd mxx_, myy_;
    QuadRule2D rhs_rule_;
    std::vector<Eigen::VectorXd> rhs_phi_;
};

inline DGField poisson_sip(const PoissonProblem& prob, MeshPtr mesh, int p,
                           PoissonStats* stats = nullptr) {
    PoissonSolver solver(prob, std::move(mesh), p);
    return solver.solve(stats);
}

// ------------------------------------------------------- manufactured cases

inline PoissonProblem poisson_sine_problem() {
    PoissonProblem prob;
    prob.exact = [](double x, double y) { return std::sin(2.0 * pi * x) * std::sin(2.0 * pi * y); };
    prob.forcing = [](double x, double y) {
        return -8.0 * pi * pi * std::sin(2.0 * pi * x) * std::sin(2.0 * pi * y);
    };
    prob.dirichlet = prob.exact;
    return prob;
}

// u = exp(-100 |x - c|); the radial derivative term of the laplacian has an
// integrable 1/r singularity that quadrature nodes on dyadic meshes never hit
inline PoissonProblem poisson_gaussian_problem() {
    PoissonProblem prob;
    prob.exact = [](double x, double y) {
        double r = std::hypot(x - 0.5, y - 0.5);
        return std::exp(-100.0 * r);
    };
    prob.forcing = [](double x, double y) {
        double r = std::max(std::hypot(x - 0.5, y - 0.5), 1e-14);
        return std::exp(-100.0 * r) * (10000.0 - 100.0 / r);
    };
    prob.dirichlet = prob.exact;
    return prob;
}

}  // namespace siacmra
