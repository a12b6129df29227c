#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "siacmra/field.hpp"
#include "siacmra/mesh.hpp"

namespace siacmra {

struct BurgersProblem {
    double gamma = 0.02;                      // viscosity
    std::function<double(double, double)> forcing;  // f(x,t); empty means zero
    bool forcing_time_dependent = false;
    bool periodic = true;
    double bc_left = 0.0, bc_right = 0.0;     // Dirichlet values when not periodic
    std::function<double(double)> initial;
    double steady_tol = 1e-12;
    long max_steps = 10000000;
    double cfl = 0.1;
    // coefficient of the (p+1)^2/h jump stabilization of the viscous face
    // flux; zero recovers the plain central flux, which drops one order for
    // odd degrees
    double viscous_penalty = 1.0;
};

// l1 distance between the modal coefficients of two fields on the same mesh
inline double steady_residual(const DGField& a, const DGField& b) {
    if (a.coef.size() != b.coef.size() || a.mesh->hash() != b.mesh->hash())
        throw std::invalid_argument("steady_residual: fields live on different discretizations");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.coef.size(); ++i) acc += std::abs(a.coef[i] - b.coef[i]);
    return acc;
}

struct BurgersStats {
    long steps = 0;
    double residual = 0.0;  // final per-step l1 modal change
};

namespace detail {

// five-stage fourth-order low-storage Runge-Kutta coefficients
inline constexpr double lsrk_a[5] = {
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
};
inline constexpr double lsrk_b[5] = {
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
};
inline constexpr double lsrk_c[5] = {
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Modal RKDG discretization of u_t + (u^2/2)_x = gamma u_xx + f evolved to
// steady state. Viscous terms use the first-order system with central
// averages on faces; the convective flux is local Lax-Friedrichs. Dirichlet
// faces take the boundary value for the solution trace and the interior
// trace for the auxiliary variable.
// ---------------------------------------------------------------------------
class BurgersSolver {
 public:
    BurgersSolver(const BurgersProblem& prob, MeshPtr mesh, int p)
        : prob_(prob), mesh_(std::move(mesh)), basis_(ElemKind::interval, p), p_(p) {
        if (mesh_->kind != ElemKind::interval)
            throw std::invalid_argument("burgers_steady: interval meshes only");
        if (prob_.gamma <= 0.0) throw std::invalid_argument("burgers_steady: viscosity must be positive");
        if (prob_.periodic != mesh_->periodic[0])
            throw std::invalid_argument("burgers_steady: mesh periodicity does not match the problem");
        ne_ = mesh_->n_elems();
        nm_ = p + 1;
        setup_tables();
    }

    DGField solve(const DGField* init, BurgersStats* stats = nullptr) {
        DGField u = init ? *init : project(mesh_, p_, prob_.initial);
        if (init && (init->mesh->hash() != mesh_->hash() || init->p() != p_))
            throw std::invalid_argument("burgers_steady: initial field does not match the mesh");
        std::vector<double> res(u.coef.size(), 0.0), rhs(u.coef.size(), 0.0), prev;
        double t = 0.0;
        for (long step = 0; step < prob_.max_steps; ++step) {
            prev = u.coef;
            double dt = time_step(u);
            for (int s = 0; s < 5; ++s) {
                compute_rhs(u, t + detail::lsrk_c[s] * dt, rhs);
                for (std::size_t i = 0; i < res.size(); ++i) {
                    res[i] = detail::lsrk_a[s] * res[i] + dt * rhs[i];
                    u.coef[i] += detail::lsrk_b[s] * res[i];
                }
            }
            t += dt;
            double l1 = 0.0;
            for (std::size_t i = 0; i < prev.size(); ++i) {
                double d = u.coef[i] - prev[i];
                if (!std::isfinite(u.coef[i]))
                    throw numeric_error("burgers_steady: non-finite coefficient in element " +
                                        std::to_string(i / static_cast<std::size_t>(nm_)));
                l1 += std::abs(d);
            }
            if (l1 < prob_.steady_tol) {
                if (stats) {
                    stats->steps = step + 1;
                    stats->residual = l1;
                }
                return u;
            }
        }
        double final_res = steady_residual_of(prev, u.coef);
        throw solver_error("burgers_steady: step cap reached, residual " + g17(final_res), final_res);
    }

 private:
    static double steady_residual_of(const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
        return acc;
    }

    void setup_tables() {
        nq_ = 2 * (p_ + 1);
        const GaussRule& g = gauss_legendre(nq_);
        qx_ = g.x;
        qw_ = g.w;
        phi_.assign(static_cast<std::size_t>(nq_) * nm_, 0.0);
        dphi_.assign(static_cast<std::size_t>(nq_) * nm_, 0.0);
        for (int q = 0; q < nq_; ++q)
            for (int m = 0; m < nm_; ++m) {
                phi_[static_cast<std::size_t>(q * nm_ + m)] = basis_.eval(m, {qx_[static_cast<std::size_t>(q)], 0.0});
                dphi_[static_cast<std::size_t>(q * nm_ + m)] = basis_.grad(m, {qx_[static_cast<std::size_t>(q)], 0.0}).x;
            }
        phiL_.resize(static_cast<std::size_t>(nm_));
        phiR_.resize(static_cast<std::size_t>(nm_));
        for (int m = 0; m < nm_; ++m) {
            phiL_[static_cast<std::size_t>(m)] = basis_.eval(m, {-1.0, 0.0});
            phiR_[static_cast<std::size_t>(m)] = basis_.eval(m, {1.0, 0.0});
        }
        dx_.resize(static_cast<std::size_t>(ne_));
        scale_.resize(static_cast<std::size_t>(ne_));
        for (int e = 0; e < ne_; ++e) {
            dx_[static_cast<std::size_t>(e)] = mesh_->vertex(e, 1).x - mesh_->vertex(e, 0).x;
            scale_[static_cast<std::size_t>(e)] = std::sqrt(2.0 / dx_[static_cast<std::size_t>(e)]);
        }
        umax_.assign(static_cast<std::size_t>(ne_), 1.0);
        if (prob_.forcing && !prob_.forcing_time_dependent) cache_forcing(0.0);
    }

    void cache_forcing(double t) {
        fmod_.assign(static_cast<std::size_t>(ne_) * nm_, 0.0);
        for (int e = 0; e < ne_; ++e) {
            double x0 = mesh_->vertex(e, 0).x, h = dx_[static_cast<std::size_t>(e)];
            for (int q = 0; q < nq_; ++q) {
                double x = x0 + 0.5 * (qx_[static_cast<std::size_t>(q)] + 1.0) * h;
                double fv = prob_.forcing(x, t);
                double w = 0.5 * h * qw_[static_cast<std::size_t>(q)] * fv;
                for (int m = 0; m < nm_; ++m)
                    fmod_[static_cast<std::size_t>(e * nm_ + m)] +=
                        w * phi_[static_cast<std::size_t>(q * nm_ + m)] * scale_[static_cast<std::size_t>(e)];
            }
        }
    }

    double time_step(const DGField& u) const {
        double dt = std::numeric_limits<double>::max();
        double kp = 2.0 * p_ + 1.0;  // explicit stability shrinks with degree
        for (int e = 0; e < ne_; ++e) {
            double h = dx_[static_cast<std::size_t>(e)];
            double conv = h / (kp * (umax_[static_cast<std::size_t>(e)] + 1e-12));
            double visc = h * h / (kp * kp * prob_.gamma);
            dt = std::min(dt, std::min(conv, visc));
        }
        return prob_.cfl * dt;
    }

    double trace(const DGField& u, int e, bool right) const {
        const auto& f = right ? phiR_ : phiL_;
        double acc = 0.0;
        auto c = u.elem_coef(e);
        for (int m = 0; m < nm_; ++m) acc += c(m) * f[static_cast<std::size_t>(m)] * scale_[static_cast<std::size_t>(e)];
        return acc;
    }

    void compute_rhs(const DGField& u, double t, std::vector<double>& rhs) {
        if (prob_.forcing && prob_.forcing_time_dependent) cache_forcing(t);
        const int nf = ne_ + 1;  // faces, 0 and ne_ are the domain ends
        std::vector<double> um(static_cast<std::size_t>(nf)), up(static_cast<std::size_t>(nf));
        for (int i = 0; i < nf; ++i) {
            if (i > 0) um[static_cast<std::size_t>(i)] = trace(u, i - 1, true);
            if (i < ne_) up[static_cast<std::size_t>(i)] = trace(u, i, false);
        }
        if (prob_.periodic) {
            um[0] = um[static_cast<std::size_t>(ne_)];
            up[static_cast<std::size_t>(ne_)] = up[0];
        } else {
            um[0] = prob_.bc_left;
            up[static_cast<std::size_t>(ne_)] = prob_.bc_right;
        }

        // auxiliary variable q = u_x with central solution traces
        std::vector<double> qc(static_cast<std::size_t>(ne_) * nm_, 0.0);
        for (int e = 0; e < ne_; ++e) {
            double h = dx_[static_cast<std::size_t>(e)], sc = scale_[static_cast<std::size_t>(e)];
            double ustar_l = 0.5 * (um[static_cast<std::size_t>(e)] + up[static_cast<std::size_t>(e)]);
            double ustar_r = 0.5 * (um[static_cast<std::size_t>(e + 1)] + up[static_cast<std::size_t>(e + 1)]);
            double unode = 0.0;
            umax_[static_cast<std::size_t>(e)] = std::max(std::abs(um[static_cast<std::size_t>(e + 1)]),
                                                          std::abs(up[static_cast<std::size_t>(e)]));
            for (int m = 0; m < nm_; ++m) {
                double vol = 0.0;
                for (int q = 0; q < nq_; ++q) {
                    double uq = 0.0;
                    auto c = u.elem_coef(e);
                    for (int j = 0; j < nm_; ++j) uq += c(j) * phi_[static_cast<std::size_t>(q * nm_ + j)] * sc;
                    if (m == 0) unode = std::max(unode, std::abs(uq));
                    // d/dx of the test function carries 2/h from the map
                    vol += 0.5 * h * qw_[static_cast<std::size_t>(q)] * uq *
                           dphi_[static_cast<std::size_t>(q * nm_ + m)] * (2.0 / h) * sc;
                }
                qc[static_cast<std::size_t>(e * nm_ + m)] =
                    ustar_r * phiR_[static_cast<std::size_t>(m)] * sc - ustar_l * phiL_[static_cast<std::size_t>(m)] * sc - vol;
            }
            umax_[static_cast<std::size_t>(e)] = std::max(umax_[static_cast<std::size_t>(e)], unode);
        }

        std::vector<double> qm(static_cast<std::size_t>(nf)), qp(static_cast<std::size_t>(nf));
        auto qtrace = [&](int e, bool right) {
            const auto& f = right ? phiR_ : phiL_;
            double acc = 0.0;
            for (int m = 0; m < nm_; ++m)
                acc += qc[static_cast<std::size_t>(e * nm_ + m)] * f[static_cast<std::size_t>(m)] * scale_[static_cast<std::size_t>(e)];
            return acc;
        };
        for (int i = 0; i < nf; ++i) {
            if (i > 0) qm[static_cast<std::size_t>(i)] = qtrace(i - 1, true);
            if (i < ne_) qp[static_cast<std::size_t>(i)] = qtrace(i, false);
        }
        if (prob_.periodic) {
            qm[0] = qm[static_cast<std::size_t>(ne_)];
            qp[static_cast<std::size_t>(ne_)] = qp[0];
        } else {
            qm[0] = qp[0];                                    // interior trace
            qp[static_cast<std::size_t>(ne_)] = qm[static_cast<std::size_t>(ne_)];
        }

        // face fluxes: Lax-Friedrichs for u^2/2, stabilized central for gamma q
        std::vector<double> flux(static_cast<std::size_t>(nf));
        for (int i = 0; i < nf; ++i) {
            double a = um[static_cast<std::size_t>(i)], b = up[static_cast<std::size_t>(i)];
            double lam = std::max(std::abs(a), std::abs(b));
            double conv = 0.25 * (a * a + b * b) - 0.5 * lam * (b - a);
            double hl = dx_[static_cast<std::size_t>(i > 0 ? i - 1 : (prob_.periodic ? ne_ - 1 : 0))];
            double hr = dx_[static_cast<std::size_t>(i < ne_ ? i : (prob_.periodic ? 0 : ne_ - 1))];
            double tau = prob_.viscous_penalty * (p_ + 1) * (p_ + 1) / std::min(hl, hr);
            double visc = 0.5 * (qm[static_cast<std::size_t>(i)] + qp[static_cast<std::size_t>(i)]) -
                          tau * (a - b);
            flux[static_cast<std::size_t>(i)] = conv - prob_.gamma * visc;
        }

        for (int e = 0; e < ne_; ++e) {
            double h = dx_[static_cast<std::size_t>(e)], sc = scale_[static_cast<std::size_t>(e)];
            auto c = u.elem_coef(e);
            for (int m = 0; m < nm_; ++m) {
                double vol = 0.0;
                for (int q = 0; q < nq_; ++q) {
                    double uq = 0.0, qq = 0.0;
                    for (int j = 0; j < nm_; ++j) {
                        double ph = phi_[static_cast<std::size_t>(q * nm_ + j)] * sc;
                        uq += c(j) * ph;
                        qq += qc[static_cast<std::size_t>(e * nm_ + j)] * ph;
                    }
                    double integrand = (0.5 * uq * uq - prob_.gamma * qq);
                    vol += 0.5 * h * qw_[static_cast<std::size_t>(q)] * integrand *
                           dphi_[static_cast<std::size_t>(q * nm_ + m)] * (2.0 / h) * sc;
                }
                double face = flux[static_cast<std::size_t>(e + 1)] * phiR_[static_cast<std::size_t>(m)] * sc -
                              flux[static_cast<std::size_t>(e)] * phiL_[static_cast<std::size_t>(m)] * sc;
                rhs[static_cast<std::size_t>(e * nm_ + m)] = vol - face +
                    (fmod_.empty() ? 0.0 : fmod_[static_cast<std::size_t>(e * nm_ + m)]);
            }
        }
    }

    BurgersProblem prob_;
    MeshPtr mesh_;
    ModalBasis basis_;
    int p_, ne_ = 0, nm_ = 1, nq_ = 2;
    std::vector<double> qx_, qw_, phi_, dphi_, phiL_, phiR_, dx_, scale_, fmod_;
    std::vector<double> umax_;
};

inline DGField burgers_steady(const BurgersProblem& prob, MeshPtr mesh, int p,
                              const DGField* init = nullptr, BurgersStats* stats = nullptr) {
    BurgersSolver solver(prob, std::move(mesh), p);
    return solver.solve(init, stats);
}

}  // namespace siacmra
