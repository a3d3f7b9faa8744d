/*
 Copyright 2026 The Multilift Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "multilift/ilqr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <limits>

#include "multilift/errors.hpp"

namespace multilift {

using ad::D1;
using ad::D2;

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIterations: return "max_iterations";
        case SolveStatus::LineSearchStalled: return "line_search_stalled";
    }
    return "unknown";
}

double PmpResidual::max() const {
    return std::max(std::max(dynamics, costate), std::max(stationarity, boundary));
}

std::vector<Vec> rollout(const StageModel& m, const std::vector<Vec>& U) {
    std::vector<Vec> X(U.size() + 1);
    X[0] = m.initial_state();
    for (size_t k = 0; k < U.size(); ++k) X[k + 1] = m.dynamics(static_cast<int>(k), X[k], U[k], m.params(k));
    return X;
}

double total_cost(const StageModel& m, const std::vector<Vec>& X, const std::vector<Vec>& U) {
    double j = 0.0;
    for (size_t k = 0; k < U.size(); ++k) j += m.checked_running_cost(static_cast<int>(k), X[k], U[k]);
    return j + m.checked_terminal_cost(X.back());
}

namespace {

Vec terminal_gradient(const StageModel& m, const Vec& x) {
    const int nx = m.state_dim();
    Vec p = m.params(m.horizon());
    VecXT<D1> z(nx), pd(p.size());
    for (int i = 0; i < nx; ++i) z(i) = D1(x(i));
    for (Eigen::Index i = 0; i < p.size(); ++i) pd(i) = D1(p(i));
    Vec g(nx);
    for (int i = 0; i < nx; ++i) {
        z(i).d = 1.0;
        g(i) = m.terminal_cost(z, pd).d;
        z(i).d = 0.0;
    }
    return g;
}

// Cost of an interior trajectory, or +inf when any barrier argument leaves the interior.
double try_cost(const StageModel& m, const std::vector<Vec>& X, const std::vector<Vec>& U) {
    const int n = m.horizon();
    for (int k = 0; k < n; ++k) {
        if (!X[k].allFinite() || !U[k].allFinite()) return std::numeric_limits<double>::infinity();
        if (m.violated_constraint(k, X[k], &U[k])) return std::numeric_limits<double>::infinity();
    }
    if (!X[n].allFinite() || m.violated_constraint(n, X[n], nullptr)) return std::numeric_limits<double>::infinity();
    double j = total_cost(m, X, U);
    return std::isfinite(j) ? j : std::numeric_limits<double>::infinity();
}

struct Linearization {
    std::vector<StageDerivatives> stages;
    TerminalDerivatives terminal;
};

Linearization linearize(const StageModel& m, const std::vector<Vec>& X, const std::vector<Vec>& U) {
    const int n = m.horizon();
    Linearization lin;
    lin.stages.resize(n);
    for (int k = 0; k < n; ++k) lin.stages[k] = stage_derivatives(m, k, X[k], U[k], m.params(k));
    lin.terminal = terminal_derivatives(m, X[n], m.params(n));
    return lin;
}

std::vector<Vec> sweep_costates(const Linearization& lin) {
    const size_t n = lin.stages.size();
    std::vector<Vec> lam(n);
    Vec next = lin.terminal.lx;
    for (size_t k = n; k-- > 0;) {
        lam[k] = next;
        const auto& s = lin.stages[k];
        next = s.lx + s.fx.transpose() * next;
    }
    return lam;
}

double stationarity(const Linearization& lin, const std::vector<Vec>& lam) {
    double r = 0.0;
    for (size_t k = 0; k < lin.stages.size(); ++k) {
        const auto& s = lin.stages[k];
        r = std::max(r, (s.lu + s.fu.transpose() * lam[k]).cwiseAbs().maxCoeff());
    }
    return r;
}

}  // namespace

std::vector<Vec> costates(const StageModel& m, const std::vector<Vec>& X, const std::vector<Vec>& U) {
    const int n = m.horizon();
    std::vector<Vec> lam(n);
    Vec next = terminal_gradient(m, X[n]);
    for (int k = n - 1; k >= 0; --k) {
        lam[k] = next;
        Mat fx, fu;
        Vec lx, lu;
        Vec p = m.params(k);
        dynamics_jacobians(m, k, X[k], U[k], p, fx, fu);
        cost_gradient(m, k, X[k], U[k], p, lx, lu);
        next = lx + fx.transpose() * next;
    }
    return lam;
}

OcpSolution solve_ocp(const StageModel& m, const std::vector<Vec>* warm_start, const SolverOptions& opt) {
    const int n = m.horizon();
    const int nu = m.control_dim();
    if (!m.initial_state().allFinite()) throw InfeasibleStart("non-finite initial state");

    OcpSolution sol;
    double cost = std::numeric_limits<double>::infinity();
    if (warm_start && static_cast<int>(warm_start->size()) == n) {
        sol.U = *warm_start;
        sol.X = rollout(m, sol.U);
        cost = try_cost(m, sol.X, sol.U);
        sol.diagnostics.warm_started = std::isfinite(cost);
    }
    if (!std::isfinite(cost)) {
        sol.U = m.initial_controls();
        if (static_cast<int>(sol.U.size()) != n) throw InfeasibleStart("initial controls have wrong length");
        sol.X = rollout(m, sol.U);
        cost = try_cost(m, sol.X, sol.U);
        if (!std::isfinite(cost)) {
            std::string why = "initializer rollout leaves the barrier interior";
            for (int k = 0; k <= n; ++k) {
                auto v = m.violated_constraint(k, sol.X[k], k < n ? &sol.U[k] : nullptr);
                if (v) {
                    why += ": " + *v + " at step " + std::to_string(k);
                    break;
                }
            }
            throw InfeasibleStart(why);
        }
    }
    sol.diagnostics.initial_cost = cost;

    double mu = opt.mu_init;
    std::vector<Mat> kfb(n);
    std::vector<Vec> kff(n);
    Linearization lin;
    std::vector<Vec> lam;
    int it = 0;
    bool need_lin = true;
    for (;; ++it) {
        if (need_lin) {
            lin = linearize(m, sol.X, sol.U);
            lam = sweep_costates(lin);
            need_lin = false;
        }
        double res = stationarity(lin, lam);
        sol.diagnostics.max_pmp_residual = res;
        if (res < opt.tolerance) {
            sol.diagnostics.status = SolveStatus::Converged;
            break;
        }
        if (it >= opt.max_iterations) {
            sol.diagnostics.status = SolveStatus::MaxIterations;
            break;
        }

        // Backward pass with Levenberg regularization on Quu.
        bool ok = false;
        double dv1 = 0.0, dv2 = 0.0;
        while (!ok) {
            Vec vx = lin.terminal.lx;
            Mat vxx = lin.terminal.lxx;
            dv1 = dv2 = 0.0;
            ok = true;
            for (int k = n - 1; k >= 0; --k) {
                const auto& s = lin.stages[k];
                Vec qx = s.lx + s.fx.transpose() * vx;
                Vec qu = s.lu + s.fu.transpose() * vx;
                Mat vfx = vxx * s.fx;
                Mat vfu = vxx * s.fu;
                Mat qxx = s.lxx + s.fx.transpose() * vfx;
                Mat quu = s.luu + s.fu.transpose() * vfu;
                Mat qux = s.lux + s.fu.transpose() * vfx;
                Mat quu_reg = quu + mu * Mat::Identity(nu, nu);
                Eigen::LLT<Mat> llt(quu_reg);
                if (llt.info() != Eigen::Success) {
                    ok = false;
                    break;
                }
                kff[k] = -llt.solve(qu);
                kfb[k] = -llt.solve(qux);
                dv1 += kff[k].dot(qu);
                dv2 += 0.5 * kff[k].dot(quu * kff[k]);
                vx = qx + kfb[k].transpose() * quu * kff[k] + kfb[k].transpose() * qu + qux.transpose() * kff[k];
                vxx = qxx + kfb[k].transpose() * quu * kfb[k] + kfb[k].transpose() * qux + qux.transpose() * kfb[k];
                vxx = 0.5 * (vxx + vxx.transpose()).eval();
            }
            if (!ok) {
                mu = std::max(mu * opt.mu_factor, opt.mu_min);
                if (mu > opt.mu_max) throw NumericalFailure("regularization exceeded its cap in the backward pass");
            }
        }

        // Forward line search.
        bool accepted = false;
        double alpha = 1.0;
        std::vector<Vec> xn(n + 1), un(n);
        for (int ls = 0; ls < opt.max_line_search; ++ls, alpha *= 0.5) {
            xn[0] = m.initial_state();
            bool finite = true;
            for (int k = 0; k < n; ++k) {
                un[k] = sol.U[k] + alpha * kff[k] + kfb[k] * (xn[k] - sol.X[k]);
                xn[k + 1] = m.dynamics(k, xn[k], un[k], m.params(k));
                if (!xn[k + 1].allFinite()) {
                    finite = false;
                    break;
                }
            }
            if (!finite) continue;
            double jn = try_cost(m, xn, un);
            if (!std::isfinite(jn)) continue;
            double expected = alpha * dv1 + alpha * alpha * dv2;
            double noise = 1e-13 * std::max(1.0, std::abs(cost));
            if (jn - cost <= opt.armijo * expected || (std::abs(jn - cost) <= noise && -expected <= noise)) {
                sol.X = xn;
                sol.U = un;
                cost = jn;
                accepted = true;
                break;
            }
        }
        if (accepted) {
            need_lin = true;
            mu = std::max(mu / opt.mu_factor, opt.mu_min);
        } else {
            ++sol.diagnostics.line_search_failures;
            mu *= opt.mu_factor;
            if (mu > opt.mu_max) {
                sol.diagnostics.status = SolveStatus::LineSearchStalled;
                break;
            }
        }
    }
    sol.diagnostics.iterations = it;
    sol.diagnostics.final_cost = cost;
    sol.Lambda = lam;
    return sol;
}

PmpResidual pmp_residual(const StageModel& m, const OcpSolution& sol) {
    const int n = m.horizon();
    PmpResidual r;
    if (static_cast<int>(sol.X.size()) != n + 1 || static_cast<int>(sol.U.size()) != n)
        throw Error("solution trajectories have inconsistent lengths");
    r.boundary = (sol.X[0] - m.initial_state()).cwiseAbs().maxCoeff();
    Vec lam_n = terminal_gradient(m, sol.X[n]);
    if (static_cast<int>(sol.Lambda.size()) == n)
        r.boundary = std::max(r.boundary, (sol.Lambda[n - 1] - lam_n).cwiseAbs().maxCoeff());
    Vec next = lam_n;
    for (int k = n - 1; k >= 0; --k) {
        Vec p = m.params(k);
        Vec f = m.dynamics(k, sol.X[k], sol.U[k], p);
        r.dynamics = std::max(r.dynamics, (sol.X[k + 1] - f).cwiseAbs().maxCoeff());
        if (static_cast<int>(sol.Lambda.size()) == n)
            r.costate = std::max(r.costate, (sol.Lambda[k] - next).cwiseAbs().maxCoeff());
        Mat fx, fu;
        Vec lx, lu;
        dynamics_jacobians(m, k, sol.X[k], sol.U[k], p, fx, fu);
        cost_gradient(m, k, sol.X[k], sol.U[k], p, lx, lu);
        r.stationarity = std::max(r.stationarity, (lu + fu.transpose() * next).cwiseAbs().maxCoeff());
        next = lx + fx.transpose() * next;
    }
    return r;
}

// -------------------------------------------------------------------- LQR stub

LqrStub::LqrStub(Mat a, Mat b, Vec q, Vec r, Vec qn, Vec x0, int horizon)
    : a_(std::move(a)), b_(std::move(b)), x0_(std::move(x0)), horizon_(horizon) {
    if (a_.rows() != a_.cols() || b_.rows() != a_.rows()) throw ConfigError("LQR stub: inconsistent A/B");
    if (q.size() != a_.rows() || qn.size() != a_.rows() || r.size() != b_.cols())
        throw ConfigError("LQR stub: weight sizes mismatch");
    if (horizon < 1) throw ConfigError("LQR stub: horizon must be >= 1");
    theta_.resize(q.size() + r.size() + qn.size());
    theta_ << q, r, qn;
}

std::optional<std::string> LqrStub::violated_constraint(int, const Vec& x, const Vec*) const {
    if (!x.allFinite()) return std::string("non-finite state");
    return std::nullopt;
}

std::vector<Vec> LqrStub::initial_controls() const { return std::vector<Vec>(horizon_, Vec::Zero(b_.cols())); }

template <typename S>
VecXT<S> LqrStub::dyn(int, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>&) const {
    return a_.cast<S>() * x + b_.cast<S>() * u;
}

template <typename S>
S LqrStub::cost(int, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const {
    const Eigen::Index nx = x.size();
    S c(0.0);
    for (Eigen::Index i = 0; i < nx; ++i) c += 0.5 * p(i) * x(i) * x(i);
    for (Eigen::Index j = 0; j < u.size(); ++j) c += 0.5 * p(nx + j) * u(j) * u(j);
    return c;
}

template <typename S>
S LqrStub::terminal(const VecXT<S>& x, const VecXT<S>& p) const {
    const Eigen::Index nx = x.size();
    const Eigen::Index off = nx + b_.cols();
    S c(0.0);
    for (Eigen::Index i = 0; i < nx; ++i) c += 0.5 * p(off + i) * x(i) * x(i);
    return c;
}

template VecXT<double> LqrStub::dyn<double>(int, const VecXT<double>&, const VecXT<double>&,
                                            const VecXT<double>&) const;
template VecXT<D1> LqrStub::dyn<D1>(int, const VecXT<D1>&, const VecXT<D1>&, const VecXT<D1>&) const;
template VecXT<D2> LqrStub::dyn<D2>(int, const VecXT<D2>&, const VecXT<D2>&, const VecXT<D2>&) const;
template double LqrStub::cost<double>(int, const VecXT<double>&, const VecXT<double>&, const VecXT<double>&) const;
template D1 LqrStub::cost<D1>(int, const VecXT<D1>&, const VecXT<D1>&, const VecXT<D1>&) const;
template D2 LqrStub::cost<D2>(int, const VecXT<D2>&, const VecXT<D2>&, const VecXT<D2>&) const;
template double LqrStub::terminal<double>(const VecXT<double>&, const VecXT<double>&) const;
template D1 LqrStub::terminal<D1>(const VecXT<D1>&, const VecXT<D1>&) const;
template D2 LqrStub::terminal<D2>(const VecXT<D2>&, const VecXT<D2>&) const;

void riccati(const Mat& a, const Mat& b, const Mat& q, const Mat& r, const Mat& qn, int horizon,
             std::vector<Mat>& p, std::vector<Mat>& k) {
    p.assign(horizon + 1, Mat());
    k.assign(horizon, Mat());
    p[horizon] = qn;
    for (int t = horizon - 1; t >= 0; --t) {
        Mat s = r + b.transpose() * p[t + 1] * b;
        k[t] = s.ldlt().solve(b.transpose() * p[t + 1] * a);
        p[t] = q + a.transpose() * p[t + 1] * (a - b * k[t]);
        p[t] = 0.5 * (p[t] + p[t].transpose()).eval();
    }
}

}  // namespace multilift
