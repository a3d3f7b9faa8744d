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

#include "multilift/grad_mpc.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "multilift/dist_mpc.hpp"
#include "multilift/errors.hpp"
#include "multilift/parallel.hpp"

namespace multilift {

namespace {

constexpr double kMinRcond = 1e-13;

// Huu^{-1} applied through a Cholesky factor; throws when Huu is not SPD.
Eigen::LLT<Mat> factor_huu(const Mat& huu, int k) {
    Eigen::LLT<Mat> llt(huu);
    if (llt.info() != Eigen::Success) throw NotStrictlyConvex(k);
    return llt;
}

// P (I + R P)^{-1}, which is what every term of the recursion needs.
Mat p_inv(const Mat& p, const Mat& r, int k) {
    const int n = static_cast<int>(p.rows());
    Eigen::PartialPivLU<Mat> lu(Mat::Identity(n, n) + r * p);
    if (!(lu.rcond() > kMinRcond)) throw SingularRecursion(k);
    return p * lu.inverse();
}

}  // namespace

std::string to_string(ThetaTag t) {
    switch (t) {
        case ThetaTag::OwnTheta: return "own_theta";
        case ThetaTag::OwnFeedbackState: return "own_feedback_state";
        case ThetaTag::PeerState: return "peer_state";
        case ThetaTag::PeerControl: return "peer_control";
    }
    return "unknown";
}

GeneralizedTheta GeneralizedTheta::own_theta(const StageModel& m) {
    return {ThetaTag::OwnTheta, {0, m.theta_dim()}};
}

GeneralizedTheta GeneralizedTheta::own_state(const StageModel& m) {
    return {ThetaTag::OwnFeedbackState, {0, m.state_dim()}};
}

PmpDerivatives build_pmp_derivatives(const StageModel& m, const OcpSolution& sol, const GeneralizedTheta& theta) {
    const int N = m.horizon();
    const int nx = m.state_dim();
    const int nu = m.control_dim();
    if (static_cast<int>(sol.U.size()) != N || static_cast<int>(sol.X.size()) != N + 1 ||
        static_cast<int>(sol.Lambda.size()) != N)
        throw Error("solution does not match the problem horizon");
    PmpDerivatives d;
    d.F.resize(N);
    d.G.resize(N);
    d.Hxx.resize(N);
    d.Hxu.resize(N);
    d.Hux.resize(N);
    d.Huu.resize(N);
    for (int k = 0; k < N; ++k) {
        const Vec p = m.params(k);
        dynamics_jacobians(m, k, sol.X[k], sol.U[k], p, d.F[k], d.G[k]);
        Mat h = hamiltonian_hessian(m, k, sol.X[k], sol.U[k], p, sol.Lambda[k]);
        d.Hxx[k] = h.topLeftCorner(nx, nx);
        d.Hxu[k] = h.topRightCorner(nx, nu);
        d.Hux[k] = h.bottomLeftCorner(nu, nx);
        d.Huu[k] = h.bottomRightCorner(nu, nu);
        factor_huu(d.Huu[k], k);
    }
    d.HNxx = terminal_hessian(m, sol.X[N], m.params(N));
    set_theta_coupling(d, m, sol, theta);
    return d;
}

void set_theta_coupling(PmpDerivatives& d, const StageModel& m, const OcpSolution& sol,
                        const GeneralizedTheta& theta) {
    const int N = m.horizon();
    const int nx = m.state_dim();
    const int nu = m.control_dim();
    const int dim = theta.dim();
    d.theta = theta;
    d.dx0 = Mat::Zero(nx, dim);
    d.E.assign(N, Mat::Zero(nx, dim));
    d.Hxth.assign(N, Mat::Zero(nx, dim));
    d.Huth.assign(N, Mat::Zero(nu, dim));
    d.HNxth = Mat::Zero(nx, dim);

    switch (theta.tag) {
        case ThetaTag::OwnFeedbackState:
            d.dx0.setIdentity();
            break;
        case ThetaTag::OwnTheta: {
            const bool in_dyn = m.theta_in_dynamics();
            for (int k = 0; k < N; ++k) {
                const Vec p = m.params(k);
                Mat h = hamiltonian_mixed(m, k, sol.X[k], sol.U[k], p, sol.Lambda[k], theta.segment, !in_dyn);
                d.Hxth[k] = h.topRows(nx);
                d.Huth[k] = h.bottomRows(nu);
                if (in_dyn) d.E[k] = dynamics_param_jacobian(m, k, sol.X[k], sol.U[k], p, theta.segment);
            }
            d.HNxth = terminal_mixed(m, sol.X[N], m.params(N), theta.segment);
            break;
        }
        case ThetaTag::PeerState:
        case ThetaTag::PeerControl: {
            // Only stage 0 sees the first external entry; H_0^{x theta} never enters the gradient.
            const Vec p = m.params(0);
            Mat h = hamiltonian_mixed(m, 0, sol.X[0], sol.U[0], p, sol.Lambda[0], theta.segment, false);
            d.Huth[0] = h.bottomRows(nu);
            d.E[0] = dynamics_param_jacobian(m, 0, sol.X[0], sol.U[0], p, theta.segment);
            break;
        }
    }
}

PwResult backward_pw(const PmpDerivatives& d) {
    const int N = static_cast<int>(d.F.size());
    PwResult r;
    r.P.resize(N);
    Mat P = d.HNxx;
    Mat W = d.HNxth;
    r.P[N - 1] = P;
    for (int k = N - 1; k >= 1; --k) {
        auto llt = factor_huu(d.Huu[k], k);
        const Mat& G = d.G[k];
        Mat A = d.F[k] - G * llt.solve(d.Hux[k]);
        Mat R = G * llt.solve(G.transpose());
        Mat M = d.E[k] - G * llt.solve(d.Huth[k]);
        Mat Q = d.Hxx[k] - d.Hxu[k] * llt.solve(d.Hux[k]);
        Mat Nk = d.Hxth[k] - d.Hxu[k] * llt.solve(d.Huth[k]);
        Mat PI = p_inv(P, R, k);
        Mat Wn = A.transpose() * PI * (M - R * W) + A.transpose() * W + Nk;
        Mat Pn = Q + A.transpose() * PI * A;
        P = 0.5 * (Pn + Pn.transpose());
        W = Wn;
        r.P[k - 1] = P;
    }
    r.P1 = P;
    r.W1 = W;
    return r;
}

Mat first_control_gradient(const PmpDerivatives& d, const PwResult& pw) {
    auto llt = factor_huu(d.Huu[0], 0);
    const Mat& G = d.G[0];
    Mat A = d.F[0] - G * llt.solve(d.Hux[0]);
    Mat R = G * llt.solve(G.transpose());
    Mat M = d.E[0] - G * llt.solve(d.Huth[0]);
    Mat PI = p_inv(pw.P1, R, 0);
#ifdef MULTILIFT_FAULT_SIGN_FLIP
    const double w_sign = -1.0;
#else
    const double w_sign = 1.0;
#endif
    Mat rhs = d.Hux[0] * d.dx0 + w_sign * G.transpose() * pw.W1 + d.Huth[0] +
              G.transpose() * PI * (M - R * pw.W1) + G.transpose() * PI * A * d.dx0;
    Mat g = -llt.solve(rhs);
    if (!g.allFinite()) throw NumericalFailure("non-finite first-control gradient");
    return g;
}

Mat mpc_gradient(const StageModel& m, const OcpSolution& sol, const GeneralizedTheta& theta) {
    PmpDerivatives d = build_pmp_derivatives(m, sol, theta);
    return first_control_gradient(d, backward_pw(d));
}

MpcGradients all_mpc_gradients(const DistributedMpc& mpc, const TickResult& tick, int workers) {
    const int n = mpc.num_quads();
    if (static_cast<int>(tick.quad_solutions.size()) != n) throw ProtocolError("tick has no quadrotor solutions");
    MpcGradients out;
    out.quads.resize(n);
    // Quadrotors 0..n-1 then the load as task n.
    parallel_for(n + 1, workers, [&](int a) {
        try {
            if (a < n) {
                const QuadrotorOcp& m = mpc.quad(a);
                const OcpSolution& sol = tick.quad_solutions[a];
                PmpDerivatives d = build_pmp_derivatives(m, sol, GeneralizedTheta::own_theta(m));
                auto& g = out.quads[a];
                g.du_dtheta = first_control_gradient(d, backward_pw(d));
                set_theta_coupling(d, m, sol, GeneralizedTheta::own_state(m));
                g.du_dx = first_control_gradient(d, backward_pw(d));
                set_theta_coupling(d, m, sol, GeneralizedTheta::peer_state(m.load_state_segment()));
                g.du_dxl = first_control_gradient(d, backward_pw(d));
                set_theta_coupling(d, m, sol, GeneralizedTheta::peer_control(m.load_control_segment()));
                g.du_dul = first_control_gradient(d, backward_pw(d));
            } else {
                const LoadOcp& m = mpc.load();
                const OcpSolution& sol = tick.load_solution;
                PmpDerivatives d = build_pmp_derivatives(m, sol, GeneralizedTheta::own_theta(m));
                auto& g = out.load;
                g.du_dtheta = first_control_gradient(d, backward_pw(d));
                set_theta_coupling(d, m, sol, GeneralizedTheta::own_state(m));
                g.du_dx = first_control_gradient(d, backward_pw(d));
                g.du_dxi.resize(n);
                for (int i = 0; i < n; ++i) {
                    set_theta_coupling(d, m, sol, GeneralizedTheta::peer_state(m.quad_state_segment(i)));
                    g.du_dxi[i] = first_control_gradient(d, backward_pw(d));
                }
            }
        } catch (const AgentError&) {
            throw;
        } catch (const std::exception& e) {
            throw AgentError(a < n ? "quadrotor " + std::to_string(a) : std::string("load"), e.what());
        }
    });
    return out;
}

}  // namespace multilift
