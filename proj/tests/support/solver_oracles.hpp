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

#ifndef MULTILIFT_TESTS_SOLVER_ORACLES_HPP
#define MULTILIFT_TESTS_SOLVER_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "multilift/agents.hpp"
#include "multilift/ilqr.hpp"

namespace multilift::testing {

/**
 * 2-step, 1-quadrotor toy: free quadrotor at identity attitude asked to climb
 * 5 cm in 0.2 s with a thrust cap that binds on the first step. Torques stay at zero by
 * symmetry, so only the two thrusts matter and the motion is purely vertical.
 */
struct ToyInstance {
    double mass = 1.5;
    double g = 9.81;
    double dt = 0.1;
    double z0 = 1.0;
    double z_ref = 1.05;
    double thrust_min = 0.5;
    double thrust_max = 16.0;
    double u_ref = 1.5 * 9.81;
    Vec theta = Vec::Ones(QuadrotorOcp::kThetaDim);

    ToyInstance() {
        theta(2) = 2000.0;   // z
        theta(5) = 10.0;     // vz
        theta(16 + 2) = 4000.0;
    }

    QuadrotorOcp make(double gamma) const {
        QuadrotorOcp::Setup su;
        su.attached = false;
        su.num_cables = 1;
        su.quad.mass = mass;
        su.quad.u_min(0) = thrust_min;
        su.quad.u_max(0) = thrust_max;
        su.horizon.horizon = 2;
        su.horizon.dt = dt;
        su.horizon.gamma = gamma;
        su.horizon.g = g;
        QuadrotorOcp ocp(su);
        Vec13 x0 = Vec13::Zero();
        x0(idx::q) = 1.0;
        x0(2) = z0;
        Vec13 xr = x0;
        xr(2) = z_ref;
        Vec4 ur(u_ref, 0.0, 0.0, 0.0);
        Vec13 load = Vec13::Zero();
        load(idx::q) = 1.0;
        ocp.set_initial_state(x0);
        ocp.set_theta(theta);
        ocp.set_references(std::vector<Vec13>(3, xr), std::vector<Vec>(2, Vec(ur)));
        ocp.set_externals(std::vector<Vec13>(3, load), std::vector<Vec>(2, Vec::Zero(1)), {});
        return ocp;
    }

    /// Hard-constraint objective (no barrier) in closed form of the vertical motion.
    double objective(double f0, double f1) const {
        double z = z0, v = 0.0, c = 0.0;
        const double f[2] = {f0, f1};
        for (int k = 0; k < 2; ++k) {
            c += 0.5 * theta(2) * (z - z_ref) * (z - z_ref) + 0.5 * theta(5) * v * v;
            c += 0.5 * theta(12) * (f[k] - u_ref) * (f[k] - u_ref);
            double a = f[k] / mass - g;
            z += v * dt + 0.5 * a * dt * dt;
            v += a * dt;
        }
        c += 0.5 * theta(16 + 2) * (z - z_ref) * (z - z_ref) + 0.5 * theta(16 + 5) * v * v;
        return c;
    }

    struct Optimum {
        double f0 = 0.0, f1 = 0.0, cost = 0.0;
    };

    /// Projected grid search over the thrust box, refined around the best cell.
    Optimum brute_force(int cells = 400, int refinements = 6) const {
        double lo0 = thrust_min, hi0 = thrust_max, lo1 = thrust_min, hi1 = thrust_max;
        Optimum best;
        best.cost = std::numeric_limits<double>::infinity();
        for (int r = 0; r <= refinements; ++r) {
            const double h0 = (hi0 - lo0) / cells, h1 = (hi1 - lo1) / cells;
            for (int i = 0; i <= cells; ++i) {
                for (int j = 0; j <= cells; ++j) {
                    double f0 = std::clamp(lo0 + i * h0, thrust_min, thrust_max);
                    double f1 = std::clamp(lo1 + j * h1, thrust_min, thrust_max);
                    double c = objective(f0, f1);
                    if (c < best.cost) best = {f0, f1, c};
                }
            }
            lo0 = best.f0 - 4.0 * h0;
            hi0 = best.f0 + 4.0 * h0;
            lo1 = best.f1 - 4.0 * h1;
            hi1 = best.f1 + 4.0 * h1;
        }
        return best;
    }
};

struct SweepPoint {
    double gamma = 0.0;
    double objective = 0.0;  ///< hard-constraint objective of the barrier solution
    bool interior = false;
    bool converged = false;
};

inline std::vector<SweepPoint> gamma_sweep(const ToyInstance& toy, const std::vector<double>& gammas) {
    SolverOptions opt;
    opt.tolerance = 1e-9;
    opt.max_iterations = 300;
    std::vector<SweepPoint> out;
    for (double gamma : gammas) {
        QuadrotorOcp ocp = toy.make(gamma);
        OcpSolution sol = solve_ocp(ocp, nullptr, opt);
        SweepPoint p;
        p.gamma = gamma;
        p.converged = sol.diagnostics.status == SolveStatus::Converged;
        p.interior = true;
        for (int k = 0; k < 2; ++k)
            if (ocp.violated_constraint(k, sol.X[k], &sol.U[k])) p.interior = false;
        p.objective = toy.objective(sol.U[0](0), sol.U[1](0));
        out.push_back(p);
    }
    return out;
}

/// Lightly damped double integrators with a coupling term; N = 20.
inline LqrStub lqr_fixture() {
    Mat a(4, 4);
    a << 1.0, 0.1, 0.0, 0.0,
         -0.05, 0.98, 0.02, 0.0,
         0.0, 0.0, 1.0, 0.1,
         0.01, 0.0, -0.08, 0.97;
    Mat b(4, 2);
    b << 0.005, 0.0,
         0.1, 0.02,
         0.0, 0.005,
         -0.01, 0.1;
    Vec q(4), r(2), qn(4), x0(4);
    q << 2.0, 0.5, 1.0, 0.3;
    r << 0.2, 0.4;
    qn << 10.0, 2.0, 8.0, 1.0;
    x0 << 1.0, -0.5, 0.3, 0.8;
    return LqrStub(a, b, q, r, qn, x0, 20);
}

/// Largest difference between the iLQR controls and the Riccati feedback rollout.
inline double lqr_riccati_error(const LqrStub& m, const OcpSolution& sol) {
    const int n = m.horizon();
    Vec th = m.params(0);
    const int nx = m.state_dim(), nu = m.control_dim();
    Mat q = th.head(nx).asDiagonal();
    Mat r = th.segment(nx, nu).asDiagonal();
    Mat qn = th.tail(nx).asDiagonal();
    std::vector<Mat> p, k;
    riccati(m.a(), m.b(), q, r, qn, n, p, k);
    Vec x = m.initial_state();
    double err = 0.0;
    for (int t = 0; t < n; ++t) {
        Vec u = -k[t] * x;
        err = std::max(err, (u - sol.U[t]).cwiseAbs().maxCoeff());
        err = std::max(err, (x - sol.X[t]).cwiseAbs().maxCoeff());
        x = m.a() * x + m.b() * u;
    }
    return std::max(err, (x - sol.X[n]).cwiseAbs().maxCoeff());
}

}  // namespace multilift::testing

#endif  // MULTILIFT_TESTS_SOLVER_ORACLES_HPP
