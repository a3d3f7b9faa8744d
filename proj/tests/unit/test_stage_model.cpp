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

#include "doctest.h"

#include "multilift/dist_mpc.hpp"
#include "multilift/stage_model.hpp"
#include "solver_oracles.hpp"

using namespace multilift;

TEST_CASE("LQR stub derivatives are the weights and the system matrices") {
    LqrStub m = testing::lqr_fixture();
    Vec x(4), u(2);
    x << 0.3, -0.1, 0.7, 0.2;
    u << 0.4, -0.9;
    Vec p = m.params(0);
    StageDerivatives d = stage_derivatives(m, 0, x, u, p);
    CHECK((d.fx - m.a()).norm() == 0.0);
    CHECK((d.fu - m.b()).norm() == 0.0);
    CHECK((d.lxx - Mat(p.head(4).asDiagonal())).norm() == 0.0);
    CHECK((d.luu - Mat(p.segment(4, 2).asDiagonal())).norm() == 0.0);

    Vec lambda = Vec::Constant(4, 0.7);
    Mat h = hamiltonian_hessian(m, 0, x, u, p, lambda);
    CHECK((h.topLeftCorner(4, 4) - Mat(p.head(4).asDiagonal())).norm() == 0.0);
    CHECK((h.bottomRightCorner(2, 2) - Mat(p.segment(4, 2).asDiagonal())).norm() == 0.0);
}

namespace {

/// Hover fixture after one distributed solve, so the cable terms see real load plans.
DistributedMpc solved_hover(std::vector<Vec13>& qx, Vec13& lx) {
    Scenario s = hover_fixture(2);
    HoverEquilibrium eq = hover_equilibrium(s.system, s.path.center, s.tension_beta());
    DistributedMpc mpc(s);
    mpc.set_references(0.0, s.tension_beta());
    qx.clear();
    for (const auto& q : eq.state.quads) qx.push_back(q.to_vector());
    lx = eq.state.load.to_vector();
    mpc.run(qx, lx, 1);
    return mpc;
}

}  // namespace

TEST_CASE("quadrotor OCP derivatives against central differences") {
    std::vector<Vec13> qx;
    Vec13 lx;
    DistributedMpc mpc = solved_hover(qx, lx);
    const StageModel& m = mpc.quad(0);
    const int k = 1;
    Vec x = qx[0];
    x.head<3>() += Vec3(0.01, -0.02, 0.015);
    x.segment<3>(idx::w) = Vec3(0.1, -0.05, 0.2);
    Vec u = Vec4(16.0, 0.02, -0.01, 0.03);
    Vec p = m.params(k);
    StageDerivatives d = stage_derivatives(m, k, x, u, p);
    const double h = 1e-6;
    for (int j = 0; j < 13; ++j) {
        if (j >= idx::q && j < idx::q + 4) continue;
        Vec xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        Vec fd = (m.dynamics(k, xp, u, p) - m.dynamics(k, xm, u, p)) / (2.0 * h);
        CHECK((fd - d.fx.col(j)).norm() < 1e-6 * (1.0 + fd.norm()));
        double cd = (m.running_cost(k, xp, u, p) - m.running_cost(k, xm, u, p)) / (2.0 * h);
        CHECK(cd == doctest::Approx(d.lx(j)).epsilon(1e-5).scale(1.0));
    }
    for (int j = 0; j < 4; ++j) {
        Vec up = u, um = u;
        up(j) += h;
        um(j) -= h;
        Vec fd = (m.dynamics(k, x, up, p) - m.dynamics(k, x, um, p)) / (2.0 * h);
        CHECK((fd - d.fu.col(j)).norm() < 1e-6 * (1.0 + fd.norm()));
        double cd = (m.running_cost(k, x, up, p) - m.running_cost(k, x, um, p)) / (2.0 * h);
        CHECK(cd == doctest::Approx(d.lu(j)).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("Hamiltonian Hessians are symmetric") {
    std::vector<Vec13> qx;
    Vec13 lx;
    DistributedMpc mpc = solved_hover(qx, lx);
    for (const StageModel* m : {static_cast<const StageModel*>(&mpc.quad(0)),
                                static_cast<const StageModel*>(&mpc.load())}) {
        OcpSolution sol = solve_ocp(*m);
        for (int k = 0; k < m->horizon(); ++k) {
            Mat h = hamiltonian_hessian(*m, k, sol.X[k], sol.U[k], m->params(k), sol.Lambda[k]);
            CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("barrier violation is named") {
    std::vector<Vec13> qx;
    Vec13 lx;
    DistributedMpc mpc = solved_hover(qx, lx);
    Vec u = Vec4(100.0, 0.0, 0.0, 0.0);
    auto v = mpc.quad(0).violated_constraint(0, qx[0], &u);
    REQUIRE(v.has_value());
    CHECK(v->find("control upper bound") != std::string::npos);
}
