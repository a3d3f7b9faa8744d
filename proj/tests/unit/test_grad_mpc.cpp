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

#include "multilift/checks.hpp"
#include "multilift/grad_mpc.hpp"
#include "solver_oracles.hpp"

using namespace multilift;

namespace {

OcpSolution solve_tight(const StageModel& m) {
    SolverOptions o;
    o.tolerance = 1e-11;
    o.max_iterations = 200;
    return solve_ocp(m, nullptr, o);
}

double max_abs(const std::vector<Mat>& v, size_t from = 0) {
    double m = 0.0;
    for (size_t k = from; k < v.size(); ++k)
        if (v[k].size() > 0) m = std::max(m, v[k].cwiseAbs().maxCoeff());
    return m;
}

}  // namespace

TEST_CASE("LQR stub: Hessians, P and the feedback gain") {
    LqrStub m = testing::lqr_fixture();
    OcpSolution sol = solve_tight(m);
    Vec th = m.params(0);
    Mat q = th.head(4).asDiagonal(), r = th.segment(4, 2).asDiagonal(), qn = th.tail(4).asDiagonal();
    std::vector<Mat> p, k;
    riccati(m.a(), m.b(), q, r, qn, m.horizon(), p, k);

    PmpDerivatives d = build_pmp_derivatives(m, sol, GeneralizedTheta::own_state(m));
    for (int t = 0; t < m.horizon(); ++t) {
        CHECK((d.Hxx[t] - q).norm() == 0.0);
        CHECK((d.Huu[t] - r).norm() == 0.0);
        CHECK((d.Hxu[t] - d.Hux[t].transpose()).norm() <= 1e-10);
    }
    PwResult pw = backward_pw(d);
    CHECK((pw.P1 - p[1]).cwiseAbs().maxCoeff() < 1e-8);
    for (const auto& pk : pw.P) CHECK((pk - pk.transpose()).cwiseAbs().maxCoeff() < 1e-10);

    Mat du = mpc_gradient(m, sol, GeneralizedTheta::own_state(m));
    CHECK((du + k[0]).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("own feedback state tag has no parameter coupling") {
    LqrStub m = testing::lqr_fixture();
    OcpSolution sol = solve_tight(m);
    PmpDerivatives d = build_pmp_derivatives(m, sol, GeneralizedTheta::own_state(m));
    CHECK(max_abs(d.E) == 0.0);
    CHECK(max_abs(d.Hxth) == 0.0);
    CHECK(max_abs(d.Huth) == 0.0);
    CHECK(d.HNxth.cwiseAbs().maxCoeff() == 0.0);
    CHECK((d.dx0 - Mat::Identity(4, 4)).norm() == 0.0);
    CHECK(backward_pw(d).W1.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("horizon one is the terminal base case") {
    LqrStub full = testing::lqr_fixture();
    LqrStub m(full.a(), full.b(), Vec::Ones(4), Vec::Constant(2, 0.5), Vec::Constant(4, 3.0), full.initial_state(), 1);
    OcpSolution sol = solve_tight(m);
    PmpDerivatives d = build_pmp_derivatives(m, sol, GeneralizedTheta::own_theta(m));
    PwResult pw = backward_pw(d);
    CHECK((pw.P1 - d.HNxx).norm() == 0.0);
    CHECK((pw.W1 - d.HNxth).norm() == 0.0);
}

TEST_CASE("peer control tag touches only the first stage") {
    GradientFixture f = make_gradient_fixture(gradient_fixture_scenario(), 20);
    const QuadrotorOcp& q = f.mpc->quad(0);
    PmpDerivatives d = build_pmp_derivatives(q, f.tick.quad_solutions[0],
                                             GeneralizedTheta::peer_control(q.load_control_segment()));
    CHECK(d.Huth[0].cwiseAbs().maxCoeff() > 0.0);
    CHECK(d.E[0].cwiseAbs().maxCoeff() > 0.0);
    CHECK(max_abs(d.E, 1) == 0.0);
    CHECK(max_abs(d.Huth, 1) == 0.0);
    CHECK(max_abs(d.Hxth) == 0.0);
    CHECK(d.HNxth.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.dx0.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("every tag matches central differences on the fixture") {
    GradientFixture f = make_gradient_fixture(gradient_fixture_scenario(), 50);
    CheckReport r = check_mpc_gradients(f);
    CHECK(r.items.size() > 0);
    CHECK(r.pass());
}
