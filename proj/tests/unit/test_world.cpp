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

#include <cmath>

#include "multilift/scenarios.hpp"
#include "multilift/world.hpp"
#include "physics_oracles.hpp"

using namespace multilift;

namespace {

LoadParams simple_load() {
    LoadParams lp;
    lp.attachments = ngon_attachments(3, 0.5, 0.0);
    return lp;
}

}  // namespace

TEST_CASE("cable tension branches") {
    LoadParams lp = simple_load();
    CableParams cable;
    cable.damping = 0.0;
    RigidState load;
    RigidState quad;

    quad.p = lp.attachments[0] + Vec3(0.0, 0.0, cable.natural_length);
    quad.v = Vec3(0.0, 0.0, 3.0);
    TensionResult slack = cable_tension(quad, load, 0, cable, lp);
    CHECK(slack.magnitude == 0.0);
    CHECK(slack.on_load == Vec3::Zero());

    quad.v.setZero();
    quad.p = lp.attachments[0] + Vec3(0.0, 0.0, cable.natural_length + 0.01);
    TensionResult taut = cable_tension(quad, load, 0, cable, lp);
    CHECK(taut.magnitude == doctest::Approx(40.0).epsilon(1e-9));
    CHECK(taut.on_load.z() == doctest::Approx(40.0).epsilon(1e-9));
    CHECK(std::abs(taut.on_load.x()) < 1e-12);
    CHECK(std::abs(taut.on_load.y()) < 1e-12);

    quad.p = lp.attachments[0];
    CHECK_THROWS(cable_tension(quad, load, 0, cable, lp));
}

TEST_CASE("quadrotor derivative at hover and in free fall") {
    QuadParams qp;
    RigidState s;
    s.p = Vec3(0.3, -0.2, 1.0);
    Vec13 d = quad_derivative(s, Vec4(qp.mass * 9.81, 0.0, 0.0, 0.0), Vec3::Zero(), qp);
    CHECK(d.cwiseAbs().maxCoeff() < 1e-14);

    d = quad_derivative(s, Vec4::Zero(), Vec3::Zero(), qp);
    CHECK(d.segment<3>(idx::v).isApprox(Vec3(0.0, 0.0, -9.81)));
}

TEST_CASE("load derivative balances symmetric vertical tensions") {
    LoadParams lp = simple_load();
    RigidState s;
    std::vector<Vec3> t(3, Vec3(0.0, 0.0, lp.mass * 9.81 / 3.0));
    Vec13 d = load_derivative(s, t, lp);
    CHECK(d.segment<3>(idx::v).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(d.segment<3>(idx::w).cwiseAbs().maxCoeff() < 1e-12);

    Vec13 fall = load_derivative(s, {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()}, lp);
    CHECK(fall.segment<3>(idx::v).isApprox(Vec3(0.0, 0.0, -9.81)));
}

TEST_CASE("single cable through a biased CoM gives no angular acceleration") {
    LoadParams lp;
    lp.com_bias = Vec3(0.1, 0.1, -0.1);
    lp.attachments = {lp.com_bias};
    RigidState s;
    Vec13 d = load_derivative(s, {Vec3(0.0, 0.0, lp.mass * 9.81)}, lp);
    CHECK(d.segment<3>(idx::w).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(d.segment<3>(idx::v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("motor lag fixed point and step response") {
    Scenario s = hover_fixture(2);
    HoverEquilibrium eq = hover_equilibrium(s.system, s.path.center, s.tension_beta());
    WorldState st = eq.state;
    for (auto& u : st.realized_u) u.setZero();
    World w0(s.system.world_params(), st);
    std::vector<Vec4> zero(2, Vec4::Zero());
    w0.step(zero, 0.005);
    CHECK(w0.state().realized_u[0] == Vec4::Zero());

    World w(s.system.world_params(), st);
    std::vector<Vec4> cmd(2, Vec4(10.0, 0.1, -0.1, 0.05));
    const double dt = 0.005, tau = s.system.motor_tau;
    for (int k = 0; k < 20; ++k) w.step(cmd, dt);
    Vec4 expect = cmd[0] * (1.0 - std::exp(-0.1 / tau));
    CHECK((w.state().realized_u[0] - expect).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("six-quadrotor hover stays put for one second") {
    Scenario s = weight_learning_scenario();
    s.system.load.com_bias.setZero();
    CHECK(testing::hover_drift(s, 1.0) < 1e-6);
}

TEST_CASE("quaternion norm preserved") {
    World w = testing::free_fall_world(3);
    std::vector<Vec4> zero(3, Vec4::Zero());
    for (int k = 0; k < 100; ++k) {
        w.step(zero, 0.005);
        for (const auto& q : w.state().quads) CHECK(std::abs(q.q.norm() - 1.0) < 1e-9);
        CHECK(std::abs(w.state().load.q.norm() - 1.0) < 1e-9);
    }
}

TEST_CASE("energy drift without thrust or damping") {
    CHECK(testing::energy_drift(1.0, 0.005) < 1e-3);
}

TEST_CASE("RK4 error shrinks about 16x on step halving") {
    double f = testing::rk4_order_factor(0.005);
    CHECK(f >= 8.0);
    CHECK(f <= 32.0);
}

TEST_CASE("non-finite state reports the offending agent") {
    Scenario s = hover_fixture(2);
    HoverEquilibrium eq = hover_equilibrium(s.system, s.path.center, s.tension_beta());
    World w(s.system.world_params(), eq.state);
    w.mutable_state().quads[1].w.x() = std::nan("");
    auto fault = w.step(eq.controls, 0.005);
    REQUIRE(fault.has_value());
    CHECK(fault->agent == 1);
}
