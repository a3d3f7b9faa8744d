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

#include <sstream>

#include "multilift/trainer.hpp"

using namespace multilift;

namespace {

Scenario short_circle(double episode_time) {
    Scenario s = circle_scenario(2, false);
    s.training.episode_time = episode_time;
    s.training.window = 5;
    return s;
}

bool same_params(const Trainer& a, const Trainer& b) {
    for (size_t i = 0; i < a.quad_policies().size(); ++i)
        if (!(a.quad_policies()[i].net.parameters().array() == b.quad_policies()[i].net.parameters().array()).all())
            return false;
    if (a.load_policy().has_value() != b.load_policy().has_value()) return false;
    return !a.load_policy() ||
           (a.load_policy()->net.parameters().array() == b.load_policy()->net.parameters().array()).all();
}

}  // namespace

TEST_CASE("stopping criterion") {
    CHECK(stopping_criterion({100.0, 100.05}));
    CHECK_FALSE(stopping_criterion({100.0, 90.0}));
    CHECK_FALSE(stopping_criterion({100.0}));
    CHECK_FALSE(stopping_criterion({}));
}

TEST_CASE("RMSE of stub trajectories") {
    Vec13 ref = Vec13::Zero();
    ref(idx::q) = 1.0;
    RmseAccumulator perfect, offset;
    for (int k = 0; k < 10; ++k) {
        perfect.add(ref, ref);
        Vec13 x = ref;
        x(0) += 0.1;
        offset.add(x, ref);
    }
    CHECK(perfect.result().position.norm() == 0.0);
    CHECK(perfect.result().euler.norm() == 0.0);
    CHECK(offset.result().position.x() == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(offset.result().position.tail<2>().norm() == 0.0);
    CHECK(offset.result().samples == 10);
}

TEST_CASE("zero sensitivities give zero policy gradients") {
    Scenario s = short_circle(1.0);
    std::vector<WindowSample> window;
    std::vector<SensitivityState> sens;
    for (int k = 0; k < 4; ++k) {
        Vec13 l = Vec13::Random();
        std::vector<Vec13> q{Vec13::Random(), Vec13::Random()};
        window.push_back(evaluate_losses(s, q, l, ReferenceSample{AgentReference{Vec13::Zero(), Vec()},
                                                                  {AgentReference{}, AgentReference{}}}));
        sens.push_back(zero_sensitivity(2, {28, 28}, 26));
    }
    ThetaGradients g = window_theta_gradients(window, sens, CouplingMode::Pairwise);
    REQUIRE(g.quads.size() == 2);
    CHECK(g.quads[0].size() == 28);
    CHECK(g.quads[0].cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.load.size() == 26);
    CHECK(g.load.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero-length episode") {
    Trainer t(short_circle(0.0), 3);
    EpisodeResult r = t.run_episode(0, true);
    CHECK(r.l_mean == 0.0);
    CHECK(r.ticks == 0);
    CHECK(r.updates == 0);
}

TEST_CASE("no update before the window fills") {
    Scenario s = short_circle(0.08);  // 4 ticks, window 5
    Trainer a(s, 5), b(s, 5);
    EpisodeResult r = a.run_episode(0, true);
    CHECK(r.ticks == 4);
    CHECK(r.updates == 0);
    CHECK(same_params(a, b));

    Scenario longer = short_circle(0.2);
    Trainer c(longer, 5);
    EpisodeResult rc = c.run_episode(0, true);
    CHECK(rc.updates > 0);
    CHECK_FALSE(same_params(b, c));
}

TEST_CASE("frozen policies are deterministic") {
    Scenario s = short_circle(0.3);
    s.training.learning_rate = 0.0;
    Trainer a(s, 9), b(s, 9);
    EpisodeResult r0 = a.run_episode(0, true);
    EpisodeResult r1 = a.run_episode(1, true);
    EpisodeResult r2 = b.run_episode(0, true);
    CHECK(r0.l_mean > 0.0);
    CHECK(r0.l_mean == r1.l_mean);
    CHECK(r0.l_mean == r2.l_mean);
}

TEST_CASE("checkpoint restore reproduces the next episode") {
    Scenario s = short_circle(0.3);
    Trainer a(s, 4);
    a.run_episode(0, true);
    nlohmann::json ck = nlohmann::json::parse(a.checkpoint(0).dump());
    std::ostringstream ea, eb;
    EpisodeSinks sa, sb;
    sa.ticks = &ea;
    sb.ticks = &eb;
    EpisodeResult next_a = a.run_episode(1, true, sa);

    Trainer b(s, 4);
    CHECK(b.restore(ck) == 0);
    EpisodeResult next_b = b.run_episode(1, true, sb);
    CHECK(next_a.l_mean == next_b.l_mean);
    CHECK(ea.str() == eb.str());
    CHECK(same_params(a, b));
}

TEST_CASE("restore rejects mismatched shapes") {
    Trainer a(short_circle(0.1), 4);
    nlohmann::json ck = a.checkpoint(0);
    Trainer b(circle_scenario(3, false), 4);
    CHECK_THROWS(b.restore(ck));
}

TEST_CASE("tension-reference learning has only the load net") {
    Scenario s = slot_scenario(3);
    Trainer t(s, 1);
    CHECK_FALSE(t.learns_quads());
    REQUIRE(t.learns_load());
    CHECK(t.load_policy()->net.output_dim() == 1);
    CHECK(t.load_policy()->net.input_dim() == 3);
}

TEST_CASE("CSV headers") {
    std::ostringstream e, st, te;
    write_episode_csv_header(e, 2);
    CHECK(e.str() == "episode,tick,L_mean_running,loss_q0,loss_q1,loss_l,rounds,tension_gap_max\n");
    write_tension_csv_header(te, 2);
    CHECK(te.str() == "t,T0_actual,T0_mpc,T1_actual,T1_mpc,beta,passing\n");
    write_state_csv_header(st, 1);
    CHECK(st.str().rfind("t,q0_px,q0_py,q0_pz,q0_vx", 0) == 0);
    CHECK(st.str().find("l_ref_pz\n") != std::string::npos);
}
