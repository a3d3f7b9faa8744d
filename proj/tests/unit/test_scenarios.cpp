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
#include <filesystem>
#include <fstream>

#include "multilift/errors.hpp"
#include "multilift/scenarios.hpp"
#include "multilift/world.hpp"

using namespace multilift;

#ifndef MULTILIFT_SOURCE_DIR
#error "MULTILIFT_SOURCE_DIR must be defined"
#endif

TEST_CASE("static tension") {
    CHECK(static_tension(10.0, Vec3::Zero(), 0.0, 6) == doctest::Approx(10.0 * 9.81 / 6.0).epsilon(1e-15));
    CHECK(static_tension(10.0, Vec3::Zero(), 0.0, 6) == doctest::Approx(16.35).epsilon(1e-12));
    CHECK(static_tension(10.0, Vec3::Zero(), M_PI / 3.0, 6) == doctest::Approx(2.0 * 16.35).epsilon(1e-12));
}

TEST_CASE("hover equilibrium tensions hold the load still") {
    Scenario s = hover_fixture(3);
    s.system.load.com_bias.setZero();
    HoverEquilibrium eq = hover_equilibrium(s.system, s.path.center, s.tension_beta());
    World w(s.system.world_params(), eq.state);
    std::vector<Vec3> t;
    for (const auto& r : w.tensions()) t.push_back(r.on_load);
    Vec13 d = load_derivative(eq.state.load, t, w.params().load, w.params().g);
    CHECK(d.segment<3>(idx::v).norm() < 1e-9);
}

TEST_CASE("tilt schedule limits") {
    Scenario s = slot_scenario(3);
    const SlotSpec& slot = *s.slot;
    const double l0 = s.system.cable.natural_length;
    CHECK(tilt_schedule(slot.position, slot, l0) == doctest::Approx(slot.beta_max(l0)).epsilon(1e-15));
    CHECK(tilt_schedule(slot.position + Vec3(10.0, 0.0, 0.0), slot, l0) == doctest::Approx(slot.beta_min));
    CHECK(slot.beta_max(l0) > 0.0);
    SlotSpec tall = slot;
    tall.height = 3.0;
    CHECK_THROWS_AS(tall.beta_max(l0), ConfigError);
}

TEST_CASE("hover path is constant and circle path is consistent") {
    Scenario h = hover_fixture(3);
    PathSample a = sample_path(h.path, 0.0), b = sample_path(h.path, 3.7);
    CHECK((a.p - b.p).norm() == 0.0);
    CHECK(b.v.norm() == 0.0);

    Scenario c = circle_scenario(3, false);
    const double dt = 1e-3;
    for (double t : {0.5, 1.3, 2.0, 3.1}) {
        Vec3 fd = (sample_path(c.path, t + dt).p - 2.0 * sample_path(c.path, t).p + sample_path(c.path, t - dt).p) /
                  (dt * dt);
        CHECK((fd - sample_path(c.path, t).a).norm() < 1e-4);
        Vec3 fv = (sample_path(c.path, t + dt).p - sample_path(c.path, t - dt).p) / (2.0 * dt);
        CHECK((fv - sample_path(c.path, t).v).norm() < 1e-5);
    }
}

TEST_CASE("references respect cable geometry and thrust bounds") {
    for (const Scenario& s : {circle_scenario(3, true), figure8_scenario(3), slot_scenario(3)})
        CHECK_NOTHROW(check_references(s, s.training.episode_time));
    Scenario s = circle_scenario(3, false);
    ReferenceSample r = make_reference(s.system, sample_path(s.path, 1.0), 0.4, 0.4);
    LoadParams lp = s.system.load_params();
    for (int i = 0; i < 3; ++i) {
        double len = (r.quads[i].x.head<3>() - r.load.x.head<3>() - lp.attachments[i]).norm();
        CHECK(len == doctest::Approx(s.system.cable.natural_length).epsilon(1e-12));
    }
}

TEST_CASE("scenario JSON round-trip") {
    for (const Scenario& s : {hover_fixture(2), circle_scenario(3, true), slot_scenario(3), weight_learning_scenario()}) {
        nlohmann::json j = to_json(s);
        Scenario back = scenario_from_json(j);
        CHECK(to_json(back).dump() == j.dump());
    }
}

TEST_CASE("shipped scenario files match the built-ins") {
    const std::filesystem::path dir = std::filesystem::path(MULTILIFT_SOURCE_DIR) / "scenarios";
    struct Item {
        const char* file;
        Scenario s;
    };
    const Item items[] = {{"hover-3.json", hover_fixture(3)},
                          {"circle-3-uniform.json", circle_scenario(3, false)},
                          {"circle-3-biased.json", circle_scenario(3, true)},
                          {"figure8-3.json", figure8_scenario(3)},
                          {"slot-3.json", slot_scenario(3)},
                          {"weights-6.json", weight_learning_scenario()}};
    for (const auto& it : items) {
        CAPTURE(it.file);
        Scenario loaded = load_scenario((dir / it.file).string());
        CHECK(to_json(loaded).dump() == to_json(it.s).dump());
    }
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ConfigError);
    nlohmann::json j = to_json(hover_fixture(2));
    j["system"]["num_quads"] = 0;
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
    nlohmann::json k = to_json(hover_fixture(2));
    apply_override(k, "training.learning_rate=0.5");
    CHECK(scenario_from_json(k).training.learning_rate == 0.5);
}
