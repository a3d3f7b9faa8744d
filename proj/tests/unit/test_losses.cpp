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

#include "multilift/checks.hpp"
#include "multilift/losses.hpp"

using namespace multilift;

namespace {

Vec13 state_at(const Vec3& p) {
    Vec13 x = Vec13::Zero();
    x.head<3>() = p;
    x(idx::q) = 1.0;
    return x;
}

}  // namespace

TEST_CASE("perfect tracking has zero loss and gradient") {
    Vec13 x = state_at(Vec3(0.2, -1.0, 1.5));
    x.segment<3>(idx::v) = Vec3(0.1, 0.2, 0.3);
    LossTerm t = tracking_term(x, x, Vec12::Ones());
    CHECK(t.value == 0.0);
    CHECK(t.grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single weighted deviation") {
    const double w = 3.0, d = 0.25;
    Vec12 wt = Vec12::Zero();
    wt(1) = w;
    Vec13 ref = state_at(Vec3(0.0, 1.0, 1.0));
    Vec13 x = ref;
    x(1) += d;
    LossTerm t = tracking_term(x, ref, wt);
    CHECK(t.value == doctest::Approx(w * d * d).epsilon(1e-15));
    CHECK(t.grad(1) == doctest::Approx(2.0 * w * d).epsilon(1e-15));
}

TEST_CASE("obstacle term limits") {
    Vec3 obs(1.0, 2.0, 0.5);
    LossTerm at = obstacle_term(state_at(obs), obs, 4.0, 2.0);
    CHECK(at.value == 4.0);
    CHECK(at.grad.cwiseAbs().maxCoeff() == 0.0);
    LossTerm far = obstacle_term(state_at(Vec3(1e3, 0.0, 0.0)), obs, 4.0, 2.0);
    CHECK(far.value < 1e-300);
}

TEST_CASE("slot term limits") {
    SlotSpec slot;
    slot.position = Vec3(-1.0, 1.0, 1.0);
    slot.lower_z = 0.95;
    const double alpha = 10.0, eta = 20.0, eta_s = 2.0, z_ref = 1.1;
    Vec3 far_p(20.0, -10.0, 1.3);
    LossTerm far = slot_term(state_at(far_p), z_ref, slot, alpha, eta, eta_s);
    CHECK(far.value == doctest::Approx(alpha * (far_p.z() - z_ref)).epsilon(1e-12));
    Vec3 at_p(slot.position.x(), slot.position.y(), 1.0);
    LossTerm at = slot_term(state_at(at_p), z_ref, slot, alpha, eta, eta_s);
    CHECK(at.value == doctest::Approx(alpha * std::exp(-eta * (1.0 - slot.lower_z))).epsilon(1e-12));
}

TEST_CASE("loss gradients match finite differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        CheckReport r = check_loss_gradients(seed);
        CHECK(r.pass());
    }
}
