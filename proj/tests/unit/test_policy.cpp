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
#include <limits>
#include <random>

#include "multilift/checks.hpp"
#include "multilift/policy.hpp"

using namespace multilift;

namespace {

Vec random_vec(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = nd(rng);
    return v;
}

}  // namespace

TEST_CASE("zero parameters give Theta = 0.5") {
    PolicyNet net(12, 30, 28, 3);
    net.set_parameters(Vec::Zero(net.num_params()));
    Vec th = net.forward(Vec::LinSpaced(12, -1.0, 1.0));
    CHECK(th.size() == 28);
    for (int i = 0; i < th.size(); ++i) CHECK(th(i) == 0.5);
}

TEST_CASE("outputs stay strictly inside (0, 1)") {
    PolicyNet net(3, 30, 1, 5);
    std::mt19937_64 rng(11);
    for (int k = 0; k < 50; ++k) {
        double t = net.forward(random_vec(3, rng, 100.0))(0);
        CHECK(t > 0.0);
        CHECK(t < 1.0);
    }
}

TEST_CASE("bounds map") {
    HyperBounds b = HyperBounds::uniform(3, 0.01, 100.0);
    CHECK(b.to_hyperparameters(Vec::Zero(3))(0) == 0.01);
    CHECK(b.to_hyperparameters(Vec::Ones(3))(1) == 100.0);
    CHECK(b.to_hyperparameters(Vec::Constant(3, 0.5))(2) == doctest::Approx(50.005).epsilon(1e-14));
    Vec th = Vec::LinSpaced(3, 0.5, 80.0);
    CHECK((b.to_hyperparameters(b.to_normalized(th)) - th).cwiseAbs().maxCoeff() < 1e-12);
    HyperBounds bad = HyperBounds::uniform(2, 1.0, 1.0);
    CHECK_THROWS(bad.validate());
}

TEST_CASE("backprop matches finite differences") {
    CheckReport r = check_policy_backprop(42);
    CHECK(r.pass());
    CHECK(r.worst_ratio() < 1.0);
}

TEST_CASE("zero gradient leaves the parameters unchanged") {
    PolicyNet net(12, 30, 28, 7);
    AdamState adam;
    Vec before = net.parameters();
    CHECK(apply_gradient(net, adam, Vec::Zero(net.num_params())));
    CHECK((net.parameters() - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-finite gradient skips the update") {
    AgentPolicy p;
    p.net = PolicyNet(12, 30, 28, 7);
    p.bounds = HyperBounds::uniform(28, 0.01, 100.0);
    Vec before = p.net.parameters();
    Vec g = Vec::Ones(p.net.num_params());
    g(5) = std::numeric_limits<double>::quiet_NaN();
    if (!apply_gradient(p.net, p.adam, g)) ++p.skipped_updates;
    CHECK(p.skipped_updates == 1);
    CHECK(p.adam.step == 0);
    CHECK((p.net.parameters() - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quadratic surrogate decreases and the spectral bound holds") {
    PolicyNet net(12, 30, 28, 9);
    AdamState adam;
    std::mt19937_64 rng(3);
    Vec obs = random_vec(12, rng);
    Vec target = Vec::Constant(28, 0.8);
    auto loss = [&] { return (net.forward(obs) - target).squaredNorm(); };
    double prev = loss();
    for (int k = 0; k < 100; ++k) {
        ForwardCache c;
        Vec th = net.forward(obs, &c);
        REQUIRE(apply_gradient(net, adam, net.backward(c, 2.0 * (th - target))));
        double now = loss();
        CHECK(now < prev);
        prev = now;
        for (double s : net.spectral_norms()) CHECK(s <= 1.0 + 1e-3);
    }
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    AgentPolicy p;
    p.net = PolicyNet(15, 30, 27, 13);
    p.bounds = HyperBounds::uniform(27, 0.01, 100.0);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 3; ++k) apply_gradient(p.net, p.adam, random_vec(p.net.num_params(), rng));
    AgentPolicy q = AgentPolicy::from_json(nlohmann::json::parse(p.to_json().dump()));
    CHECK((q.net.parameters() - p.net.parameters()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(q.adam.step == p.adam.step);
    CHECK((q.adam.m - p.adam.m).cwiseAbs().maxCoeff() == 0.0);
    Vec obs = random_vec(15, rng);
    Vec a = p.theta(obs), b = q.theta(obs);
    for (int i = 0; i < a.size(); ++i) CHECK(a(i) == b(i));
}

TEST_CASE("output bias sets the outputs when hidden biases vanish") {
    PolicyNet net(12, 30, 28, 21);
    Vec prm = net.parameters();
    prm.segment(12 * 30, 30).setZero();
    prm.segment(12 * 30 + 30 + 30 * 30, 30).setZero();
    net.set_parameters(prm);
    Vec want = Vec::LinSpaced(28, 0.05, 0.95);
    net.set_output_bias(want);
    CHECK((net.forward(Vec::Zero(12)) - want).cwiseAbs().maxCoeff() < 1e-9);
}
