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

#include <random>

#include "multilift/checks.hpp"
#include "multilift/dsp.hpp"

using namespace multilift;

namespace {

struct RandomSteps {
    int n = 2;
    std::vector<int> quad_dims{5, 3};
    int load_dim = 4;
    std::mt19937_64 rng{17};

    Mat m(int r, int c, double scale = 0.3) {
        std::normal_distribution<double> nd(0.0, scale);
        Mat a(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) a(i, j) = nd(rng);
        return a;
    }

    SensitivityStep step(int t) {
        SensitivityStep s;
        s.t = t;
        for (int i = 0; i < n; ++i) {
            s.Fi.push_back(m(13, 13));
            s.Fil.push_back(m(13, 13));
            s.Gi.push_back(m(13, 4));
            s.Gil.push_back(m(13, n));
            s.Ui.push_back(quad_dims[i] > 0 ? m(4, quad_dims[i]) : Mat(4, 0));
            s.Fli.push_back(m(13, 13));
            s.dul_dxi.push_back(m(n, 13));
        }
        s.Fl = m(13, 13);
        s.Gl = m(13, n);
        s.Ul = load_dim > 0 ? m(n, load_dim) : Mat(n, 0);
        return s;
    }

    std::vector<SensitivityStep> steps(int count) {
        std::vector<SensitivityStep> out;
        for (int t = 0; t < count; ++t) out.push_back(step(t));
        return out;
    }
};

bool bit_equal(const SensitivityState& a, const SensitivityState& b) {
    auto eq = [](const Mat& x, const Mat& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && (x.size() == 0 || (x.array() == y.array()).all());
    };
    for (size_t o = 0; o < a.quad_owners.size(); ++o) {
        if (!eq(a.quad_owners[o].load, b.quad_owners[o].load)) return false;
        for (size_t k = 0; k < a.quad_owners[o].quads.size(); ++k)
            if (!eq(a.quad_owners[o].quads[k], b.quad_owners[o].quads[k])) return false;
    }
    if (!eq(a.load_owner.load, b.load_owner.load)) return false;
    for (size_t k = 0; k < a.load_owner.quads.size(); ++k)
        if (!eq(a.load_owner.quads[k], b.load_owner.quads[k])) return false;
    return true;
}

double max_abs(const SensitivityState& a) {
    double m = 0.0;
    auto f = [&](const Mat& x) {
        if (x.size() > 0) m = std::max(m, x.cwiseAbs().maxCoeff());
    };
    for (const auto& o : a.quad_owners) {
        f(o.load);
        for (const auto& q : o.quads) f(q);
    }
    f(a.load_owner.load);
    for (const auto& q : a.load_owner.quads) f(q);
    return m;
}

}  // namespace

TEST_CASE("parallel propagation equals serial bitwise") {
    for (CouplingMode mode : {CouplingMode::Pairwise, CouplingMode::Full}) {
        RandomSteps r;
        auto steps = r.steps(8);
        auto serial = propagate(steps, r.n, r.quad_dims, r.load_dim, mode, 1);
        auto par = propagate(steps, r.n, r.quad_dims, r.load_dim, mode, 3);
        REQUIRE(serial.size() == 9);
        for (size_t t = 0; t < serial.size(); ++t) CHECK(bit_equal(serial[t], par[t]));
    }
}

TEST_CASE("zero input maps keep the sensitivities at zero") {
    RandomSteps r;
    auto steps = r.steps(6);
    for (auto& s : steps) {
        for (auto& u : s.Ui) u.setZero();
        s.Ul.setZero();
    }
    auto out = propagate(steps, r.n, r.quad_dims, r.load_dim, CouplingMode::Full, 1);
    for (const auto& x : out) CHECK(max_abs(x) == 0.0);
}

TEST_CASE("propagation is linear in the input maps") {
    RandomSteps r;
    auto a = r.steps(5);
    auto b = a;
    for (auto& s : b) {
        for (auto& u : s.Ui) u *= 2.0;
        s.Ul *= 2.0;
    }
    auto xa = propagate(a, r.n, r.quad_dims, r.load_dim, CouplingMode::Pairwise, 1);
    auto xb = propagate(b, r.n, r.quad_dims, r.load_dim, CouplingMode::Pairwise, 1);
    const Mat& pa = xa.back().quad_owners[1].quads[1];
    const Mat& pb = xb.back().quad_owners[1].quads[1];
    CHECK((pb - 2.0 * pa).norm() <= 1e-12 * pb.norm());
    CHECK((xb.back().load_owner.load - 2.0 * xa.back().load_owner.load).norm() <=
          1e-12 * xb.back().load_owner.load.norm());
}

TEST_CASE("single quadrotor reduces to the stacked recursion") {
    RandomSteps r;
    r.n = 1;
    r.quad_dims = {6};
    r.load_dim = 0;
    auto steps = r.steps(7);
    auto out = propagate(steps, 1, r.quad_dims, 0, CouplingMode::Pairwise, 1);
    Mat z = Mat::Zero(26, 6);
    for (const auto& s : steps) {
        Mat a(26, 26);
        a << s.Fi[0], s.Fil[0], s.Fli[0], s.Fl;
        Mat b = Mat::Zero(26, 6);
        b.topRows(13) = s.Gi[0] * s.Ui[0];
        z = a * z + b;
    }
    CHECK((out.back().quad_owners[0].quads[0] - z.topRows(13)).norm() <= 1e-12 * z.norm());
    CHECK((out.back().quad_owners[0].load - z.bottomRows(13)).norm() <= 1e-12 * z.norm());
    CHECK(out.back().load_owner.load.cols() == 0);
}

TEST_CASE("dimension mismatch is a structural error") {
    RandomSteps r;
    SensitivityStep s = r.step(0);
    s.Fi.pop_back();
    SensitivityState x = zero_sensitivity(r.n, r.quad_dims, r.load_dim);
    CHECK_THROWS(propagate_step(x, s, CouplingMode::Pairwise, 1));
}

TEST_CASE("window gradients on the fixture match closed-loop finite differences") {
    GradientFixture f = make_gradient_fixture(gradient_fixture_scenario(), 30);
    CheckReport r = check_dsp_theta(f, 10, CouplingMode::Pairwise);
    CHECK(r.pass());
}
