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

#include "multilift/dual.hpp"
#include "multilift/geometry.hpp"

using namespace multilift;
using ad::D1;
using ad::D2;

namespace {

template <typename S>
S f(const S& x, const S& y) {
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    using ad::exp;
    using ad::log;
    using ad::sin;
    using ad::sqrt;
    return sin(x) * exp(y) + log(x * x + 1.0) / sqrt(y + 2.0) - 3.0 * x * y;
}

}  // namespace

TEST_CASE("first derivatives match closed form") {
    const double x = 0.7, y = -0.3;
    D1 dx = f(D1(x, 1.0), D1(y, 0.0));
    D1 dy = f(D1(x, 0.0), D1(y, 1.0));
    double fx = std::cos(x) * std::exp(y) + 2.0 * x / (x * x + 1.0) / std::sqrt(y + 2.0) - 3.0 * y;
    double fy = std::sin(x) * std::exp(y) - 0.5 * std::log(x * x + 1.0) * std::pow(y + 2.0, -1.5) - 3.0 * x;
    CHECK(dx.v == doctest::Approx(f(x, y)).epsilon(1e-15));
    CHECK(dx.d == doctest::Approx(fx).epsilon(1e-13));
    CHECK(dy.d == doctest::Approx(fy).epsilon(1e-13));
}

TEST_CASE("nested duals give mixed second derivatives") {
    const double x = 0.7, y = -0.3;
    D2 a(D1(x, 1.0), D1(0.0, 0.0));
    D2 b(D1(y, 0.0), D1(1.0, 0.0));
    D2 c = f(a, b);
    double fxy = std::cos(x) * std::exp(y) - x / (x * x + 1.0) * std::pow(y + 2.0, -1.5) - 3.0;
    CHECK(c.d.d == doctest::Approx(fxy).epsilon(1e-12));
    const double h = 1e-4;
    double fd = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h);
    CHECK(c.d.d == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("dual scalars work inside Eigen expressions") {
    Vec4T<D1> q(D1(0.9), D1(0.1), D1(-0.2), D1(0.3));
    q(2).d = 1.0;
    Mat3T<D1> r = quat_to_rot<D1>(q);
    Vec4 qp(0.9, 0.1, -0.2 + 1e-6, 0.3), qm(0.9, 0.1, -0.2 - 1e-6, 0.3);
    Mat3 fd = (quat_to_rot<double>(qp) - quat_to_rot<double>(qm)) / 2e-6;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(r(i, j).d == doctest::Approx(fd(i, j)).epsilon(1e-8));
    Vec3T<D1> v(D1(1.0, 1.0), D1(2.0), D1(-1.0));
    D1 n = v.norm();
    CHECK(n.d == doctest::Approx(1.0 / std::sqrt(6.0)));
}
