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

#ifndef MULTILIFT_GEOMETRY_HPP
#define MULTILIFT_GEOMETRY_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "multilift/dual.hpp"

namespace multilift {

template <typename S> using Vec3T = Eigen::Matrix<S, 3, 1>;
template <typename S> using Vec4T = Eigen::Matrix<S, 4, 1>;
template <typename S> using Mat3T = Eigen::Matrix<S, 3, 3>;
template <typename S> using Vec13T = Eigen::Matrix<S, 13, 1>;
template <typename S> using VecXT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Vec13 = Eigen::Matrix<double, 13, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// State layout shared by quadrotors and the load: [p(3), v(3), q(4, scalar first), w(3)].
namespace idx {
constexpr int p = 0;
constexpr int v = 3;
constexpr int q = 6;
constexpr int w = 10;
constexpr int nx = 13;
constexpr int ne = 12;
}  // namespace idx

/// Quadrotor or load rigid-body state. v is body-frame for the load.
struct RigidState {
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec4 q = Vec4(1.0, 0.0, 0.0, 0.0);
    Vec3 w = Vec3::Zero();

    Vec13 to_vector() const {
        Vec13 x;
        x << p, v, q, w;
        return x;
    }
    static RigidState from_vector(const Vec13& x) {
        RigidState s;
        s.p = x.segment<3>(idx::p);
        s.v = x.segment<3>(idx::v);
        s.q = x.segment<4>(idx::q);
        s.w = x.segment<3>(idx::w);
        return s;
    }
    bool finite() const { return to_vector().allFinite(); }
};

template <typename S>
Mat3T<S> skew(const Vec3T<S>& a) {
    Mat3T<S> m;
    m << S(0.0), -a(2), a(1),
         a(2), S(0.0), -a(0),
         -a(1), a(0), S(0.0);
    return m;
}

template <typename S>
Vec3T<S> vee(const Mat3T<S>& m) {
    return Vec3T<S>(m(2, 1), m(0, 2), m(1, 0));
}

/// Rotation body->world of a scalar-first quaternion (quadratic form, no normalization).
template <typename S>
Mat3T<S> quat_to_rot(const Vec4T<S>& q) {
    const S& w = q(0);
    const S& x = q(1);
    const S& y = q(2);
    const S& z = q(3);
    Mat3T<S> r;
    r(0, 0) = 1.0 - 2.0 * (y * y + z * z);
    r(0, 1) = 2.0 * (x * y - w * z);
    r(0, 2) = 2.0 * (x * z + w * y);
    r(1, 0) = 2.0 * (x * y + w * z);
    r(1, 1) = 1.0 - 2.0 * (x * x + z * z);
    r(1, 2) = 2.0 * (y * z - w * x);
    r(2, 0) = 2.0 * (x * z - w * y);
    r(2, 1) = 2.0 * (y * z + w * x);
    r(2, 2) = 1.0 - 2.0 * (x * x + y * y);
    return r;
}

/// q_dot = 0.5 * Omega(w) q with Omega(w) = [[0, -w^T], [w, -[w]x]].
template <typename S>
Vec4T<S> quat_rate(const Vec4T<S>& q, const Vec3T<S>& w) {
    Vec4T<S> dq;
    dq(0) = -0.5 * (w(0) * q(1) + w(1) * q(2) + w(2) * q(3));
    Vec3T<S> qv(q(1), q(2), q(3));
    Vec3T<S> t = w * q(0) - w.cross(qv);
    dq(1) = 0.5 * t(0);
    dq(2) = 0.5 * t(1);
    dq(3) = 0.5 * t(2);
    return dq;
}

/// 0.5 * (R_ref^T R - R^T R_ref)^vee
template <typename S>
Vec3T<S> attitude_error(const Mat3T<S>& r, const Mat3T<S>& r_ref) {
    Mat3T<S> m = r_ref.transpose() * r - r.transpose() * r_ref;
    return 0.5 * vee<S>(m);
}

/// 12-dim tracking error [p - p_ref, v - v_ref, e_R, w - w_ref].
template <typename S>
Eigen::Matrix<S, 12, 1> tracking_error(const Vec13T<S>& x, const Vec13& ref) {
    Eigen::Matrix<S, 12, 1> e;
    for (int i = 0; i < 6; ++i) e(i) = x(i) - ref(i);
    Mat3T<S> r = quat_to_rot<S>(x.template segment<4>(idx::q));
    Mat3 r_ref = quat_to_rot<double>(ref.segment<4>(idx::q));
    Vec3T<S> er = attitude_error<S>(r, r_ref.template cast<S>());
    for (int i = 0; i < 3; ++i) e(6 + i) = er(i);
    for (int i = 0; i < 3; ++i) e(9 + i) = x(idx::w + i) - ref(idx::w + i);
    return e;
}

/// Hamilton product, scalar first.
inline Vec4 quat_mul(const Vec4& a, const Vec4& b) {
    Vec4 r;
    r(0) = a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3);
    r(1) = a(0) * b(1) + a(1) * b(0) + a(2) * b(3) - a(3) * b(2);
    r(2) = a(0) * b(2) - a(1) * b(3) + a(2) * b(0) + a(3) * b(1);
    r(3) = a(0) * b(3) + a(1) * b(2) - a(2) * b(1) + a(3) * b(0);
    return r;
}

/// Minimal rotation taking e3 onto the unit vector n (yaw-free).
inline Vec4 quat_from_z_axis(const Vec3& n) {
    Vec3 e3(0.0, 0.0, 1.0);
    Vec3 u = n.normalized();
    double c = e3.dot(u);
    Vec3 axis = e3.cross(u);
    double s = axis.norm();
    if (s < 1e-15) {
        if (c > 0.0) return Vec4(1.0, 0.0, 0.0, 0.0);
        return Vec4(0.0, 1.0, 0.0, 0.0);
    }
    axis /= s;
    double half = 0.5 * std::atan2(s, c);
    return Vec4(std::cos(half), std::sin(half) * axis(0), std::sin(half) * axis(1),
                std::sin(half) * axis(2));
}

/// Roll, pitch, yaw (ZYX convention) of a unit quaternion.
inline Vec3 quat_to_euler_zyx(const Vec4& q) {
    Mat3 r = quat_to_rot<double>(q);
    double yaw = std::atan2(r(1, 0), r(0, 0));
    double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    double roll = std::atan2(r(2, 1), r(2, 2));
    return Vec3(roll, pitch, yaw);
}

}  // namespace multilift

#endif  // MULTILIFT_GEOMETRY_HPP
