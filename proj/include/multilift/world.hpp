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

#ifndef MULTILIFT_WORLD_HPP
#define MULTILIFT_WORLD_HPP

#include <optional>
#include <string>
#include <vector>

#include "multilift/errors.hpp"
#include "multilift/geometry.hpp"

namespace multilift {

struct QuadParams {
    double mass = 1.5;
    Mat3 inertia = Vec3(0.02, 0.02, 0.04).asDiagonal();
    double radius = 0.15;
    Vec4 u_min = Vec4(0.5, -1.0, -1.0, -1.0);
    Vec4 u_max = Vec4(60.0, 1.0, 1.0, 1.0);

    void validate() const;
};

struct LoadParams {
    double mass = 10.0;
    Mat3 inertia = Vec3(0.875, 0.875, 1.667).asDiagonal();
    Vec3 com_bias = Vec3::Zero();
    std::vector<Vec3> attachments;
    double radius = 0.5;
    double half_height = 0.1;

    int num_cables() const { return static_cast<int>(attachments.size()); }
    void validate() const;
};

struct CableParams {
    double stiffness = 4000.0;
    double damping = 0.01;
    double natural_length = 2.0;
    double max_tension = 100.0;

    void validate() const;
};

/// Regular n-gon of attachment points of radius r on the plane z = height (body frame).
std::vector<Vec3> ngon_attachments(int n, double radius, double height);

/// Constant 6x6 coupling of (v_dot, w_dot) in the load equations, inverted once.
class LoadCoupling {
public:
    LoadCoupling() = default;
    explicit LoadCoupling(const LoadParams& load);
    const Eigen::Matrix<double, 6, 6>& inverse() const { return inv_; }

private:
    Eigen::Matrix<double, 6, 6> inv_ = Eigen::Matrix<double, 6, 6>::Identity();
};

/// p_i - p_l - R_l r_i
template <typename S>
Vec3T<S> cable_vector(const Vec3T<S>& quad_p, const Vec3T<S>& load_p, const Mat3T<S>& load_r,
                      const Vec3& attachment) {
    return quad_p - load_p - load_r * attachment.cast<S>();
}

/// Quadrotor rigid-body derivative with an applied world-frame cable force on its CoM.
template <typename S>
Vec13T<S> quad_ode(const Vec13T<S>& x, const Vec4T<S>& u, const Vec3T<S>& tension_on_quad,
                   const QuadParams& prm, double g) {
    Vec13T<S> dx;
    Vec4T<S> q = x.template segment<4>(idx::q);
    Vec3T<S> w = x.template segment<3>(idx::w);
    Mat3T<S> r = quat_to_rot<S>(q);
    Vec3T<S> thrust = r.col(2) * u(0);
    Vec3T<S> acc = (thrust + tension_on_quad) / prm.mass;
    acc(2) -= g;
    dx.template segment<3>(idx::p) = x.template segment<3>(idx::v);
    dx.template segment<3>(idx::v) = acc;
    dx.template segment<4>(idx::q) = quat_rate<S>(q, w);
    Mat3T<S> j = prm.inertia.cast<S>();
    Vec3T<S> tau(u(1), u(2), u(3));
    Vec3T<S> rhs = tau - w.cross(j * w);
    Mat3 jinv = prm.inertia.inverse();
    dx.template segment<3>(idx::w) = jinv.cast<S>() * rhs;
    return dx;
}

/// Load rigid-body derivative; tensions are world-frame forces on the load, one column per cable.
template <typename S>
Vec13T<S> load_ode(const Vec13T<S>& x, const Eigen::Matrix<S, 3, Eigen::Dynamic>& tensions,
                   const LoadParams& prm, const LoadCoupling& coupling, double g) {
    Vec13T<S> dx;
    Vec3T<S> v = x.template segment<3>(idx::v);
    Vec4T<S> q = x.template segment<4>(idx::q);
    Vec3T<S> w = x.template segment<3>(idx::w);
    Mat3T<S> r = quat_to_rot<S>(q);
    Mat3T<S> rt = r.transpose();
    const double m = prm.mass;
    Vec3T<S> rg = prm.com_bias.cast<S>();
    Mat3T<S> j = prm.inertia.cast<S>();

    Vec3T<S> force = Vec3T<S>::Zero();
    Vec3T<S> torque = Vec3T<S>::Zero();
    for (int i = 0; i < tensions.cols(); ++i) {
        Vec3T<S> tb = rt * tensions.col(i);
        force += tensions.col(i);
        torque += prm.attachments[i].cast<S>().cross(tb);
    }
    Vec3T<S> weight_world(S(0.0), S(0.0), S(m * g));
    Vec3T<S> weight_body = rt * weight_world;
    force(2) -= m * g;

    Vec3T<S> wxv = w.cross(v);
    Vec3T<S> a = -wxv - w.cross(w.cross(rg)) + (rt * force) / m;
    Vec3T<S> b = torque - rg.cross(weight_body) - w.cross(j * w) - m * rg.cross(wxv);
    Eigen::Matrix<S, 6, 1> rhs;
    rhs << a, b;
    Eigen::Matrix<S, 6, 1> sol = coupling.inverse().cast<S>() * rhs;

    dx.template segment<3>(idx::p) = r * v;
    dx.template segment<3>(idx::v) = sol.template head<3>();
    dx.template segment<4>(idx::q) = quat_rate<S>(q, w);
    dx.template segment<3>(idx::w) = sol.template tail<3>();
    return dx;
}

template <typename S, typename F>
VecXT<S> rk4(const F& f, const VecXT<S>& x, double dt) {
    VecXT<S> k1 = f(x);
    VecXT<S> k2 = f(VecXT<S>(x + (0.5 * dt) * k1));
    VecXT<S> k3 = f(VecXT<S>(x + (0.5 * dt) * k2));
    VecXT<S> k4 = f(VecXT<S>(x + dt * k3));
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <typename S, int N, typename F>
Eigen::Matrix<S, N, 1> rk4_fixed(const F& f, const Eigen::Matrix<S, N, 1>& x, double dt) {
    using V = Eigen::Matrix<S, N, 1>;
    V k1 = f(x);
    V k2 = f(V(x + (0.5 * dt) * k1));
    V k3 = f(V(x + (0.5 * dt) * k2));
    V k4 = f(V(x + dt * k3));
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct TensionResult {
    Vec3 on_load = Vec3::Zero();  ///< T^{l,i}, world frame
    double magnitude = 0.0;
    double length = 0.0;
    double rate = 0.0;
};

/// Hybrid elastic cable force between quadrotor i and attachment i.
TensionResult cable_tension(const RigidState& quad, const RigidState& load, int attach_index,
                            const CableParams& cable, const LoadParams& load_params);

Vec13 quad_derivative(const RigidState& s, const Vec4& u, const Vec3& tension_on_quad,
                      const QuadParams& prm, double g = 9.81);

Vec13 load_derivative(const RigidState& s, const std::vector<Vec3>& tensions, const LoadParams& prm,
                      double g = 9.81);

struct WorldParams {
    std::vector<QuadParams> quads;
    LoadParams load;
    CableParams cable;
    double g = 9.81;
    double motor_tau = 0.033;

    int num_quads() const { return static_cast<int>(quads.size()); }
    void validate() const;
};

struct WorldState {
    double t = 0.0;
    std::vector<RigidState> quads;
    RigidState load;
    std::vector<Vec4> realized_u;
};

struct StepFault {
    int agent = -1;  ///< quadrotor index, or n for the load
    std::string message;
};

class World {
public:
    World(WorldParams params, WorldState state);

    const WorldParams& params() const { return params_; }
    const WorldState& state() const { return state_; }
    WorldState& mutable_state() { return state_; }
    const LoadCoupling& coupling() const { return coupling_; }

    /// One RK4 step of all bodies and motor lags; returns a fault on non-finite states.
    std::optional<StepFault> step(const std::vector<Vec4>& commanded, double dt);

    std::vector<TensionResult> tensions() const;
    /// Total kinetic + gravitational + elastic energy.
    double mechanical_energy() const;

    Vec pack() const;
    void unpack(const Vec& y);
    Vec derivative(const Vec& y, const std::vector<Vec4>& commanded) const;

private:
    WorldParams params_;
    WorldState state_;
    LoadCoupling coupling_;
};

}  // namespace multilift

#endif  // MULTILIFT_WORLD_HPP
