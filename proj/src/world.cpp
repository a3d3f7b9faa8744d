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

#include "multilift/world.hpp"

#include <Eigen/LU>
#include <cmath>

namespace multilift {

namespace {

bool is_spd(const Mat3& m) {
    if (!m.isApprox(m.transpose(), 1e-12)) return false;
    Eigen::LLT<Mat3> llt(m);
    return llt.info() == Eigen::Success;
}

constexpr int kQuadBlock = idx::nx + 4;

}  // namespace

void QuadParams::validate() const {
    if (!(mass > 0.0)) throw ConfigError("quadrotor mass must be positive");
    if (!is_spd(inertia)) throw ConfigError("quadrotor inertia must be symmetric positive definite");
    if (!(u_min.array() < u_max.array()).all()) throw ConfigError("quadrotor u_min must be < u_max");
    if (!(radius > 0.0)) throw ConfigError("quadrotor radius must be positive");
}

void LoadParams::validate() const {
    if (!(mass > 0.0)) throw ConfigError("load mass must be positive");
    if (attachments.empty()) throw ConfigError("load needs at least one attachment");
    if (!is_spd(inertia)) throw ConfigError("load inertia must be symmetric positive definite");
}

void CableParams::validate() const {
    if (!(stiffness > 0.0)) throw ConfigError("cable stiffness must be positive");
    if (!(damping >= 0.0)) throw ConfigError("cable damping must be non-negative");
    if (!(natural_length > 0.0)) throw ConfigError("cable natural length must be positive");
    if (!(max_tension > 0.0)) throw ConfigError("cable max tension must be positive");
}

void WorldParams::validate() const {
    if (quads.empty()) throw ConfigError("at least one quadrotor required");
    for (const auto& q : quads) q.validate();
    load.validate();
    cable.validate();
    if (load.num_cables() != num_quads())
        throw ConfigError("attachment count must equal quadrotor count");
    if (!(motor_tau > 0.0)) throw ConfigError("motor time constant must be positive");
}

std::vector<Vec3> ngon_attachments(int n, double radius, double height) {
    std::vector<Vec3> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * M_PI * i / n;
        pts.emplace_back(radius * std::cos(a), radius * std::sin(a), height);
    }
    return pts;
}

LoadCoupling::LoadCoupling(const LoadParams& load) {
    Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
    Mat3 rx = skew<double>(load.com_bias);
    m.topLeftCorner<3, 3>() = Mat3::Identity();
    m.topRightCorner<3, 3>() = -rx;
    m.bottomLeftCorner<3, 3>() = load.mass * rx;
    m.bottomRightCorner<3, 3>() = load.inertia;
    Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(m);
    if (!lu.isInvertible() || lu.rcond() < 1e-12)
        throw NumericalFailure("singular load coupling matrix (inertia / CoM bias combination)");
    inv_ = lu.inverse();
}

TensionResult cable_tension(const RigidState& quad, const RigidState& load, int attach_index,
                            const CableParams& cable, const LoadParams& load_params) {
    if (attach_index < 0 || attach_index >= load_params.num_cables())
        throw Error("attachment index out of range");
    const Vec3& ri = load_params.attachments[attach_index];
    Mat3 rl = quat_to_rot<double>(load.q);
    Vec3 d = cable_vector<double>(quad.p, load.p, rl, ri);
    double len = d.norm();
    if (len < 1e-9) throw NumericalFailure("coincident quadrotor and attachment point");
    Vec3 d_dot = quad.v - rl * load.v - rl * load.w.cross(ri);
    TensionResult out;
    out.length = len;
    out.rate = d.dot(d_dot) / len;
    if (len > cable.natural_length) {
        out.magnitude = cable.stiffness * (len - cable.natural_length) +
                        cable.damping * cable.stiffness * out.rate;
    }
    out.on_load = out.magnitude * d / len;
    return out;
}

Vec13 quad_derivative(const RigidState& s, const Vec4& u, const Vec3& tension_on_quad,
                      const QuadParams& prm, double g) {
    return quad_ode<double>(s.to_vector(), u, tension_on_quad, prm, g);
}

Vec13 load_derivative(const RigidState& s, const std::vector<Vec3>& tensions, const LoadParams& prm,
                      double g) {
    if (static_cast<int>(tensions.size()) != prm.num_cables())
        throw Error("tension count must equal attachment count");
    LoadCoupling coupling(prm);
    Eigen::Matrix<double, 3, Eigen::Dynamic> t(3, tensions.size());
    for (size_t i = 0; i < tensions.size(); ++i) t.col(i) = tensions[i];
    return load_ode<double>(s.to_vector(), t, prm, coupling, g);
}

World::World(WorldParams params, WorldState state)
    : params_(std::move(params)), state_(std::move(state)) {
    params_.validate();
    coupling_ = LoadCoupling(params_.load);
    const int n = params_.num_quads();
    if (static_cast<int>(state_.quads.size()) != n) throw ConfigError("world state quadrotor count mismatch");
    if (state_.realized_u.empty()) state_.realized_u.assign(n, Vec4::Zero());
    if (static_cast<int>(state_.realized_u.size()) != n) throw ConfigError("realized control count mismatch");
}

Vec World::pack() const {
    const int n = params_.num_quads();
    Vec y(n * kQuadBlock + idx::nx);
    for (int i = 0; i < n; ++i) {
        y.segment<idx::nx>(i * kQuadBlock) = state_.quads[i].to_vector();
        y.segment<4>(i * kQuadBlock + idx::nx) = state_.realized_u[i];
    }
    y.tail<idx::nx>() = state_.load.to_vector();
    return y;
}

void World::unpack(const Vec& y) {
    const int n = params_.num_quads();
    for (int i = 0; i < n; ++i) {
        state_.quads[i] = RigidState::from_vector(y.segment<idx::nx>(i * kQuadBlock));
        state_.realized_u[i] = y.segment<4>(i * kQuadBlock + idx::nx);
    }
    state_.load = RigidState::from_vector(y.tail<idx::nx>());
}

Vec World::derivative(const Vec& y, const std::vector<Vec4>& commanded) const {
    const int n = params_.num_quads();
    Vec dy(y.size());
    RigidState load = RigidState::from_vector(y.tail<idx::nx>());
    Eigen::Matrix<double, 3, Eigen::Dynamic> on_load(3, n);
    for (int i = 0; i < n; ++i) {
        RigidState quad = RigidState::from_vector(y.segment<idx::nx>(i * kQuadBlock));
        Vec4 u = y.segment<4>(i * kQuadBlock + idx::nx);
        TensionResult t = cable_tension(quad, load, i, params_.cable, params_.load);
        on_load.col(i) = t.on_load;
        dy.segment<idx::nx>(i * kQuadBlock) =
            quad_ode<double>(quad.to_vector(), u, Vec3(-t.on_load), params_.quads[i], params_.g);
        dy.segment<4>(i * kQuadBlock + idx::nx) = (commanded[i] - u) / params_.motor_tau;
    }
    dy.tail<idx::nx>() = load_ode<double>(load.to_vector(), on_load, params_.load, coupling_, params_.g);
    return dy;
}

std::optional<StepFault> World::step(const std::vector<Vec4>& commanded, double dt) {
    if (!(dt > 0.0)) throw Error("time step must be positive");
    const int n = params_.num_quads();
    if (static_cast<int>(commanded.size()) != n) throw Error("commanded control count mismatch");
    Vec y = pack();
    auto fault_in = [&](const Vec& z) -> std::optional<StepFault> {
        for (int i = 0; i < n; ++i) {
            if (!z.segment<kQuadBlock>(i * kQuadBlock).allFinite())
                return StepFault{i, "NaN encountered in quadrotor " + std::to_string(i)};
        }
        if (!z.tail<idx::nx>().allFinite()) return StepFault{n, "NaN encountered in load"};
        return std::nullopt;
    };
    if (auto f0 = fault_in(y)) return f0;
    auto f = [&](const Vec& z) { return derivative(z, commanded); };
    Vec y1 = rk4<double>(f, y, dt);
    for (int i = 0; i < n; ++i) {
        auto q = y1.segment<4>(i * kQuadBlock + idx::q);
        q /= q.norm();
    }
    auto ql = y1.segment<4>(y1.size() - idx::nx + idx::q);
    ql /= ql.norm();
    if (auto f1 = fault_in(y1)) return f1;
    unpack(y1);
    state_.t += dt;
    return std::nullopt;
}

std::vector<TensionResult> World::tensions() const {
    std::vector<TensionResult> out;
    for (int i = 0; i < params_.num_quads(); ++i)
        out.push_back(cable_tension(state_.quads[i], state_.load, i, params_.cable, params_.load));
    return out;
}

double World::mechanical_energy() const {
    double e = 0.0;
    const double g = params_.g;
    for (int i = 0; i < params_.num_quads(); ++i) {
        const auto& s = state_.quads[i];
        const auto& p = params_.quads[i];
        e += 0.5 * p.mass * s.v.squaredNorm() + 0.5 * s.w.dot(p.inertia * s.w) + p.mass * g * s.p.z();
    }
    const auto& l = state_.load;
    const auto& lp = params_.load;
    Mat3 r = quat_to_rot<double>(l.q);
    e += 0.5 * lp.mass * l.v.squaredNorm() + lp.mass * l.v.dot(l.w.cross(lp.com_bias)) +
         0.5 * l.w.dot(lp.inertia * l.w);
    e += lp.mass * g * (l.p + r * lp.com_bias).z();
    for (const auto& t : tensions()) {
        double s = t.length - params_.cable.natural_length;
        if (s > 0.0) e += 0.5 * params_.cable.stiffness * s * s;
    }
    return e;
}

}  // namespace multilift
