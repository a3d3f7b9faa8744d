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

#include "multilift/agents.hpp"

#include <cmath>

#include "multilift/errors.hpp"

namespace multilift {

using ad::D1;
using ad::D2;
using std::log;
using ad::log;

namespace {

template <typename S>
Eigen::Matrix<S, 12, 1> error12(const VecXT<S>& x, const Vec13& ref, const Mat3& r_ref) {
    Eigen::Matrix<S, 12, 1> e;
    for (int i = 0; i < 6; ++i) e(i) = x(i) - ref(i);
    Vec4T<S> q(x(6), x(7), x(8), x(9));
    Mat3T<S> r = quat_to_rot<S>(q);
    Mat3T<S> m = r_ref.transpose() * r - r.transpose() * r_ref;
    e(6) = 0.5 * m(2, 1);
    e(7) = 0.5 * m(0, 2);
    e(8) = 0.5 * m(1, 0);
    for (int i = 0; i < 3; ++i) e(9 + i) = x(10 + i) - ref(10 + i);
    return e;
}

template <typename S>
Vec3T<S> seg3(const VecXT<S>& v, int off) {
    return Vec3T<S>(v(off), v(off + 1), v(off + 2));
}

template <typename S>
Vec4T<S> seg4(const VecXT<S>& v, int off) {
    return Vec4T<S>(v(off), v(off + 1), v(off + 2), v(off + 3));
}

void check_traj_len(size_t got, size_t want, const char* what) {
    if (got != want) throw Error(std::string(what) + ": expected length " + std::to_string(want) + ", got " +
                                 std::to_string(got));
}

}  // namespace

Vec CostWeights::pack() const {
    Vec t(24 + qu.size());
    t << qx, qu, qxn;
    return t;
}

CostWeights CostWeights::unpack(const Vec& theta, int nu) {
    if (theta.size() != 24 + nu) throw Error("weight vector has wrong size");
    CostWeights w;
    w.qx = theta.head<12>();
    w.qu = theta.segment(12, nu);
    w.qxn = theta.tail<12>();
    return w;
}

// ---------------------------------------------------------------- quadrotor

QuadrotorOcp::QuadrotorOcp(Setup setup) : setup_(std::move(setup)) {
    setup_.quad.validate();
    if (setup_.horizon.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (!(setup_.horizon.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(setup_.horizon.gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (setup_.index < 0 || setup_.index >= setup_.num_cables) throw ConfigError("quadrotor index out of range");
    const int n = setup_.horizon.horizon;
    x0_ = Vec::Zero(13);
    x0_(6) = 1.0;
    Vec13 hover = Vec13::Zero();
    hover(6) = 1.0;
    x_ref_.assign(n + 1, hover);
    Vec uh = Vec::Zero(4);
    uh(0) = setup_.quad.mass * setup_.horizon.g;
    u_ref_.assign(n, uh);
    load_x_.assign(n + 1, hover);
    load_u_.assign(n, Vec::Zero(setup_.num_cables));
    peers_.clear();
    rebuild();
}

int QuadrotorOcp::param_dim() const {
    return kThetaDim + 13 + setup_.num_cables + 3 * static_cast<int>(peers_.size());
}

void QuadrotorOcp::set_initial_state(const Vec13& x0) { x0_ = x0; }

void QuadrotorOcp::set_theta(const Vec& theta) {
    if (theta.size() != kThetaDim) throw Error("quadrotor theta must have 28 entries");
    theta_ = theta;
    rebuild();
}

void QuadrotorOcp::set_references(const std::vector<Vec13>& x_ref, const std::vector<Vec>& u_ref) {
    const size_t n = setup_.horizon.horizon;
    check_traj_len(x_ref.size(), n + 1, "quadrotor state reference");
    check_traj_len(u_ref.size(), n, "quadrotor control reference");
    x_ref_ = x_ref;
    u_ref_ = u_ref;
    rebuild();
}

void QuadrotorOcp::set_externals(const std::vector<Vec13>& load_x, const std::vector<Vec>& load_u,
                                 const std::vector<std::vector<Vec13>>& peers) {
    const size_t n = setup_.horizon.horizon;
    check_traj_len(load_x.size(), n + 1, "external load states");
    check_traj_len(load_u.size(), n, "external load controls");
    for (const auto& pj : peers) check_traj_len(pj.size(), n + 1, "external peer states");
    for (const auto& u : load_u)
        if (u.size() != setup_.num_cables) throw Error("external load control has wrong size");
    load_x_ = load_x;
    load_u_ = load_u;
    peers_ = peers;
    rebuild();
}

void QuadrotorOcp::rebuild() {
    const int n = setup_.horizon.horizon;
    r_ref_.resize(n + 1);
    for (int k = 0; k <= n; ++k) r_ref_[k] = quat_to_rot<double>(x_ref_[k].segment<4>(idx::q));
    p_.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        Vec p(param_dim());
        p.head(kThetaDim) = theta_;
        p.segment<13>(kThetaDim) = load_x_[k];
        p.segment(kThetaDim + 13, setup_.num_cables) = load_u_[std::min(k, n - 1)];
        int off = kThetaDim + 13 + setup_.num_cables;
        for (const auto& pj : peers_) {
            p.segment<3>(off) = pj[k].head<3>();
            off += 3;
        }
        p_[k] = p;
    }
}

template <typename S>
VecXT<S> QuadrotorOcp::dyn(int, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const {
    const int lo = kThetaDim;
    Vec3T<S> pl = seg3<S>(p, lo);
    Mat3T<S> rl = quat_to_rot<S>(seg4<S>(p, lo + 6));
    S tension = p(lo + 13 + setup_.index);
    Vec4T<S> uu(u(0), u(1), u(2), u(3));
    const bool attached = setup_.attached;
    auto f = [&](const Vec13T<S>& s) {
        Vec3T<S> on_quad = Vec3T<S>::Zero();
        if (attached) {
            Vec3T<S> d = cable_vector<S>(s.template head<3>(), pl, rl, setup_.attachment);
            on_quad = d * (-tension / d.norm());
        }
        return quad_ode<S>(s, uu, on_quad, setup_.quad, setup_.horizon.g);
    };
    Vec13T<S> x0 = x;
    Vec13T<S> x1 = rk4_fixed<S, 13>(f, x0, setup_.horizon.dt);
    return x1;
}

template <typename S>
S QuadrotorOcp::constraint_terms(const VecXT<S>& x, const VecXT<S>& p) const {
    const double gamma = setup_.horizon.gamma;
    S c(0.0);
    Vec3T<S> pos = seg3<S>(x, 0);
    if (setup_.attached) {
        const int lo = kThetaDim;
        Vec3T<S> pl = seg3<S>(p, lo);
        Mat3T<S> rl = quat_to_rot<S>(seg4<S>(p, lo + 6));
        S h = cable_vector<S>(pos, pl, rl, setup_.attachment).norm() - setup_.natural_length;
        c += h * h / (2.0 * gamma);
    }
    int off = kThetaDim + 13 + setup_.num_cables;
    const double sep = 2.0 * setup_.quad.radius;
    for (size_t j = 0; j < peers_.size(); ++j) {
        S dist = (pos - seg3<S>(p, off)).norm();
        c -= gamma * log(dist - sep);
        off += 3;
    }
    if (setup_.obstacle) {
        S dist = (pos - setup_.obstacle->position.cast<S>()).norm();
        c -= gamma * log(dist - setup_.quad.radius - setup_.obstacle->radius);
    }
    return c;
}

template <typename S>
S QuadrotorOcp::cost(int k, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const {
    const double gamma = setup_.horizon.gamma;
    Eigen::Matrix<S, 12, 1> e = error12<S>(x, x_ref_[k], r_ref_[k]);
    S c(0.0);
    for (int i = 0; i < 12; ++i) c += 0.5 * p(i) * e(i) * e(i);
    for (int j = 0; j < 4; ++j) {
        S eu = u(j) - u_ref_[k](j);
        c += 0.5 * p(12 + j) * eu * eu;
        c -= gamma * (log(u(j) - setup_.quad.u_min(j)) + log(setup_.quad.u_max(j) - u(j)));
    }
    c += constraint_terms<S>(x, p);
    return c;
}

template <typename S>
S QuadrotorOcp::terminal(const VecXT<S>& x, const VecXT<S>& p) const {
    const int n = setup_.horizon.horizon;
    Eigen::Matrix<S, 12, 1> e = error12<S>(x, x_ref_[n], r_ref_[n]);
    S c(0.0);
    for (int i = 0; i < 12; ++i) c += 0.5 * p(16 + i) * e(i) * e(i);
    c += constraint_terms<S>(x, p);
    return c;
}

std::optional<std::string> QuadrotorOcp::violated_constraint(int k, const Vec& x, const Vec* u) const {
    if (!x.allFinite()) return std::string("non-finite state");
    if (u) {
        for (int j = 0; j < 4; ++j) {
            if (!((*u)(j) > setup_.quad.u_min(j))) return "control lower bound " + std::to_string(j);
            if (!((*u)(j) < setup_.quad.u_max(j))) return "control upper bound " + std::to_string(j);
        }
    }
    Vec3 pos = x.head<3>();
    for (size_t j = 0; j < peers_.size(); ++j) {
        if (!((pos - peers_[j][k].head<3>()).norm() > 2.0 * setup_.quad.radius))
            return "inter-robot separation";
    }
    if (setup_.obstacle) {
        if (!((pos - setup_.obstacle->position).norm() > setup_.quad.radius + setup_.obstacle->radius))
            return "obstacle";
    }
    return std::nullopt;
}

std::vector<Vec> QuadrotorOcp::initial_controls() const {
    std::vector<Vec> us = u_ref_;
    for (auto& u : us) {
        for (int j = 0; j < 4; ++j) {
            double lo = setup_.quad.u_min(j);
            double hi = setup_.quad.u_max(j);
            double margin = 1e-3 * (hi - lo);
            u(j) = std::clamp(u(j), lo + margin, hi - margin);
        }
    }
    return us;
}

std::vector<std::vector<int>> QuadrotorOcp::cost_blocks() const {
    return {{0, 1, 2}, {3, 4, 5}, {6, 7, 8, 9}, {10, 11, 12}, {13}, {14}, {15}, {16}};
}

template VecXT<double> QuadrotorOcp::dyn<double>(int, const VecXT<double>&, const VecXT<double>&,
                                                 const VecXT<double>&) const;
template VecXT<D1> QuadrotorOcp::dyn<D1>(int, const VecXT<D1>&, const VecXT<D1>&, const VecXT<D1>&) const;
template VecXT<D2> QuadrotorOcp::dyn<D2>(int, const VecXT<D2>&, const VecXT<D2>&, const VecXT<D2>&) const;
template double QuadrotorOcp::cost<double>(int, const VecXT<double>&, const VecXT<double>&,
                                           const VecXT<double>&) const;
template D1 QuadrotorOcp::cost<D1>(int, const VecXT<D1>&, const VecXT<D1>&, const VecXT<D1>&) const;
template D2 QuadrotorOcp::cost<D2>(int, const VecXT<D2>&, const VecXT<D2>&, const VecXT<D2>&) const;
template double QuadrotorOcp::terminal<double>(const VecXT<double>&, const VecXT<double>&) const;
template D1 QuadrotorOcp::terminal<D1>(const VecXT<D1>&, const VecXT<D1>&) const;
template D2 QuadrotorOcp::terminal<D2>(const VecXT<D2>&, const VecXT<D2>&) const;

// --------------------------------------------------------------------- load

LoadOcp::LoadOcp(Setup setup) : setup_(std::move(setup)) {
    setup_.load.validate();
    setup_.cable.validate();
    coupling_ = LoadCoupling(setup_.load);
    if (setup_.horizon.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (!(setup_.horizon.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(setup_.horizon.gamma > 0.0)) throw ConfigError("gamma must be positive");
    const int n = setup_.horizon.horizon;
    const int nc = num_cables();
    if (setup_.mode == ThetaMode::TensionOffset) {
        if (setup_.fixed_weights.qu.size() != nc) throw ConfigError("fixed load weights need n control entries");
        theta_ = Vec::Zero(1);
    } else {
        theta_ = Vec::Ones(24 + nc);
    }
    x0_ = Vec::Zero(13);
    x0_(6) = 1.0;
    Vec13 hover = Vec13::Zero();
    hover(6) = 1.0;
    x_ref_.assign(n + 1, hover);
    u_ref_.assign(n, Vec::Constant(nc, setup_.load.mass * setup_.horizon.g / nc));
    quads_.assign(nc, std::vector<Vec13>(n + 1, hover));
    for (int i = 0; i < nc; ++i) {
        for (auto& q : quads_[i]) {
            q.head<3>() = setup_.load.attachments[i] + Vec3(0.0, 0.0, setup_.cable.natural_length);
        }
    }
    rebuild();
}

int LoadOcp::theta_dim() const {
    return setup_.mode == ThetaMode::Weights ? 24 + num_cables() : 1;
}

void LoadOcp::set_initial_state(const Vec13& x0) { x0_ = x0; }

void LoadOcp::set_theta(const Vec& theta) {
    if (theta.size() != theta_dim()) throw Error("load theta has wrong size");
    theta_ = theta;
    rebuild();
}

void LoadOcp::set_references(const std::vector<Vec13>& x_ref, const std::vector<Vec>& u_ref) {
    const size_t n = setup_.horizon.horizon;
    check_traj_len(x_ref.size(), n + 1, "load state reference");
    check_traj_len(u_ref.size(), n, "load control reference");
    x_ref_ = x_ref;
    u_ref_ = u_ref;
    rebuild();
}

void LoadOcp::set_externals(const std::vector<std::vector<Vec13>>& quads) {
    const size_t n = setup_.horizon.horizon;
    if (static_cast<int>(quads.size()) != num_cables()) throw Error("external quadrotor count mismatch");
    for (const auto& q : quads) check_traj_len(q.size(), n + 1, "external quadrotor states");
    quads_ = quads;
    rebuild();
}

void LoadOcp::rebuild() {
    const int n = setup_.horizon.horizon;
    r_ref_.resize(n + 1);
    for (int k = 0; k <= n; ++k) r_ref_[k] = quat_to_rot<double>(x_ref_[k].segment<4>(idx::q));
    p_.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        Vec p(param_dim());
        p.head(theta_dim()) = theta_;
        for (int i = 0; i < num_cables(); ++i) p.segment<13>(theta_dim() + 13 * i) = quads_[i][k];
        p_[k] = p;
    }
}

template <typename S>
VecXT<S> LoadOcp::dyn(int, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const {
    const int nc = num_cables();
    const int off = theta_dim();
    std::vector<Vec3T<S>> quad_pos(nc);
    for (int i = 0; i < nc; ++i) quad_pos[i] = seg3<S>(p, off + 13 * i);
    auto f = [&](const Vec13T<S>& s) {
        Vec3T<S> pl = s.template head<3>();
        Mat3T<S> rl = quat_to_rot<S>(s.template segment<4>(idx::q));
        Eigen::Matrix<S, 3, Eigen::Dynamic> t(3, nc);
        for (int i = 0; i < nc; ++i) {
            Vec3T<S> d = cable_vector<S>(quad_pos[i], pl, rl, setup_.load.attachments[i]);
            t.col(i) = d * (u(i) / d.norm());
        }
        return load_ode<S>(s, t, setup_.load, coupling_, setup_.horizon.g);
    };
    Vec13T<S> x0 = x;
    Vec13T<S> x1 = rk4_fixed<S, 13>(f, x0, setup_.horizon.dt);
    return x1;
}

template <typename S>
S LoadOcp::cable_terms(const VecXT<S>& x, const VecXT<S>& p) const {
    const double gamma = setup_.horizon.gamma;
    const int nc = num_cables();
    const int off = theta_dim();
    Vec3T<S> pl = seg3<S>(x, 0);
    Mat3T<S> rl = quat_to_rot<S>(seg4<S>(x, 6));
    S c(0.0);
    for (int i = 0; i < nc; ++i) {
        S h = cable_vector<S>(seg3<S>(p, off + 13 * i), pl, rl, setup_.load.attachments[i]).norm() -
              setup_.cable.natural_length;
        c += h * h / (2.0 * gamma);
    }
    if (setup_.obstacle) {
        S dist = (pl - setup_.obstacle->position.cast<S>()).norm();
        c -= gamma * log(dist - setup_.load.radius - setup_.obstacle->radius);
    }
    return c;
}

template <typename S>
S LoadOcp::cost(int k, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const {
    const double gamma = setup_.horizon.gamma;
    const int nc = num_cables();
    Eigen::Matrix<S, 12, 1> e = error12<S>(x, x_ref_[k], r_ref_[k]);
    S c(0.0);
    const bool weights = setup_.mode == ThetaMode::Weights;
    const auto& fw = setup_.fixed_weights;
    S offset = weights ? S(0.0) : p(0);
    for (int i = 0; i < 12; ++i) {
        S w = weights ? p(i) : S(fw.qx(i));
        c += 0.5 * w * e(i) * e(i);
    }
    const double tmax = setup_.cable.max_tension;
    for (int j = 0; j < nc; ++j) {
        S w = weights ? p(12 + j) : S(fw.qu(j));
        S eu = u(j) - u_ref_[k](j) - offset;
        c += 0.5 * w * eu * eu;
        c -= gamma * (log(u(j)) + log(tmax - u(j)));
    }
    c += cable_terms<S>(x, p);
    return c;
}

template <typename S>
S LoadOcp::terminal(const VecXT<S>& x, const VecXT<S>& p) const {
    const int n = setup_.horizon.horizon;
    const int nc = num_cables();
    Eigen::Matrix<S, 12, 1> e = error12<S>(x, x_ref_[n], r_ref_[n]);
    const bool weights = setup_.mode == ThetaMode::Weights;
    S c(0.0);
    for (int i = 0; i < 12; ++i) {
        S w = weights ? p(12 + nc + i) : S(setup_.fixed_weights.qxn(i));
        c += 0.5 * w * e(i) * e(i);
    }
    c += cable_terms<S>(x, p);
    return c;
}

std::optional<std::string> LoadOcp::violated_constraint(int, const Vec& x, const Vec* u) const {
    if (!x.allFinite()) return std::string("non-finite state");
    if (u) {
        for (int j = 0; j < num_cables(); ++j) {
            if (!((*u)(j) > 0.0)) return "tension lower bound " + std::to_string(j);
            if (!((*u)(j) < setup_.cable.max_tension)) return "tension upper bound " + std::to_string(j);
        }
    }
    if (setup_.obstacle) {
        if (!((x.head<3>() - setup_.obstacle->position).norm() > setup_.load.radius + setup_.obstacle->radius))
            return "obstacle";
    }
    return std::nullopt;
}

std::vector<Vec> LoadOcp::initial_controls() const {
    std::vector<Vec> us = u_ref_;
    const double tmax = setup_.cable.max_tension;
    for (auto& u : us) {
        for (int j = 0; j < u.size(); ++j) u(j) = std::clamp(u(j), 1e-3 * tmax, (1.0 - 1e-3) * tmax);
    }
    return us;
}

std::vector<std::vector<int>> LoadOcp::cost_blocks() const {
    std::vector<std::vector<int>> blocks = {{0, 1, 2, 6, 7, 8, 9}, {3, 4, 5}, {10, 11, 12}};
    for (int j = 0; j < num_cables(); ++j) blocks.push_back({13 + j});
    return blocks;
}

template VecXT<double> LoadOcp::dyn<double>(int, const VecXT<double>&, const VecXT<double>&,
                                            const VecXT<double>&) const;
template VecXT<D1> LoadOcp::dyn<D1>(int, const VecXT<D1>&, const VecXT<D1>&, const VecXT<D1>&) const;
template VecXT<D2> LoadOcp::dyn<D2>(int, const VecXT<D2>&, const VecXT<D2>&, const VecXT<D2>&) const;
template double LoadOcp::cost<double>(int, const VecXT<double>&, const VecXT<double>&,
                                      const VecXT<double>&) const;
template D1 LoadOcp::cost<D1>(int, const VecXT<D1>&, const VecXT<D1>&, const VecXT<D1>&) const;
template D2 LoadOcp::cost<D2>(int, const VecXT<D2>&, const VecXT<D2>&, const VecXT<D2>&) const;
template double LoadOcp::terminal<double>(const VecXT<double>&, const VecXT<double>&) const;
template D1 LoadOcp::terminal<D1>(const VecXT<D1>&, const VecXT<D1>&) const;
template D2 LoadOcp::terminal<D2>(const VecXT<D2>&, const VecXT<D2>&) const;

}  // namespace multilift
