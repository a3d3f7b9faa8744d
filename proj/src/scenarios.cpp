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

#include "multilift/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "multilift/errors.hpp"

namespace multilift {

using nlohmann::json;

double static_tension(double load_mass, const Vec3& accel, double beta, int n, double g) {
    if (n < 1) throw ConfigError("static_tension: n must be >= 1");
    double c = std::cos(beta);
    if (!(c > 0.0)) throw ConfigError("static_tension: cos(beta) must be positive");
    Vec3 f = accel + Vec3(0.0, 0.0, g);
    return load_mass * f.norm() / (n * c);
}

std::string to_string(PathKind k) {
    switch (k) {
        case PathKind::Hover: return "hover";
        case PathKind::Circle: return "circle";
        case PathKind::Figure8: return "figure8";
    }
    return "hover";
}

PathKind path_kind_from_string(const std::string& s) {
    if (s == "hover") return PathKind::Hover;
    if (s == "circle") return PathKind::Circle;
    if (s == "figure8") return PathKind::Figure8;
    throw ConfigError("unknown path kind '" + s + "'");
}

Vec3 path_phase(const PathSpec& spec, double t) {
    if (spec.kind == PathKind::Hover || spec.rate == 0.0) return Vec3::Zero();
    const double w = spec.rate;
    const double tr = spec.ramp_time;
    if (tr <= 0.0) return Vec3(w * t, w, 0.0);
    if (t <= 0.0) return Vec3::Zero();
    if (t >= tr) return Vec3(0.5 * w * tr + w * (t - tr), w, 0.0);
    double s = t / tr;
    double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    double phi = w * tr * (2.5 * s4 - 3.0 * s4 * s + s3 * s3);
    double rate = w * (10.0 * s3 - 15.0 * s4 + 6.0 * s4 * s);
    double acc = w / tr * (30.0 * s2 - 60.0 * s3 + 30.0 * s4);
    return Vec3(phi, rate, acc);
}

PathSample sample_path(const PathSpec& spec, double t) {
    PathSample out;
    out.p = spec.center;
    if (spec.kind == PathKind::Hover) return out;
    Vec3 ph = path_phase(spec, t);
    const double phi = ph(0), rate = ph(1), acc = ph(2);
    const double a = spec.amplitude;
    if (spec.kind == PathKind::Circle) {
        double c = std::cos(phi), s = std::sin(phi);
        out.p += Vec3(a * c, a * s, 0.0);
        Vec3 dp(-a * s, a * c, 0.0);
        Vec3 ddp(-a * c, -a * s, 0.0);
        out.v = dp * rate;
        out.a = dp * acc + ddp * rate * rate;
    } else {
        out.p += Vec3(a * std::sin(phi), 0.5 * a * std::sin(2.0 * phi), 0.0);
        Vec3 dp(a * std::cos(phi), a * std::cos(2.0 * phi), 0.0);
        Vec3 ddp(-a * std::sin(phi), -2.0 * a * std::sin(2.0 * phi), 0.0);
        out.v = dp * rate;
        out.a = dp * acc + ddp * rate * rate;
    }
    return out;
}

double SlotSpec::beta_max(double natural_length) const {
    double c = (height - margin) / natural_length;
    if (!(c > 0.0) || c >= 1.0)
        throw ConfigError("slot geometry: need 0 < height - margin < natural length for beta_max > 0");
    return std::acos(c);
}

double tilt_schedule(const Vec3& load_p, const SlotSpec& slot, double natural_length) {
    double bmax = slot.beta_max(natural_length);
    double d2 = (load_p - slot.position).squaredNorm();
    return slot.beta_min + (bmax - slot.beta_min) * std::exp(-slot.eta_cf * d2 * d2);
}

Vec3 cable_direction(const Vec3& attachment, double beta) {
    Vec3 c(attachment.x(), attachment.y(), 0.0);
    double n = c.norm();
    if (n < 1e-12) return Vec3(0.0, 0.0, 1.0);
    c /= n;
    return Vec3(std::sin(beta) * c.x(), std::sin(beta) * c.y(), std::cos(beta));
}

LoadParams MultiliftParams::load_params() const {
    LoadParams lp = load;
    lp.attachments = ngon_attachments(num_quads, num_quads == 1 ? 0.0 : attach_radius, load.half_height);
    return lp;
}

WorldParams MultiliftParams::world_params() const {
    WorldParams wp;
    wp.quads.assign(num_quads, quad);
    wp.load = load_params();
    wp.load.mass *= mass_scale;
    wp.cable = cable;
    wp.g = g;
    wp.motor_tau = motor_tau;
    return wp;
}

ReferenceSample make_reference(const MultiliftParams& mp, const PathSample& path, double config_beta,
                               double tension_beta) {
    LoadParams lp = mp.load_params();
    const int n = mp.num_quads;
    ReferenceSample r;
    r.load.x.setZero();
    r.load.x.segment<3>(idx::p) = path.p;
    r.load.x.segment<3>(idx::v) = path.v;
    r.load.x(idx::q) = 1.0;
    double t_ref = static_tension(lp.mass, path.a, tension_beta, n, mp.g);
    r.load.u = Vec::Constant(n, t_ref);
    r.quads.resize(n);
    for (int i = 0; i < n; ++i) {
        Vec3 d = cable_direction(lp.attachments[i], config_beta);
        auto& q = r.quads[i];
        q.x.setZero();
        q.x.segment<3>(idx::p) = path.p + lp.attachments[i] + mp.cable.natural_length * d;
        q.x.segment<3>(idx::v) = path.v;
        Vec3 f = mp.quad.mass * (path.a + Vec3(0.0, 0.0, mp.g)) + t_ref * d;
        q.x.segment<4>(idx::q) = quat_from_z_axis(f);
        q.u = Vec::Zero(4);
        q.u(0) = f.norm();
    }
    return r;
}

HoverEquilibrium hover_equilibrium(const MultiliftParams& mp, const Vec3& load_position, double beta) {
    WorldParams wp = mp.world_params();
    const int n = mp.num_quads;
    HoverEquilibrium eq;
    eq.tension = static_tension(wp.load.mass, Vec3::Zero(), beta, n, wp.g);
    const double len = wp.cable.natural_length + eq.tension / wp.cable.stiffness;
    eq.state.load.p = load_position;
    eq.state.quads.resize(n);
    eq.controls.resize(n);
    for (int i = 0; i < n; ++i) {
        Vec3 d = cable_direction(wp.load.attachments[i], beta);
        RigidState q;
        q.p = load_position + wp.load.attachments[i] + len * d;
        Vec3 f = wp.quads[i].mass * Vec3(0.0, 0.0, wp.g) + eq.tension * d;
        q.q = quat_from_z_axis(f);
        eq.state.quads[i] = q;
        eq.controls[i] = Vec4(f.norm(), 0.0, 0.0, 0.0);
    }
    eq.state.realized_u = eq.controls;
    return eq;
}

std::string to_string(Experiment e) { return e == Experiment::Weights ? "weights" : "tension-ref"; }

Experiment experiment_from_string(const std::string& s) {
    if (s == "weights") return Experiment::Weights;
    if (s == "tension-ref") return Experiment::TensionRef;
    throw ConfigError("unknown experiment '" + s + "'");
}

std::string to_string(LossKind k) {
    switch (k) {
        case LossKind::Tracking: return "tracking";
        case LossKind::Obstacle: return "obstacle";
        case LossKind::Slot: return "slot";
    }
    return "tracking";
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "tracking") return LossKind::Tracking;
    if (s == "obstacle") return LossKind::Obstacle;
    if (s == "slot") return LossKind::Slot;
    throw ConfigError("unknown loss kind '" + s + "'");
}

void Scenario::validate() const {
    if (system.num_quads < 1) throw ConfigError("num_quads must be >= 1");
    system.quad.validate();
    system.load_params().validate();
    system.cable.validate();
    if (!(system.motor_tau > 0.0)) throw ConfigError("motor_tau must be positive");
    if (!(system.mass_scale > 0.0)) throw ConfigError("mass_scale must be positive");
    if (horizon.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (!(horizon.dt > 0.0) || !(horizon.gamma > 0.0)) throw ConfigError("dt and gamma must be positive");
    if (!(training.physics_dt > 0.0)) throw ConfigError("physics_dt must be positive");
    double ratio = horizon.dt / training.physics_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0)
        throw ConfigError("control dt must be an integer multiple of physics_dt");
    if (training.window < 1) throw ConfigError("window (N_cl) must be >= 1");
    if (!(training.episode_time >= 0.0)) throw ConfigError("episode_time must be >= 0");
    if (!(training.theta_min < training.theta_max)) throw ConfigError("theta_min must be < theta_max");
    if (!(training.delta_t_min < training.delta_t_max)) throw ConfigError("delta_t_min must be < delta_t_max");
    if (!(distributed.delta > 0.0) || distributed.k_max < 1) throw ConfigError("need delta > 0 and k_max >= 1");
    if (distributed.central_agent < 0 || distributed.central_agent >= system.num_quads)
        throw ConfigError("central_agent out of range");
    if (!(std::cos(beta) > 0.0)) throw ConfigError("cos(beta) must be positive");
    if (slot) slot->beta_max(system.cable.natural_length);
    if (experiment == Experiment::TensionRef && !slot) throw ConfigError("tension-ref experiment needs a slot");
    if (weights.quad.qu.size() != 4) throw ConfigError("quadrotor weights need 4 control entries");
    if (weights.load.qu.size() != system.num_quads) throw ConfigError("load weights need n control entries");
    if (role != "train" && role != "eval") throw ConfigError("role must be train or eval");
}

double Scenario::tilt_at(const Vec3& p) const {
    if (slot) return tilt_schedule(p, *slot, system.cable.natural_length);
    return beta;
}

double Scenario::tension_beta() const { return slot ? slot->beta_min : beta; }

// ------------------------------------------------------------------- JSON

namespace {

json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vec json_vec(const json& a) {
    Vec v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v(i) = a.at(i).get<double>();
    return v;
}

json mat3_json(const Mat3& m) {
    json a = json::array();
    for (int i = 0; i < 3; ++i) a.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
    return a;
}

Mat3 json_mat3(const json& a) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = a.at(i).at(j).get<double>();
    return m;
}

template <int N>
Eigen::Matrix<double, N, 1> json_fixed(const json& a) {
    Vec v = json_vec(a);
    if (v.size() != N) throw ConfigError("expected an array of " + std::to_string(N) + " numbers");
    return v;
}

json weights_json(const CostWeights& w) {
    return {{"qx", vec_json(w.qx)}, {"qu", vec_json(w.qu)}, {"qxn", vec_json(w.qxn)}};
}

CostWeights json_weights(const json& j) {
    CostWeights w;
    w.qx = json_fixed<12>(j.at("qx"));
    w.qu = json_vec(j.at("qu"));
    w.qxn = json_fixed<12>(j.at("qxn"));
    return w;
}

}  // namespace

json to_json(const Scenario& s) {
    const auto& sy = s.system;
    json j;
    j["name"] = s.name;
    j["role"] = s.role;
    j["experiment"] = to_string(s.experiment);
    j["seed"] = s.seed;
    j["system"] = {
        {"num_quads", sy.num_quads},
        {"quad", {{"mass", sy.quad.mass}, {"inertia", mat3_json(sy.quad.inertia)}, {"radius", sy.quad.radius},
                  {"u_min", vec_json(sy.quad.u_min)}, {"u_max", vec_json(sy.quad.u_max)}}},
        {"load", {{"mass", sy.load.mass}, {"inertia", mat3_json(sy.load.inertia)},
                  {"com_bias", vec_json(sy.load.com_bias)}, {"radius", sy.load.radius},
                  {"half_height", sy.load.half_height}}},
        {"cable", {{"stiffness", sy.cable.stiffness}, {"damping", sy.cable.damping},
                   {"natural_length", sy.cable.natural_length}, {"max_tension", sy.cable.max_tension}}},
        {"attach_radius", sy.attach_radius},
        {"g", sy.g},
        {"motor_tau", sy.motor_tau},
        {"mass_scale", sy.mass_scale}};
    j["path"] = {{"kind", to_string(s.path.kind)}, {"center", vec_json(s.path.center)},
                 {"amplitude", s.path.amplitude}, {"rate", s.path.rate}, {"ramp_time", s.path.ramp_time}};
    j["beta"] = s.beta;
    if (s.slot) {
        const auto& sl = *s.slot;
        j["slot"] = {{"position", vec_json(sl.position)}, {"lower_z", sl.lower_z}, {"height", sl.height},
                     {"margin", sl.margin}, {"beta_min", sl.beta_min}, {"eta_cf", sl.eta_cf},
                     {"pass_radius", sl.pass_radius}};
    } else {
        j["slot"] = nullptr;
    }
    if (s.obstacle) {
        j["obstacle"] = {{"position", vec_json(s.obstacle->position)}, {"radius", s.obstacle->radius}};
    } else {
        j["obstacle"] = nullptr;
    }
    j["horizon"] = {{"N", s.horizon.horizon}, {"dt", s.horizon.dt}, {"gamma", s.horizon.gamma}};
    j["solver"] = {{"tolerance", s.solver.tolerance},   {"max_iterations", s.solver.max_iterations},
                   {"mu_init", s.solver.mu_init},       {"mu_min", s.solver.mu_min},
                   {"mu_max", s.solver.mu_max},         {"mu_factor", s.solver.mu_factor},
                   {"max_line_search", s.solver.max_line_search}, {"armijo", s.solver.armijo}};
    j["distributed"] = {{"delta", s.distributed.delta}, {"k_max", s.distributed.k_max},
                        {"central_agent", s.distributed.central_agent}};
    const auto& t = s.training;
    j["training"] = {{"episode_time", t.episode_time}, {"physics_dt", t.physics_dt},
                     {"window", t.window},             {"loss", to_string(t.loss)},
                     {"loss_weights", vec_json(t.loss_weights)},
                     {"alpha", t.alpha},               {"eta", t.eta},
                     {"eta_s", t.eta_s},               {"learning_rate", t.learning_rate},
                     {"theta_min", t.theta_min},       {"theta_max", t.theta_max},
                     {"delta_t_min", t.delta_t_min},   {"delta_t_max", t.delta_t_max},
                     {"hidden", t.hidden},             {"max_episodes", t.max_episodes},
                     {"power_iterations", t.power_iterations},
                     {"tension_ref_enabled", t.tension_ref_enabled},
                     {"init_from_defaults", t.init_from_defaults}};
    j["weights"] = {{"quad", weights_json(s.weights.quad)}, {"load", weights_json(s.weights.load)}};
    return j;
}

Scenario scenario_from_json(const json& j) {
    try {
        Scenario s;
        s.name = j.at("name").get<std::string>();
        s.role = j.at("role").get<std::string>();
        s.experiment = experiment_from_string(j.at("experiment").get<std::string>());
        s.seed = j.at("seed").get<std::uint64_t>();
        const auto& sy = j.at("system");
        auto& m = s.system;
        m.num_quads = sy.at("num_quads").get<int>();
        const auto& q = sy.at("quad");
        m.quad.mass = q.at("mass").get<double>();
        m.quad.inertia = json_mat3(q.at("inertia"));
        m.quad.radius = q.at("radius").get<double>();
        m.quad.u_min = json_fixed<4>(q.at("u_min"));
        m.quad.u_max = json_fixed<4>(q.at("u_max"));
        const auto& l = sy.at("load");
        m.load.mass = l.at("mass").get<double>();
        m.load.inertia = json_mat3(l.at("inertia"));
        m.load.com_bias = json_fixed<3>(l.at("com_bias"));
        m.load.radius = l.at("radius").get<double>();
        m.load.half_height = l.at("half_height").get<double>();
        const auto& c = sy.at("cable");
        m.cable.stiffness = c.at("stiffness").get<double>();
        m.cable.damping = c.at("damping").get<double>();
        m.cable.natural_length = c.at("natural_length").get<double>();
        m.cable.max_tension = c.at("max_tension").get<double>();
        m.attach_radius = sy.at("attach_radius").get<double>();
        m.g = sy.at("g").get<double>();
        m.motor_tau = sy.at("motor_tau").get<double>();
        m.mass_scale = sy.at("mass_scale").get<double>();
        const auto& p = j.at("path");
        s.path.kind = path_kind_from_string(p.at("kind").get<std::string>());
        s.path.center = json_fixed<3>(p.at("center"));
        s.path.amplitude = p.at("amplitude").get<double>();
        s.path.rate = p.at("rate").get<double>();
        s.path.ramp_time = p.at("ramp_time").get<double>();
        s.beta = j.at("beta").get<double>();
        if (!j.at("slot").is_null()) {
            const auto& sl = j.at("slot");
            SlotSpec slot;
            slot.position = json_fixed<3>(sl.at("position"));
            slot.lower_z = sl.at("lower_z").get<double>();
            slot.height = sl.at("height").get<double>();
            slot.margin = sl.at("margin").get<double>();
            slot.beta_min = sl.at("beta_min").get<double>();
            slot.eta_cf = sl.at("eta_cf").get<double>();
            slot.pass_radius = sl.at("pass_radius").get<double>();
            s.slot = slot;
        }
        if (!j.at("obstacle").is_null()) {
            Obstacle o;
            o.position = json_fixed<3>(j.at("obstacle").at("position"));
            o.radius = j.at("obstacle").at("radius").get<double>();
            s.obstacle = o;
        }
        const auto& h = j.at("horizon");
        s.horizon.horizon = h.at("N").get<int>();
        s.horizon.dt = h.at("dt").get<double>();
        s.horizon.gamma = h.at("gamma").get<double>();
        s.horizon.g = m.g;
        const auto& so = j.at("solver");
        s.solver.tolerance = so.at("tolerance").get<double>();
        s.solver.max_iterations = so.at("max_iterations").get<int>();
        s.solver.mu_init = so.at("mu_init").get<double>();
        s.solver.mu_min = so.at("mu_min").get<double>();
        s.solver.mu_max = so.at("mu_max").get<double>();
        s.solver.mu_factor = so.at("mu_factor").get<double>();
        s.solver.max_line_search = so.at("max_line_search").get<int>();
        s.solver.armijo = so.at("armijo").get<double>();
        const auto& d = j.at("distributed");
        s.distributed.delta = d.at("delta").get<double>();
        s.distributed.k_max = d.at("k_max").get<int>();
        s.distributed.central_agent = d.at("central_agent").get<int>();
        const auto& t = j.at("training");
        auto& tr = s.training;
        tr.episode_time = t.at("episode_time").get<double>();
        tr.physics_dt = t.at("physics_dt").get<double>();
        tr.window = t.at("window").get<int>();
        tr.loss = loss_kind_from_string(t.at("loss").get<std::string>());
        tr.loss_weights = json_fixed<12>(t.at("loss_weights"));
        tr.alpha = t.at("alpha").get<double>();
        tr.eta = t.at("eta").get<double>();
        tr.eta_s = t.at("eta_s").get<double>();
        tr.learning_rate = t.at("learning_rate").get<double>();
        tr.theta_min = t.at("theta_min").get<double>();
        tr.theta_max = t.at("theta_max").get<double>();
        tr.delta_t_min = t.at("delta_t_min").get<double>();
        tr.delta_t_max = t.at("delta_t_max").get<double>();
        tr.hidden = t.at("hidden").get<int>();
        tr.max_episodes = t.at("max_episodes").get<int>();
        tr.power_iterations = t.at("power_iterations").get<int>();
        tr.tension_ref_enabled = t.at("tension_ref_enabled").get<bool>();
        tr.init_from_defaults = t.at("init_from_defaults").get<bool>();
        s.weights.quad = json_weights(j.at("weights").at("quad"));
        s.weights.load = json_weights(j.at("weights").at("load"));
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario JSON: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse scenario file '" + path + "': " + e.what());
    }
    return scenario_from_json(j);
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << to_json(s).dump(2) << "\n";
}

void apply_override(json& j, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + assignment);
    std::string key = assignment.substr(0, eq);
    std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    json* node = &j;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (size_t i = 0; i < parts.size(); ++i) {
        const std::string& k = parts[i];
        if (node->is_array()) {
            size_t pos = 0;
            size_t idx_v = std::stoul(k, &pos);
            if (pos != k.size() || idx_v >= node->size()) throw ConfigError("bad array index in override: " + key);
            node = &(*node)[idx_v];
        } else {
            if (!node->is_object() || !node->contains(k)) throw ConfigError("unknown config key: " + key);
            node = &(*node)[k];
        }
    }
    *node = value;
}

// ----------------------------------------------------------------- fixtures

namespace {

WeightDefaults default_weights(int n) {
    WeightDefaults w;
    Vec12 qx;
    qx << 20, 20, 20, 2, 2, 2, 5, 5, 5, 0.5, 0.5, 0.5;
    w.quad.qx = qx;
    w.quad.qu = Vec4(0.1, 1.0, 1.0, 1.0);
    w.quad.qxn = qx;
    w.load.qx = qx;
    w.load.qu = Vec::Constant(n, 0.1);
    w.load.qxn = qx;
    return w;
}

Scenario base(int n) {
    if (n < 1) throw ConfigError("num_quads must be >= 1");
    Scenario s;
    s.system.num_quads = n;
    // Desk-scale load mass grows with the team size; the 6-quadrotor bundle uses 10 kg.
    s.system.load.mass = n >= 6 ? 10.0 : 1.5 + 1.0 * n;
    s.system.load.inertia *= s.system.load.mass / 10.0;
    s.beta = n == 1 ? 0.0 : 0.3;
    s.weights = default_weights(n);
    return s;
}

}  // namespace

Scenario hover_fixture(int n) {
    Scenario s = base(n);
    s.name = "hover-" + std::to_string(n);
    s.path.kind = PathKind::Hover;
    s.path.center = Vec3(0.0, 0.0, 1.0);
    s.validate();
    return s;
}

Scenario circle_scenario(int n, bool biased_com) {
    Scenario s = base(n);
    s.name = std::string("circle-") + std::to_string(n) + (biased_com ? "-biased" : "-uniform");
    s.path.kind = PathKind::Circle;
    s.path.center = Vec3(-1.0, 0.0, 1.0);
    s.path.amplitude = 1.0;
    s.path.rate = 0.6;
    s.path.ramp_time = 2.0;
    if (biased_com) s.system.load.com_bias = Vec3(0.1, 0.1, -0.1);
    s.validate();
    return s;
}

Scenario figure8_scenario(int n) {
    Scenario s = circle_scenario(n, true);
    s.name = "figure8-" + std::to_string(n);
    s.role = "eval";
    s.path.kind = PathKind::Figure8;
    s.path.center = Vec3(0.0, 0.0, 1.0);
    s.path.rate = 0.5;
    s.validate();
    return s;
}

Scenario slot_scenario(int n) {
    Scenario s = circle_scenario(n, false);
    s.name = "slot-" + std::to_string(n);
    s.experiment = Experiment::TensionRef;
    s.training.loss = LossKind::Slot;
    SlotSpec slot;
    // Quarter of the way around the circle, where the path crosses the y axis.
    slot.position = Vec3(-1.0, 1.0, 1.0);
    slot.height = 1.6;
    slot.margin = 0.1;
    slot.beta_min = s.beta;
    slot.eta_cf = 2.0;
    slot.lower_z = 0.95;
    slot.pass_radius = 0.5;
    s.slot = slot;
    s.training.alpha = 10.0;
    s.training.eta = 20.0;
    s.training.eta_s = 2.0;
    s.training.episode_time = 6.0;
    s.training.learning_rate = 3e-4;
    s.training.max_episodes = 5;
    // Start from a zero tension offset so the first episode shows the untrained behaviour.
    s.training.init_from_defaults = true;
    s.validate();
    return s;
}

Scenario weight_learning_scenario() {
    Scenario s = circle_scenario(6, true);
    s.name = "weights-6";
    s.system.load.mass = 10.0;
    s.training.episode_time = 15.0;
    s.validate();
    return s;
}

void check_references(const Scenario& s, double duration) {
    const auto& mp = s.system;
    LoadParams lp = mp.load_params();
    const double dt = s.horizon.dt;
    for (double t = 0.0; t <= duration + 1e-12; t += dt) {
        PathSample ps = sample_path(s.path, t);
        double beta = s.tilt_at(ps.p);
        ReferenceSample r = make_reference(mp, ps, beta, s.tension_beta());
        for (int i = 0; i < mp.num_quads; ++i) {
            Vec3 d = r.quads[i].x.segment<3>(idx::p) - r.load.x.segment<3>(idx::p) - lp.attachments[i];
            if (std::abs(d.norm() - mp.cable.natural_length) > 1e-9)
                throw Error("reference violates cable consistency at t=" + std::to_string(t));
            if (r.quads[i].u(0) > 0.9 * mp.quad.u_max(0))
                throw ConfigError("reference thrust exceeds 0.9 u_max at t=" + std::to_string(t));
        }
        for (Eigen::Index j = 0; j < r.load.u.size(); ++j)
            if (!(r.load.u(j) > 0.0) || r.load.u(j) >= mp.cable.max_tension)
                throw ConfigError("reference tension outside (0, Tmax) at t=" + std::to_string(t));
    }
}

}  // namespace multilift
