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

#include "multilift/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "multilift/errors.hpp"
#include "multilift/world.hpp"

namespace multilift {

namespace {

constexpr const char* kAxes[13] = {"px", "py", "pz", "vx", "vy", "vz", "qw", "qx", "qy", "qz", "wx", "wy", "wz"};

std::string agent_label(int i, int n) { return i < n ? "q" + std::to_string(i) : std::string("l"); }

void write_state_block(std::ostream& os, const Vec13& x) {
    for (int k = 0; k < 13; ++k) os << ',' << x(k);
}

double world_vz(const Vec13& x) {
    Mat3 r = quat_to_rot<double>(Vec4(x.segment<4>(idx::q)));
    return (r * Vec3(x.segment<3>(idx::v)))(2);
}

AgentPolicy make_policy(int in, int out, const HyperBounds& bounds, const Vec& init_theta, const TrainingSettings& ts,
                        std::uint64_t seed) {
    AgentPolicy p;
    p.net = PolicyNet(in, ts.hidden, out, seed, ts.power_iterations);
    p.bounds = bounds;
    p.bounds.validate();
    if (ts.init_from_defaults) p.net.set_output_bias(bounds.to_normalized(init_theta));
    p.adam.learning_rate = ts.learning_rate;
    return p;
}

// Adam step on dL/dtheta through dtheta/dTheta and dTheta/dvarpi at the cached forward pass.
bool policy_step(AgentPolicy& p, const ForwardCache& cache, const Vec& dl_dtheta) {
    Vec dl_dTheta = dl_dtheta.cwiseProduct(p.bounds.jacobian_diagonal());
    Vec g = p.net.backward(cache, dl_dTheta);
    if (!apply_gradient(p.net, p.adam, g)) {
        ++p.skipped_updates;
        return false;
    }
    return true;
}

}  // namespace

WindowSample evaluate_losses(const Scenario& s, const std::vector<Vec13>& quad_x, const Vec13& load_x,
                             const ReferenceSample& ref) {
    const TrainingSettings& ts = s.training;
    WindowSample w;
    w.quad_x = quad_x;
    w.load_x = load_x;
    auto add_obstacle = [&](LossTerm& l, const Vec13& x) {
        if (ts.loss != LossKind::Obstacle || !s.obstacle) return;
        LossTerm o = obstacle_term(x, s.obstacle->position, ts.alpha, ts.eta);
        l.value += o.value;
        l.grad += o.grad;
    };
    for (size_t i = 0; i < quad_x.size(); ++i) {
        LossTerm l;
        if (ts.loss != LossKind::Slot) l = tracking_term(quad_x[i], ref.quads.at(i).x, ts.loss_weights);
        add_obstacle(l, quad_x[i]);
        w.quad_loss.push_back(l);
    }
    if (ts.loss == LossKind::Slot) {
        if (!s.slot) throw ConfigError("slot loss needs a slot");
        w.load_loss = slot_term(load_x, ref.load.x(idx::p + 2), *s.slot, ts.alpha, ts.eta, ts.eta_s);
    } else {
        w.load_loss = tracking_term(load_x, ref.load.x, ts.loss_weights);
        add_obstacle(w.load_loss, load_x);
    }
    return w;
}

std::vector<double> window_losses(const std::vector<WindowSample>& window) {
    std::vector<double> out;
    for (const auto& s : window) {
        if (out.empty()) out.assign(s.quad_loss.size() + 1, 0.0);
        for (size_t i = 0; i < s.quad_loss.size(); ++i) out[i] += s.quad_loss[i].value;
        out.back() += s.load_loss.value;
    }
    return out;
}

ThetaGradients window_theta_gradients(const std::vector<WindowSample>& window,
                                      const std::vector<SensitivityState>& sens, CouplingMode mode) {
    if (window.size() != sens.size()) throw ProtocolError("window and sensitivities differ in length");
    ThetaGradients g;
    if (window.empty()) return g;
    const int n = static_cast<int>(window.front().quad_loss.size());
    g.quads.resize(n);
    for (int i = 0; i < n; ++i) {
        if (sens.front().quad_owners.size() <= static_cast<size_t>(i)) continue;
        const int m = static_cast<int>(sens.front().quad_owners[i].load.cols());
        if (m == 0) continue;
        Vec a = Vec::Zero(m);
        for (size_t k = 0; k < window.size(); ++k) {
            const OwnerSensitivity& o = sens[k].quad_owners[i];
            if (static_cast<int>(o.quads.size()) != n) throw ProtocolError("missing quadrotor sensitivity blocks");
            a.noalias() += o.load.transpose() * window[k].load_loss.grad;
            for (int j = 0; j < n; ++j) {
                if (mode == CouplingMode::Pairwise && j != i) continue;
                a.noalias() += o.quads[j].transpose() * window[k].quad_loss[j].grad;
            }
        }
        g.quads[i] = a;
    }
    const int ml = static_cast<int>(sens.front().load_owner.load.cols());
    if (ml > 0) {
        Vec a = Vec::Zero(ml);
        for (size_t k = 0; k < window.size(); ++k) {
            const OwnerSensitivity& o = sens[k].load_owner;
            if (static_cast<int>(o.quads.size()) != n) throw ProtocolError("missing load sensitivity blocks");
            a.noalias() += o.load.transpose() * window[k].load_loss.grad;
            for (int j = 0; j < n; ++j) a.noalias() += o.quads[j].transpose() * window[k].quad_loss[j].grad;
        }
        g.load = a;
    }
    return g;
}

bool stopping_criterion(const std::vector<double>& history) {
    if (history.size() < 2) return false;
    const double last = history[history.size() - 1];
    const double prev = history[history.size() - 2];
    return std::abs(last - prev) <= history.front() / 1000.0;
}

void RmseAccumulator::add(const Vec13& x, const Vec13& ref) {
    Vec3 dp = x.segment<3>(idx::p) - ref.segment<3>(idx::p);
    Vec4 qr = ref.segment<4>(idx::q);
    Vec4 qr_inv(qr(0), -qr(1), -qr(2), -qr(3));
    Vec3 e = quat_to_euler_zyx(quat_mul(qr_inv, Vec4(x.segment<4>(idx::q))));
    sq_p_ += dp.cwiseAbs2();
    sq_e_ += e.cwiseAbs2();
    ++n_;
}

TrackingRmse RmseAccumulator::result() const {
    TrackingRmse r;
    r.samples = n_;
    if (n_ == 0) return r;
    r.position = (sq_p_ / n_).cwiseSqrt();
    r.euler = (sq_e_ / n_).cwiseSqrt();
    return r;
}

void write_episode_csv_header(std::ostream& os, int n) {
    os << "episode,tick,L_mean_running";
    for (int i = 0; i <= n; ++i) os << ",loss_" << agent_label(i, n);
    os << ",rounds,tension_gap_max\n";
}

void write_episode_csv_row(std::ostream& os, int episode, const TickLog& log) {
    os << episode << ',' << log.tick << ',' << log.l_mean_running;
    for (double l : log.agent_loss) os << ',' << l;
    os << ',' << log.rounds << ',' << log.tension_gap_max << '\n';
}

void write_state_csv_header(std::ostream& os, int n) {
    os << "t";
    for (int i = 0; i <= n; ++i)
        for (const char* a : kAxes) os << ',' << agent_label(i, n) << '_' << a;
    for (int i = 0; i <= n; ++i)
        for (const char* a : {"px", "py", "pz"}) os << ',' << agent_label(i, n) << "_ref_" << a;
    os << '\n';
}

void write_tension_csv_header(std::ostream& os, int n) {
    os << "t";
    for (int i = 0; i < n; ++i) os << ",T" << i << "_actual,T" << i << "_mpc";
    os << ",beta,passing\n";
}

Trainer::Trainer(Scenario scenario, std::uint64_t seed, TrainerOptions options)
    : scenario_(std::move(scenario)), seed_(seed), options_(options), mpc_(scenario_) {
    scenario_.validate();
    if (options_.workers < 1) throw ConfigError("workers must be >= 1");
    const int n = scenario_.system.num_quads;
    const TrainingSettings& ts = scenario_.training;
    // One independent stream per net, all derived from the single seed.
    std::uint64_t stream = seed;
    auto next_seed = [&stream]() {
        stream += 0x9E3779B97F4A7C15ULL;
        return stream;
    };
    if (options_.fixed_weights) return;
    if (scenario_.experiment == Experiment::Weights) {
        for (int i = 0; i < n; ++i) {
            Vec init = scenario_.weights.quad.pack();
            quad_policies_.push_back(make_policy(12, static_cast<int>(init.size()),
                                                 HyperBounds::uniform(static_cast<int>(init.size()), ts.theta_min,
                                                                      ts.theta_max),
                                                 init, ts, next_seed()));
        }
        Vec init = scenario_.weights.load.pack();
        load_policy_ = make_policy(12 + n, static_cast<int>(init.size()),
                                   HyperBounds::uniform(static_cast<int>(init.size()), ts.theta_min, ts.theta_max),
                                   init, ts, next_seed());
    } else if (ts.tension_ref_enabled) {
        load_policy_ =
            make_policy(3, 1, HyperBounds::uniform(1, ts.delta_t_min, ts.delta_t_max), Vec::Zero(1), ts, next_seed());
    }
}

Vec Trainer::quad_observation(const Vec13& x, const Vec13& ref) const { return tracking_error<double>(x, ref); }

Vec Trainer::load_observation(const Vec13& x, const Vec13& ref, const std::vector<double>& tension_magnitudes) const {
    const int n = scenario_.system.num_quads;
    Vec o(12 + n);
    o.head<12>() = tracking_error<double>(x, ref);
    for (int i = 0; i < n; ++i) o(12 + i) = tension_magnitudes.at(i) > 0.0 ? 1.0 : 0.0;
    return o;
}

Vec Trainer::tension_observation(const Vec13& x, const Vec13& ref, double beta) const {
    Vec o(3);
    o(0) = x(idx::p + 2) - ref(idx::p + 2);
    o(1) = world_vz(x) - world_vz(ref);
    o(2) = beta;
    return o;
}

EpisodeResult Trainer::run_episode(int episode, bool learn, const EpisodeSinks& sinks) {
    const Scenario& s = scenario_;
    const TrainingSettings& ts = s.training;
    const int n = s.system.num_quads;
    const double dt = s.horizon.dt;
    const int substeps = static_cast<int>(std::lround(dt / ts.physics_dt));
    if (substeps < 1 || std::abs(substeps * ts.physics_dt - dt) > 1e-12)
        throw ConfigError("control period must be a whole multiple of the physics step");
    const int num_ticks = static_cast<int>(std::lround(ts.episode_time / dt));
    const int n_cl = ts.window;
    if (n_cl < 1) throw ConfigError("window must be >= 1");

    EpisodeResult res;
    res.episode = episode;
    mpc_.clear_warm_bundle();
    if (s.experiment == Experiment::TensionRef) mpc_.set_load_theta(Vec::Zero(1));
    PathSample start = sample_path(s.path, 0.0);
    HoverEquilibrium eq = hover_equilibrium(s.system, start.p, s.tilt_at(start.p));
    World world(s.system.world_params(), eq.state);

    const bool lq = learn && learns_quads();
    const bool ll = learn && learns_load();
    std::vector<int> quad_dims(n, lq ? static_cast<int>(scenario_.weights.quad.pack().size()) : 0);
    const int load_dim = ll ? mpc_.load().theta_dim() : 0;

    std::deque<WindowSample> samples;
    std::deque<SensitivityStep> steps;
    double loss_sum = 0.0;
    const double l_scale = num_ticks > 0 ? ts.physics_dt / ts.episode_time : 0.0;
    RmseAccumulator rmse;
    std::vector<ForwardCache> quad_cache(quad_policies_.size());
    ForwardCache load_cache;

    for (int t = 0; t < num_ticks; ++t) {
        const double time = t * dt;
        const WorldState& ws = world.state();
        std::vector<Vec13> quad_x;
        for (const auto& q : ws.quads) quad_x.push_back(q.to_vector());
        Vec13 load_x = ws.load.to_vector();
        const double beta = s.tilt_at(load_x.segment<3>(idx::p));
        mpc_.set_references(time, beta);
        const ReferenceSample& ref = mpc_.references().front();
        std::vector<TensionResult> actual = world.tensions();
        std::vector<double> mags;
        for (const auto& a : actual) mags.push_back(a.magnitude);

        // Forward pass of the policies.
        for (size_t i = 0; i < quad_policies_.size(); ++i)
            mpc_.set_quad_theta(static_cast<int>(i),
                                quad_policies_[i].theta(quad_observation(quad_x[i], ref.quads[i].x), &quad_cache[i]));
        if (load_policy_) {
            Vec obs = s.experiment == Experiment::Weights ? load_observation(load_x, ref.load.x, mags)
                                                          : tension_observation(load_x, ref.load.x, beta);
            mpc_.set_load_theta(load_policy_->theta(obs, &load_cache));
        }

        TickResult tick;
        try {
            tick = mpc_.run(quad_x, load_x, options_.workers);
        } catch (const Error& e) {
            res.aborted = true;
            res.fault = std::string("tick ") + std::to_string(t) + ": " + e.what();
            break;
        }

        TickLog log;
        log.tick = t;
        log.time = time;
        log.rounds = tick.rounds;
        for (int i = 0; i < n; ++i)
            log.tension_gap_max = std::max(log.tension_gap_max, std::abs(mags[i] - tick.load_control(i)));
        res.tension_gap_max = std::max(res.tension_gap_max, log.tension_gap_max);
        rmse.add(load_x, ref.load.x);

        bool passing = false;
        if (s.slot) {
            Eigen::Vector2d d = (load_x.segment<3>(idx::p) - s.slot->position).head<2>();
            passing = d.norm() <= s.slot->pass_radius;
            if (passing) {
                double c = load_x(idx::p + 2) - s.slot->lower_z;
                res.min_clearance = res.min_clearance ? std::min(*res.min_clearance, c) : c;
            }
        }

        samples.push_back(evaluate_losses(s, quad_x, load_x, ref));
        if (static_cast<int>(samples.size()) > n_cl + 1) samples.pop_front();

        // Backward pass over [t - N_cl, t].
        if (t >= n_cl) {
            std::vector<WindowSample> window(samples.begin(), samples.end());
            log.agent_loss = window_losses(window);
            for (double l : log.agent_loss) loss_sum += l;
            if (lq || ll) {
                std::vector<SensitivityStep> st(steps.begin(), steps.end());
                auto sens = propagate(st, n, quad_dims, load_dim, options_.coupling, options_.workers);
                ThetaGradients g = window_theta_gradients(window, sens, options_.coupling);
                bool any = false;
                for (size_t i = 0; lq && i < quad_policies_.size(); ++i) {
                    any |= policy_step(quad_policies_[i], quad_cache[i], g.quads[i]);
                }
                if (ll) any |= policy_step(*load_policy_, load_cache, g.load);
                log.updated = any;
                if (any) ++res.updates;
                if (any && options_.track_spectral_norms) {
                    auto track = [&](const AgentPolicy& p) {
                        for (double sn : p.net.spectral_norms()) res.max_spectral_norm = std::max(res.max_spectral_norm, sn);
                    };
                    for (const auto& p : quad_policies_) track(p);
                    if (load_policy_) track(*load_policy_);
                }
            }
        } else {
            log.agent_loss.assign(n + 1, 0.0);
        }
        log.l_mean_running = l_scale * loss_sum;

        if (lq || ll) {
            MpcGradients g = all_mpc_gradients(mpc_, tick, options_.workers);
            steps.push_back(assemble_step(t, mpc_, quad_x, load_x, tick.quad_controls, tick.load_control, g, lq, ll));
            if (static_cast<int>(steps.size()) > n_cl) steps.pop_front();
        }

        if (sinks.ticks) write_episode_csv_row(*sinks.ticks, episode, log);
        if (sinks.mpc) write_mpc_csv_row(*sinks.mpc, time, tick);
        if (sinks.states) {
            *sinks.states << time;
            for (const auto& x : quad_x) write_state_block(*sinks.states, x);
            write_state_block(*sinks.states, load_x);
            for (const auto& q : ref.quads) *sinks.states << ',' << q.x(0) << ',' << q.x(1) << ',' << q.x(2);
            *sinks.states << ',' << ref.load.x(0) << ',' << ref.load.x(1) << ',' << ref.load.x(2) << '\n';
        }
        if (sinks.tensions) {
            *sinks.tensions << time;
            for (int i = 0; i < n; ++i) *sinks.tensions << ',' << mags[i] << ',' << tick.load_control(i);
            *sinks.tensions << ',' << beta << ',' << (passing ? 1 : 0) << '\n';
        }
        res.log.push_back(log);
        res.ticks = t + 1;

        bool fault = false;
        for (int k = 0; k < substeps; ++k) {
            if (auto f = world.step(tick.quad_controls, ts.physics_dt)) {
                res.aborted = true;
                res.fault = "tick " + std::to_string(t) + ": agent " + std::to_string(f->agent) + ": " + f->message;
                fault = true;
                break;
            }
        }
        if (fault) break;
    }
    int skipped = 0;
    for (const auto& p : quad_policies_) skipped += p.skipped_updates;
    if (load_policy_) skipped += load_policy_->skipped_updates;
    res.skipped_updates = skipped;
    res.l_mean = l_scale * loss_sum;
    res.rmse = rmse.result();
    return res;
}

nlohmann::json Trainer::checkpoint(int episode) const {
    nlohmann::json j;
    j["episode"] = episode;
    j["seed"] = seed_;
    j["scenario"] = scenario_.name;
    j["experiment"] = to_string(scenario_.experiment);
    j["quad_policies"] = nlohmann::json::array();
    for (const auto& p : quad_policies_) j["quad_policies"].push_back(p.to_json());
    j["load_policy"] = load_policy_ ? load_policy_->to_json() : nlohmann::json(nullptr);
    return j;
}

int Trainer::restore(const nlohmann::json& j) {
    try {
        if (j.at("experiment").get<std::string>() != to_string(scenario_.experiment))
            throw ConfigError("checkpoint experiment does not match the scenario");
        const auto& qp = j.at("quad_policies");
        if (qp.size() != quad_policies_.size()) throw ConfigError("checkpoint has the wrong number of quadrotor nets");
        std::vector<AgentPolicy> quads;
        for (const auto& p : qp) quads.push_back(AgentPolicy::from_json(p));
        for (size_t i = 0; i < quads.size(); ++i)
            if (quads[i].net.input_dim() != quad_policies_[i].net.input_dim() ||
                quads[i].net.output_dim() != quad_policies_[i].net.output_dim())
                throw ConfigError("checkpoint net shape does not match the scenario");
        std::optional<AgentPolicy> load;
        if (!j.at("load_policy").is_null()) load = AgentPolicy::from_json(j.at("load_policy"));
        if (load.has_value() != load_policy_.has_value()) throw ConfigError("checkpoint load net does not match");
        if (load && (load->net.input_dim() != load_policy_->net.input_dim() ||
                     load->net.output_dim() != load_policy_->net.output_dim()))
            throw ConfigError("checkpoint net shape does not match the scenario");
        quad_policies_ = std::move(quads);
        load_policy_ = std::move(load);
        return j.at("episode").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("checkpoint: ") + e.what());
    }
}

}  // namespace multilift
