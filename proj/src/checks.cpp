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

#include "multilift/checks.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "multilift/losses.hpp"
#include "multilift/nominal_loop.hpp"
#include "multilift/policy.hpp"
#include "multilift/trainer.hpp"

namespace multilift {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<Vec13> quad_states(const World& w) {
    std::vector<Vec13> out;
    for (const auto& q : w.state().quads) out.push_back(q.to_vector());
    return out;
}

// Window samples of a nominal window, references rebuilt at each tick's tilt.
std::vector<WindowSample> window_samples(const Scenario& s, const NominalWindow& w, double t0) {
    std::vector<WindowSample> out;
    const double dt = s.horizon.dt;
    for (size_t k = 0; k < w.load_x.size(); ++k) {
        double beta = w.ticks[std::min(k, w.ticks.size() - 1)].beta;
        ReferenceSample ref = make_reference(s.system, sample_path(s.path, t0 + k * dt), beta, s.tension_beta());
        out.push_back(evaluate_losses(s, w.quad_x[k], w.load_x[k], ref));
    }
    return out;
}

double total_loss(const std::vector<WindowSample>& w) {
    double l = 0.0;
    for (double v : window_losses(w)) l += v;
    return l;
}

struct RecordedWindow {
    NominalWindow window;
    std::vector<SensitivityState> sens;
    std::vector<WindowSample> samples;
};

RecordedWindow record_window(GradientFixture& f, int n_cl, CouplingMode mode) {
    DistributedMpc& mpc = *f.mpc;
    const int n = mpc.num_quads();
    std::vector<SensitivityStep> steps;
    RecordedWindow r;
    r.window = run_nominal_window(mpc, f.quad_x, f.load_x, f.time, n_cl, f.scenario.solver, nullptr,
                                  [&](const LoopTick& tk) {
                                      MpcGradients g = all_mpc_gradients(mpc, tk.solutions, 1);
                                      steps.push_back(assemble_step(static_cast<int>(steps.size()), mpc, tk.quad_x,
                                                                    tk.load_x, tk.quad_u, tk.load_u, g, true, true));
                                  });
    std::vector<int> dims;
    for (int i = 0; i < n; ++i) dims.push_back(mpc.quad(i).theta_dim());
    r.sens = propagate(steps, n, dims, mpc.load().theta_dim(), mode, 1);
    r.samples = window_samples(f.scenario, r.window, f.time);
    return r;
}

// Loss of the window replayed with the agents' current theta.
double replay_loss(GradientFixture& f, const RecordedWindow& rec) {
    NominalWindow w = run_nominal_window(*f.mpc, f.quad_x, f.load_x, f.time, static_cast<int>(rec.window.ticks.size()),
                                         f.scenario.solver, &rec.window);
    return total_loss(window_samples(f.scenario, w, f.time));
}

void set_agent_theta(DistributedMpc& mpc, int agent, const Vec& theta) {
    if (agent < mpc.num_quads())
        mpc.set_quad_theta(agent, theta);
    else
        mpc.set_load_theta(theta);
}

Vec agent_theta(const DistributedMpc& mpc, int agent) {
    return agent < mpc.num_quads() ? mpc.quad(agent).theta() : mpc.load().theta();
}

std::string agent_name(int agent, int n) { return agent < n ? "q" + std::to_string(agent) : std::string("l"); }

Vec13 random_state(std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec13 x;
    for (int i = 0; i < 13; ++i) x(i) = 0.3 * nd(rng);
    x(idx::p + 2) += 1.0;
    Vec4 q = x.segment<4>(idx::q);
    q(0) += 1.0;
    x.segment<4>(idx::q) = q.normalized();
    return x;
}

}  // namespace

bool CheckReport::pass() const {
    for (const auto& c : items)
        if (!c.pass()) return false;
    return !items.empty();
}

double CheckReport::worst_ratio() const {
    double w = 0.0;
    for (const auto& c : items) w = std::max(w, c.worst_ratio);
    return w;
}

void write_report_csv(std::ostream& os, const CheckReport& r) {
    for (const auto& c : r.items) {
        GradientComparison named = c;
        named.name = r.name + "/" + c.name;
        write_comparison_csv(os, named);
    }
}

Scenario gradient_fixture_scenario() {
    Scenario s = circle_scenario(2, true);
    s.name = "gradient-fixture-2";
    s.horizon.horizon = 5;
    s.solver.tolerance = 1e-11;
    s.solver.max_iterations = 500;
    return s;
}

GradientFixture make_gradient_fixture(const Scenario& s, int warmup_ticks) {
    GradientFixture f;
    f.scenario = s;
    f.mpc = std::make_unique<DistributedMpc>(s);
    PathSample start = sample_path(s.path, 0.0);
    HoverEquilibrium eq = hover_equilibrium(s.system, start.p, s.tilt_at(start.p));
    World w(s.system.world_params(), eq.state);
    const double dt = s.horizon.dt;
    const int sub = static_cast<int>(std::lround(dt / s.training.physics_dt));
    for (int tick = 0; tick <= warmup_ticks; ++tick) {
        f.time = tick * dt;
        f.quad_x = quad_states(w);
        f.load_x = w.state().load.to_vector();
        f.mpc->set_references(f.time, s.tilt_at(f.load_x.segment<3>(idx::p)));
        f.tick = f.mpc->run(f.quad_x, f.load_x, 1);
        if (tick == warmup_ticks) break;
        for (int k = 0; k < sub; ++k)
            if (auto fault = w.step(f.tick.quad_controls, s.training.physics_dt))
                throw NumericalFailure("fixture warm-up: " + fault->message);
    }
    return f;
}

CheckReport check_mpc_gradients(GradientFixture& f, double step, double abs_tol, double rel_tol) {
    auto t0 = Clock::now();
    CheckReport r;
    r.name = "grad-mpc";
    DistributedMpc& mpc = *f.mpc;
    const SolverOptions& opts = f.scenario.solver;
    auto add = [&](const StageModel& m, const OcpSolution& sol, const GeneralizedTheta& th, const std::string& name) {
        Mat a = mpc_gradient(m, sol, th);
        Mat n = fd_first_control_gradient(m, sol, th, step, opts);
        r.items.push_back(compare_gradients(name, a, n, abs_tol, rel_tol));
    };
    const int n = mpc.num_quads();
    // The agent models still hold the data of the fixture tick's last round.
    for (int i = 0; i < n; ++i) {
        const QuadrotorOcp& m = mpc.quad(i);
        const OcpSolution& sol = f.tick.quad_solutions[i];
        const std::string p = agent_name(i, n) + ":";
        add(m, sol, GeneralizedTheta::own_theta(m), p + "own_theta");
        add(m, sol, GeneralizedTheta::own_state(m), p + "own_feedback_state");
        add(m, sol, GeneralizedTheta::peer_state(m.load_state_segment()), p + "peer_state_load");
        add(m, sol, GeneralizedTheta::peer_control(m.load_control_segment()), p + "peer_control_load");
    }
    const LoadOcp& m = mpc.load();
    add(m, f.tick.load_solution, GeneralizedTheta::own_theta(m), "l:own_theta");
    add(m, f.tick.load_solution, GeneralizedTheta::own_state(m), "l:own_feedback_state");
    for (int i = 0; i < n; ++i)
        add(m, f.tick.load_solution, GeneralizedTheta::peer_state(m.quad_state_segment(i)),
            "l:peer_state_" + agent_name(i, n));
    r.seconds = since(t0);
    return r;
}

CheckReport check_dsp_theta(GradientFixture& f, int n_cl, CouplingMode mode, double step, double abs_tol,
                            double rel_tol) {
    auto t0 = Clock::now();
    CheckReport r;
    r.name = "dsp-theta-" + to_string(mode);
    DistributedMpc& mpc = *f.mpc;
    const int n = mpc.num_quads();
    RecordedWindow rec = record_window(f, n_cl, mode);
    ThetaGradients g = window_theta_gradients(rec.samples, rec.sens, mode);
    for (int agent = 0; agent <= n; ++agent) {
        const Vec analytic = agent < n ? g.quads[agent] : g.load;
        const Vec th0 = agent_theta(mpc, agent);
        Vec numeric(th0.size());
        for (int j = 0; j < th0.size(); ++j) {
            Vec th = th0;
            th(j) += step;
            set_agent_theta(mpc, agent, th);
            double lp = replay_loss(f, rec);
            th(j) = th0(j) - step;
            set_agent_theta(mpc, agent, th);
            double lm = replay_loss(f, rec);
            numeric(j) = (lp - lm) / (2.0 * step);
        }
        set_agent_theta(mpc, agent, th0);
        r.items.push_back(compare_gradients(agent_name(agent, n), analytic, numeric, abs_tol, rel_tol));
    }
    r.seconds = since(t0);
    return r;
}

CheckReport check_dsp_policy(GradientFixture& f, int n_cl, CouplingMode mode, std::uint64_t seed, int directions,
                             double step, double rel_tol) {
    auto t0 = Clock::now();
    CheckReport r;
    r.name = "dsp-policy-" + to_string(mode);
    DistributedMpc& mpc = *f.mpc;
    const int n = mpc.num_quads();
    const TrainingSettings& ts = f.scenario.training;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);

    // One net per agent with a fixed observation, so theta is constant over the window.
    std::vector<AgentPolicy> nets;
    std::vector<Vec> obs;
    for (int agent = 0; agent <= n; ++agent) {
        const int m = agent_theta(mpc, agent).size();
        const int in = agent < n ? 12 : 12 + n;
        AgentPolicy p;
        p.net = PolicyNet(in, ts.hidden, m, rng(), ts.power_iterations);
        p.bounds = HyperBounds::uniform(m, ts.theta_min, ts.theta_max);
        Vec o(in);
        for (int k = 0; k < in; ++k) o(k) = 0.1 * nd(rng);
        set_agent_theta(mpc, agent, p.theta(o));
        nets.push_back(std::move(p));
        obs.push_back(o);
    }
    RecordedWindow rec = record_window(f, n_cl, mode);
    ThetaGradients g = window_theta_gradients(rec.samples, rec.sens, mode);
    for (int agent = 0; agent <= n; ++agent) {
        AgentPolicy& p = nets[agent];
        ForwardCache cache;
        p.net.forward(obs[agent], &cache);
        const Vec& dl_dtheta = agent < n ? g.quads[agent] : g.load;
        Vec grad = p.net.backward(cache, dl_dtheta.cwiseProduct(p.bounds.jacobian_diagonal()));
        const Vec w0 = p.net.parameters();
        Vec analytic(directions), numeric(directions);
        for (int d = 0; d < directions; ++d) {
            Vec dir(w0.size());
            if (d == 0) {
                dir = grad;
            } else {
                for (int k = 0; k < dir.size(); ++k) dir(k) = nd(rng);
            }
            dir.normalize();
            analytic(d) = grad.dot(dir);
            double l[2];
            for (int s = 0; s < 2; ++s) {
                p.net.set_parameters(w0 + (s == 0 ? step : -step) * dir);
                set_agent_theta(mpc, agent, p.theta(obs[agent]));
                l[s] = replay_loss(f, rec);
            }
            numeric(d) = (l[0] - l[1]) / (2.0 * step);
        }
        p.net.set_parameters(w0);
        set_agent_theta(mpc, agent, p.theta(obs[agent]));
        const double floor = rel_tol * numeric.cwiseAbs().maxCoeff();
        r.items.push_back(compare_gradients(agent_name(agent, n), analytic, numeric, floor, rel_tol));
    }
    r.seconds = since(t0);
    return r;
}

CheckReport check_policy_backprop(std::uint64_t seed, double rel_tol) {
    auto t0 = Clock::now();
    CheckReport r;
    r.name = "policy";
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const int shapes[3][2] = {{12, 28}, {15, 27}, {3, 1}};
    for (const auto& sh : shapes) {
        PolicyNet net(sh[0], 30, sh[1], rng());
        Vec o(sh[0]);
        for (int k = 0; k < o.size(); ++k) o(k) = nd(rng);
        Mat a = net.jacobian(o);
        const Vec w0 = net.parameters();
        Mat num(a.rows(), a.cols());
        const double h = 1e-6;
        for (int j = 0; j < w0.size(); ++j) {
            Vec w = w0;
            w(j) += h;
            net.set_parameters(w);
            Vec fp = net.forward(o);
            w(j) = w0(j) - h;
            net.set_parameters(w);
            Vec fm = net.forward(o);
            num.col(j) = (fp - fm) / (2.0 * h);
        }
        net.set_parameters(w0);
        r.items.push_back(compare_gradients("net_" + std::to_string(sh[0]) + "x" + std::to_string(sh[1]), a, num,
                                            1e-8, rel_tol));
    }
    r.seconds = since(t0);
    return r;
}

CheckReport check_loss_gradients(std::uint64_t seed, double tol) {
    auto t0 = Clock::now();
    CheckReport r;
    r.name = "losses";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(0.1, 2.0);
    SlotSpec slot;
    slot.position = Vec3(0.2, 0.1, 1.0);
    slot.lower_z = 0.8;
    auto fd = [](const std::function<double(const Vec13&)>& fn, const Vec13& x) {
        Vec13 g;
        const double h = 1e-6;
        for (int i = 0; i < 13; ++i) {
            Vec13 a = x, b = x;
            a(i) += h;
            b(i) -= h;
            g(i) = (fn(a) - fn(b)) / (2.0 * h);
        }
        return g;
    };
    for (int trial = 0; trial < 3; ++trial) {
        Vec13 x = random_state(rng);
        Vec13 ref = random_state(rng);
        Vec12 w;
        for (int i = 0; i < 12; ++i) w(i) = ud(rng);
        const std::string k = std::to_string(trial);
        r.items.push_back(compare_gradients(
            "tracking_" + k, tracking_term(x, ref, w).grad,
            fd([&](const Vec13& z) { return tracking_term(z, ref, w).value; }, x), tol, tol));
        Vec3 obs = ref.segment<3>(idx::p);
        r.items.push_back(compare_gradients(
            "obstacle_" + k, obstacle_term(x, obs, 2.0, 1.5).grad,
            fd([&](const Vec13& z) { return obstacle_term(z, obs, 2.0, 1.5).value; }, x), tol, tol));
        r.items.push_back(compare_gradients(
            "slot_" + k, slot_term(x, 1.0, slot, 3.0, 2.0, 1.5).grad,
            fd([&](const Vec13& z) { return slot_term(z, 1.0, slot, 3.0, 2.0, 1.5).value; }, x), tol, tol));
    }
    r.seconds = since(t0);
    return r;
}

}  // namespace multilift
