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

// One pass/fail line per acceptance criterion. `--only <name>` runs a single
// criterion, `--list` prints the names, `--out <dir>` keeps the trend data.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "multilift/checks.hpp"
#include "multilift/dist_mpc.hpp"
#include "multilift/grad_mpc.hpp"
#include "multilift/trainer.hpp"
#include "physics_oracles.hpp"
#include "solver_oracles.hpp"

using namespace multilift;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [FAILED]");
        pass = pass && ok;
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path g_out;

void keep(const std::string& name, const std::string& text) {
    if (g_out.empty()) return;
    fs::create_directories(g_out);
    std::ofstream(g_out / name) << text;
}

// ------------------------------------------------------------------ criteria

Outcome gradient_fidelity() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    GradientFixture f = make_gradient_fixture(gradient_fixture_scenario(), 50);
    CheckReport r = check_mpc_gradients(f, 1e-4, 1e-3, 1e-2);
    double secs = seconds_since(t0);
    o.require(!r.items.empty() && r.pass(), std::to_string(r.items.size()) + " tag blocks, worst ratio " +
                                               fmt(r.worst_ratio()));
    o.require(secs < 60.0, "runtime " + fmt(secs) + " s < 60 s");
    return o;
}

Outcome dsp_end_to_end() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    GradientFixture f = make_gradient_fixture(gradient_fixture_scenario(), 50);
    CheckReport th = check_dsp_theta(f, 10, CouplingMode::Pairwise);
    CheckReport pol = check_dsp_policy(f, 10, CouplingMode::Pairwise, 1, 6, 1e-5, 2e-2);
    double secs = seconds_since(t0);
    o.require(th.pass(), "dL/dtheta worst ratio " + fmt(th.worst_ratio()));
    o.require(!pol.items.empty() && pol.pass(), "dL/dvarpi worst ratio " + fmt(pol.worst_ratio()) + " (2% tolerance)");
    o.require(secs < 300.0, "runtime " + fmt(secs) + " s < 300 s");
    return o;
}

Outcome physics() {
    Outcome o;
    Scenario six = weight_learning_scenario();
    six.system.load.com_bias.setZero();
    double drift = testing::hover_drift(six, 1.0);
    o.require(drift < 1e-6, "6-quadrotor hover drift " + fmt(drift) + " < 1e-6");
    double energy = testing::energy_drift(1.0, 0.005);
    o.require(energy < 1e-3, "energy drift " + fmt(energy) + " < 0.1%");
    double order = testing::rk4_order_factor(0.005);
    o.require(order >= 8.0 && order <= 32.0, "RK4 halving factor " + fmt(order) + " in [8, 32]");

    LoadParams lp;
    lp.attachments = ngon_attachments(3, 0.5, 0.0);
    CableParams cable;
    RigidState load, quad;
    quad.p = lp.attachments[1] + cable_direction(lp.attachments[1], 0.3) * cable.natural_length;
    quad.v = Vec3(0.3, -0.2, 2.0);
    TensionResult at = cable_tension(quad, load, 1, cable, lp);
    quad.p = lp.attachments[1] + cable_direction(lp.attachments[1], 0.3) * (0.9 * cable.natural_length);
    TensionResult inside = cable_tension(quad, load, 1, cable, lp);
    bool slack = at.magnitude == 0.0 && at.on_load == Vec3::Zero() && inside.magnitude == 0.0 &&
                 inside.on_load == Vec3::Zero();
    o.require(slack, "slack cable force exactly zero");
    return o;
}

Outcome solver() {
    Outcome o;
    SolverOptions tight;
    tight.tolerance = 1e-10;
    tight.max_iterations = 200;
    LqrStub m = testing::lqr_fixture();
    OcpSolution sol = solve_ocp(m, nullptr, tight);
    double err = testing::lqr_riccati_error(m, sol);
    o.require(err < 1e-8, "LQR vs Riccati " + fmt(err) + " < 1e-8");

    testing::ToyInstance toy;
    auto best = toy.brute_force();
    auto sweep = testing::gamma_sweep(toy, {1e-1, 3e-2, 1e-2, 3e-3, 1e-3});
    bool ok = true;
    double prev = 1e300;
    std::string gaps;
    for (const auto& p : sweep) {
        double gap = p.objective - best.cost;
        ok = ok && p.converged && p.interior && gap > -1e-9 && gap < prev;
        prev = gap;
        gaps += (gaps.empty() ? "" : ",") + fmt(gap);
    }
    ok = ok && prev < 0.02 * (sweep.front().objective - best.cost);
    o.require(ok, "gamma sweep gaps [" + gaps + "] monotone, interior");

    double res = pmp_residual(m, solve_ocp(m)).max();
    QuadrotorOcp q = toy.make(1e-2);
    double res_q = pmp_residual(q, solve_ocp(q)).max();
    o.require(res < 1e-6 && res_q < 1e-6, "PMP residual " + fmt(std::max(res, res_q)) + " < 1e-6");
    return o;
}

Outcome dmpc() {
    Outcome o;
    Scenario s = hover_fixture(3);
    std::vector<std::vector<double>> traces;
    int max_rounds = 0;
    bool converged = true;
    for (int workers : {1, 2, 3, 4}) {
        HoverEquilibrium eq = hover_equilibrium(s.system, s.path.center, s.tension_beta());
        World world(s.system.world_params(), eq.state);
        DistributedMpc mpc(s);
        const int substeps = static_cast<int>(std::lround(s.horizon.dt / s.training.physics_dt));
        std::vector<double> trace;
        for (int t = 0; t < 50; ++t) {
            std::vector<Vec13> qx;
            for (const auto& qs : world.state().quads) qx.push_back(qs.to_vector());
            Vec13 lx = world.state().load.to_vector();
            mpc.set_references(t * s.horizon.dt, s.tilt_at(lx.head<3>()));
            TickResult r = mpc.run(qx, lx, workers);
            max_rounds = std::max(max_rounds, r.rounds);
            converged = converged && r.converged;
            for (const auto& u : r.quad_controls) trace.insert(trace.end(), u.data(), u.data() + 4);
            trace.insert(trace.end(), r.load_control.data(), r.load_control.data() + r.load_control.size());
            trace.push_back(r.error);
            for (int k = 0; k < substeps; ++k) world.step(r.quad_controls, s.training.physics_dt);
        }
        const Vec y = world.pack();
        trace.insert(trace.end(), y.data(), y.data() + y.size());
        traces.push_back(trace);
    }
    bool same = std::all_of(traces.begin(), traces.end(), [&](const auto& t) {
        return t.size() == traces[0].size() && std::equal(t.begin(), t.end(), traces[0].begin(),
                                                          [](double a, double b) { return a == b; });
    });
    o.require(same, "50 closed-loop ticks bitwise identical for 1-4 workers");
    o.require(converged && max_rounds <= 5, "max rounds " + std::to_string(max_rounds) + " <= 5 at delta 1e-2");
    return o;
}

Outcome learning_trend() {
    Outcome o;
    std::ostringstream csv;
    csv << "case,episode,L_mean,updates,aborted\n";
    for (bool biased : {false, true}) {
        const std::string name = biased ? "biased" : "uniform";
        Scenario s = circle_scenario(3, biased);
        Trainer tr(s, 7);
        std::vector<double> l;
        bool finite = true;
        for (int e = 0; e <= 8; ++e) {
            EpisodeResult r = tr.run_episode(e, true);
            csv << name << ',' << e << ',' << std::setprecision(17) << r.l_mean << ',' << r.updates << ','
                << (r.aborted ? 1 : 0) << '\n';
            finite = finite && !r.aborted && std::isfinite(r.l_mean) && r.skipped_updates == 0;
            l.push_back(r.l_mean);
            if (r.aborted) break;
        }
        const double ratio = l.size() == 9 ? l[8] / l[0] : INFINITY;
        o.require(finite, name + " CoM: no NaN fault");
        o.require(ratio <= 0.6, name + " CoM: L8/L0 = " + fmt(l.back()) + "/" + fmt(l.front()) + " = " + fmt(ratio) +
                                    " <= 0.6");
    }
    keep("learning_trend.csv", csv.str());
    return o;
}

Outcome slot_trend() {
    Outcome o;
    std::ostringstream csv;
    csv << "case,episode,min_clearance\n";
    Scenario s = slot_scenario(3);
    Trainer tr(s, 7);
    std::vector<double> c;
    for (int e = 0; e < 5; ++e) {
        EpisodeResult r = tr.run_episode(e, true);
        if (r.aborted || !r.min_clearance) {
            o.require(false, "episode " + std::to_string(e) + " traversed the slot");
            return o;
        }
        c.push_back(*r.min_clearance);
        csv << "learned," << e << ',' << std::setprecision(17) << c.back() << '\n';
    }
    bool mono = true;
    std::string list;
    for (size_t k = 0; k < c.size(); ++k) {
        if (k > 0) mono = mono && c[k] > c[k - 1];
        list += (k ? "," : "") + fmt(c[k]);
    }
    o.require(mono && c.back() > 0.0, "clearance [" + list + "] rising, final > 0");

    Scenario off = s;
    off.training.tension_ref_enabled = false;
    Trainer fixed(off, 7);
    EpisodeResult r = fixed.run_episode(0, true);
    const double cf = r.min_clearance ? *r.min_clearance : INFINITY;
    csv << "disabled,0," << std::setprecision(17) << cf << '\n';
    o.require(!fixed.learns_load() && cf <= 0.0, "tension offset disabled: clearance " + fmt(cf) + " <= 0");
    keep("slot_trend.csv", csv.str());
    return o;
}

Outcome policy_mechanics() {
    Outcome o;
    CheckReport bp = check_policy_backprop(7, 1e-5);
    o.require(bp.pass(), "backprop vs FD worst ratio " + fmt(bp.worst_ratio()) + " (1e-5 relative)");

    // Aggressive random updates on every net shape.
    double worst = 0.0;
    std::mt19937_64 rng(19);
    std::normal_distribution<double> nd(0.0, 1.0);
    const int shapes[3][2] = {{12, 28}, {15, 27}, {3, 1}};
    for (const auto& sh : shapes) {
        PolicyNet net(sh[0], 30, sh[1], rng());
        AdamState adam;
        adam.learning_rate = 1e-2;
        for (int k = 0; k < 300; ++k) {
            Vec g(net.num_params());
            for (int i = 0; i < g.size(); ++i) g(i) = nd(rng);
            apply_gradient(net, adam, g);
            for (double sn : net.spectral_norms()) worst = std::max(worst, sn);
        }
    }
    // Updates of a real training episode.
    Scenario s = circle_scenario(3, true);
    s.training.episode_time = 1.5;
    TrainerOptions opt;
    opt.track_spectral_norms = true;
    Trainer tr(s, 3, opt);
    EpisodeResult r = tr.run_episode(0, true);
    worst = std::max(worst, r.max_spectral_norm);
    o.require(r.updates > 0 && worst <= 1.0 + 1e-3, "max layer spectral norm " + fmt(worst) + " <= 1 + 1e-3");

    double lo = INFINITY, hi = -INFINITY;
    std::uniform_real_distribution<double> wide(-1e3, 1e3);
    for (const auto& p : tr.quad_policies()) {
        for (int k = 0; k < 200; ++k) {
            Vec obs(p.net.input_dim());
            for (int i = 0; i < obs.size(); ++i) obs(i) = k < 100 ? nd(rng) : wide(rng);
            Vec th = p.theta(obs);
            lo = std::min(lo, th.minCoeff());
            hi = std::max(hi, th.maxCoeff());
        }
    }
    o.require(lo >= 0.01 && hi <= 100.0, "theta range [" + fmt(lo) + ", " + fmt(hi) + "] within [0.01, 100]");
    return o;
}

std::string episode_csv(int workers) {
    Scenario s = circle_scenario(3, true);
    s.training.episode_time = 1.0;
    TrainerOptions opt;
    opt.workers = workers;
    Trainer tr(s, 2024, opt);
    std::ostringstream os;
    os << std::setprecision(17);
    write_episode_csv_header(os, 3);
    EpisodeSinks sinks;
    sinks.ticks = &os;
    for (int e = 0; e < 2; ++e) tr.run_episode(e, true, sinks);
    return os.str();
}

Outcome determinism() {
    Outcome o;
    std::string a = episode_csv(1), b = episode_csv(1), c = episode_csv(3);
    o.require(!a.empty() && a == b, "repeat run: episode CSV identical (" + std::to_string(a.size()) + " bytes)");
    o.require(a == c, "3 workers: episode CSV identical");
    return o;
}

struct Criterion {
    const char* name;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {"gradient-fidelity", gradient_fidelity}, {"dsp-end-to-end", dsp_end_to_end},
        {"physics", physics},                     {"solver", solver},
        {"dmpc", dmpc},                           {"learning-trend", learning_trend},
        {"slot-trend", slot_trend},               {"policy-mechanics", policy_mechanics},
        {"determinism", determinism},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    std::string only;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            only = argv[++i];
        } else if (a == "--out" && i + 1 < argc) {
            g_out = argv[++i];
        } else if (a == "--list") {
            for (const auto& c : criteria()) std::cout << c.name << '\n';
            return 0;
        } else {
            std::cerr << "usage: acceptance [--only <name>] [--out <dir>] [--list]\n";
            return 2;
        }
    }
    bool all = true, found = false;
    for (const auto& c : criteria()) {
        if (!only.empty() && only != c.name) continue;
        found = true;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << " (" << fmt(seconds_since(t0)) << " s): " << o.detail
                  << std::endl;
        all = all && o.pass;
    }
    if (!found) {
        std::cerr << "unknown criterion '" << only << "'\n";
        return 2;
    }
    return all ? 0 : 1;
}
