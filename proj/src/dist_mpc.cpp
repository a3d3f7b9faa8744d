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

#include "multilift/dist_mpc.hpp"

#include <algorithm>
#include <cmath>

#include "multilift/errors.hpp"
#include "multilift/parallel.hpp"

namespace multilift {

namespace {

std::vector<Vec13> as13(const std::vector<Vec>& xs) {
    std::vector<Vec13> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.emplace_back(x);
    return out;
}

template <typename T>
std::vector<T> shift(const std::vector<T>& v) {
    if (v.empty()) return v;
    std::vector<T> out(v.begin() + 1, v.end());
    out.push_back(v.back());
    return out;
}

double stacked_diff(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    if (a.size() != b.size()) throw ProtocolError("trajectory length mismatch");
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]).squaredNorm();
    return std::sqrt(s);
}

double plan_error(const AgentPlan& a, const AgentPlan& b) {
    const double n = static_cast<double>(std::max<size_t>(1, a.U.size()));
    return std::max(stacked_diff(a.X, b.X), stacked_diff(a.U, b.U)) / n;
}

AgentPlan shift(const AgentPlan& p) { return {shift(p.X), shift(p.U)}; }

}  // namespace

TrajectoryBundle TrajectoryBundle::shifted() const {
    TrajectoryBundle b;
    for (const auto& q : quads) b.quads.push_back(shift(q));
    b.load = shift(load);
    b.iteration = 0;
    b.error = error;
    return b;
}

double bundle_error(const TrajectoryBundle& a, const TrajectoryBundle& b) {
    if (a.quads.size() != b.quads.size()) throw ProtocolError("bundle size mismatch");
    double e = plan_error(a.load, b.load);
    for (size_t i = 0; i < a.quads.size(); ++i) e = std::max(e, plan_error(a.quads[i], b.quads[i]));
    return e;
}

DistributedMpc::DistributedMpc(const Scenario& scenario) : scenario_(scenario) {
    scenario_.validate();
    const auto& mp = scenario_.system;
    LoadParams lp = mp.load_params();
    const int n = mp.num_quads;
    for (int i = 0; i < n; ++i) {
        QuadrotorOcp::Setup qs;
        qs.index = i;
        qs.num_cables = n;
        qs.quad = mp.quad;
        qs.attachment = lp.attachments[i];
        qs.natural_length = mp.cable.natural_length;
        qs.horizon = scenario_.horizon;
        qs.obstacle = scenario_.obstacle;
        quads_.push_back(std::make_unique<QuadrotorOcp>(qs));
        quads_.back()->set_theta(scenario_.weights.quad.pack());
    }
    LoadOcp::Setup ls;
    ls.load = lp;
    ls.cable = mp.cable;
    ls.horizon = scenario_.horizon;
    ls.obstacle = scenario_.obstacle;
    ls.fixed_weights = scenario_.weights.load;
    if (scenario_.experiment == Experiment::TensionRef) {
        ls.mode = LoadOcp::ThetaMode::TensionOffset;
        load_ = std::make_unique<LoadOcp>(ls);
    } else {
        ls.mode = LoadOcp::ThetaMode::Weights;
        load_ = std::make_unique<LoadOcp>(ls);
        load_->set_theta(scenario_.weights.load.pack());
    }
    set_references(0.0, scenario_.tilt_at(sample_path(scenario_.path, 0.0).p));
}

void DistributedMpc::set_references(double t, double beta) {
    const int N = scenario_.horizon.horizon;
    const double dt = scenario_.horizon.dt;
    const double tb = scenario_.tension_beta();
    refs_.clear();
    for (int k = 0; k <= N; ++k)
        refs_.push_back(make_reference(scenario_.system, sample_path(scenario_.path, t + k * dt), beta, tb));
    for (int i = 0; i < num_quads(); ++i) {
        std::vector<Vec13> xr;
        std::vector<Vec> ur;
        for (int k = 0; k <= N; ++k) xr.push_back(refs_[k].quads[i].x);
        for (int k = 0; k < N; ++k) ur.push_back(refs_[k].quads[i].u);
        quads_[i]->set_references(xr, ur);
    }
    std::vector<Vec13> xr;
    std::vector<Vec> ur;
    for (int k = 0; k <= N; ++k) xr.push_back(refs_[k].load.x);
    for (int k = 0; k < N; ++k) ur.push_back(refs_[k].load.u);
    load_->set_references(xr, ur);
}

TrajectoryBundle DistributedMpc::reference_bundle() const {
    const int N = scenario_.horizon.horizon;
    TrajectoryBundle b;
    b.quads.resize(num_quads());
    for (int k = 0; k <= N; ++k) {
        for (int i = 0; i < num_quads(); ++i) {
            b.quads[i].X.push_back(refs_[k].quads[i].x);
            if (k < N) b.quads[i].U.push_back(refs_[k].quads[i].u);
        }
        b.load.X.push_back(refs_[k].load.x);
        if (k < N) b.load.U.push_back(refs_[k].load.u);
    }
    return b;
}

TrajectoryBundle DistributedMpc::solve_round(const TrajectoryBundle& previous, const std::vector<Vec13>& quad_states,
                                             const Vec13& load_state, int workers, TickResult* result) {
    const int n = num_quads();
    if (static_cast<int>(previous.quads.size()) != n || static_cast<int>(quad_states.size()) != n)
        throw ProtocolError("bundle does not match the team size");
    // First entries of the exchanged plans are replaced by the measured states.
    auto load_x = as13(previous.load.X);
    load_x.front() = load_state;
    std::vector<std::vector<Vec13>> quad_x(n);
    for (int i = 0; i < n; ++i) {
        quad_x[i] = as13(previous.quads[i].X);
        quad_x[i].front() = quad_states[i];
    }

    std::vector<OcpSolution> sols(n);
    parallel_for(n, workers, [&](int i) {
        try {
            auto& ocp = *quads_[i];
            ocp.set_initial_state(quad_states[i]);
            std::vector<std::vector<Vec13>> peers;
            for (int j = 0; j < n; ++j)
                if (j != i) peers.push_back(quad_x[j]);
            ocp.set_externals(load_x, previous.load.U, peers);
            sols[i] = solve_ocp(ocp, &previous.quads[i].U, scenario_.solver);
        } catch (const AgentError&) {
            throw;
        } catch (const std::exception& e) {
            throw AgentError("quadrotor " + std::to_string(i), e.what());
        }
    });

    TrajectoryBundle next;
    next.quads.resize(n);
    std::vector<std::vector<Vec13>> fresh(n);
    for (int i = 0; i < n; ++i) {
        next.quads[i] = {sols[i].X, sols[i].U};
        fresh[i] = as13(sols[i].X);
    }
    OcpSolution lsol;
    try {
        load_->set_initial_state(load_state);
        load_->set_externals(fresh);
        lsol = solve_ocp(*load_, &previous.load.U, scenario_.solver);
    } catch (const std::exception& e) {
        throw AgentError("load", e.what());
    }
    next.load = {lsol.X, lsol.U};
    next.iteration = previous.iteration + 1;
    next.error = bundle_error(previous, next);

    if (result) {
        result->quad_solutions = std::move(sols);
        result->load_solution = std::move(lsol);
    }
    return next;
}

TickResult DistributedMpc::run(const std::vector<Vec13>& quad_states, const Vec13& load_state, int workers) {
    TrajectoryBundle prev = has_warm_ ? warm_ : reference_bundle();
    prev.iteration = 0;
    const auto& ds = scenario_.distributed;
    TickResult r;
    for (int k = 0; k < ds.k_max; ++k) {
        prev = solve_round(prev, quad_states, load_state, workers, &r);
        r.rounds = prev.iteration;
        r.error = prev.error;
        if (prev.error < ds.delta) {
            r.converged = true;
            break;
        }
    }
    last_ = prev;
    warm_ = prev.shifted();
    has_warm_ = true;

    for (const auto& s : r.quad_solutions) {
        r.quad_controls.emplace_back(s.U.front());
        r.diagnostics.push_back({s.diagnostics.iterations, s.diagnostics.max_pmp_residual, s.diagnostics.status});
    }
    r.load_control = r.load_solution.U.front();
    const auto& d = r.load_solution.diagnostics;
    r.diagnostics.push_back({d.iterations, d.max_pmp_residual, d.status});
    return r;
}

void write_mpc_csv_header(std::ostream& os, int num_quads) {
    os << "t,rounds,error,converged";
    for (int i = 0; i <= num_quads; ++i) {
        std::string a = i < num_quads ? "quad" + std::to_string(i) : "load";
        os << ',' << a << "_iterations," << a << "_pmp_residual," << a << "_status";
    }
    os << '\n';
}

void write_mpc_csv_row(std::ostream& os, double t, const TickResult& r) {
    os << t << ',' << r.rounds << ',' << r.error << ',' << (r.converged ? 1 : 0);
    for (const auto& d : r.diagnostics) os << ',' << d.iterations << ',' << d.pmp_residual << ',' << to_string(d.status);
    os << '\n';
}

}  // namespace multilift
