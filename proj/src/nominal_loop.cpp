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

#include "multilift/nominal_loop.hpp"

#include "multilift/errors.hpp"

namespace multilift {

namespace {

std::vector<Vec13> with_first(const std::vector<Vec>& xs, const Vec13& first) {
    std::vector<Vec13> out;
    for (const auto& x : xs) out.emplace_back(x);
    out.front() = first;
    return out;
}

}  // namespace

NominalWindow run_nominal_window(DistributedMpc& mpc, const std::vector<Vec13>& quad_x0, const Vec13& load_x0,
                                 double t0, int n_cl, const SolverOptions& solver, const NominalWindow* replay,
                                 const std::function<void(const LoopTick&)>& on_tick, int workers) {
    const int n = mpc.num_quads();
    const double dt = mpc.scenario().horizon.dt;
    if (replay && static_cast<int>(replay->ticks.size()) < n_cl) throw Error("replay window too short");
    NominalWindow w;
    w.quad_x.push_back(quad_x0);
    w.load_x.push_back(load_x0);
    for (int t = 0; t < n_cl; ++t) {
        LoopTick tick;
        tick.time = t0 + t * dt;
        tick.quad_x = w.quad_x.back();
        tick.load_x = w.load_x.back();
        if (replay) {
            tick.beta = replay->ticks[t].beta;
            tick.frozen = replay->ticks[t].frozen;
            mpc.set_references(tick.time, tick.beta);
        } else {
            tick.beta = mpc.scenario().tilt_at(tick.load_x.segment<3>(idx::p));
            mpc.set_references(tick.time, tick.beta);
            mpc.run(tick.quad_x, tick.load_x, workers);
            tick.frozen = mpc.last_bundle();
        }

        LoadOcp& load = mpc.load();
        std::vector<std::vector<Vec13>> quads;
        for (int i = 0; i < n; ++i) quads.push_back(with_first(tick.frozen.quads[i].X, tick.quad_x[i]));
        load.set_initial_state(tick.load_x);
        load.set_externals(quads);
        tick.solutions.load_solution = solve_ocp(load, &tick.frozen.load.U, solver);
        tick.load_u = tick.solutions.load_solution.U.front();

        auto load_traj = with_first(tick.frozen.load.X, tick.load_x);
        auto load_u = tick.frozen.load.U;
        load_u.front() = tick.load_u;
        tick.solutions.quad_solutions.resize(n);
        for (int i = 0; i < n; ++i) {
            QuadrotorOcp& q = mpc.quad(i);
            std::vector<std::vector<Vec13>> peers;
            for (int j = 0; j < n; ++j)
                if (j != i) peers.push_back(quads[j]);
            q.set_initial_state(tick.quad_x[i]);
            q.set_externals(load_traj, load_u, peers);
            tick.solutions.quad_solutions[i] = solve_ocp(q, &tick.frozen.quads[i].U, solver);
            tick.quad_u.emplace_back(tick.solutions.quad_solutions[i].U.front());
        }
        if (on_tick) on_tick(tick);

        std::vector<Vec13> next(n);
        for (int i = 0; i < n; ++i) {
            const QuadrotorOcp& q = mpc.quad(i);
            next[i] = q.dynamics(0, Vec(tick.quad_x[i]), Vec(tick.quad_u[i]), q.params(0));
        }
        Vec13 next_l = load.dynamics(0, Vec(tick.load_x), tick.load_u, load.params(0));
        if (!next_l.allFinite()) throw NumericalFailure("non-finite state in the nominal loop");
        w.quad_x.push_back(next);
        w.load_x.push_back(next_l);
        w.ticks.push_back(std::move(tick));
    }
    return w;
}

}  // namespace multilift
