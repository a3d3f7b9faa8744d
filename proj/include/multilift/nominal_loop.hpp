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

#ifndef MULTILIFT_NOMINAL_LOOP_HPP
#define MULTILIFT_NOMINAL_LOOP_HPP

#include <functional>
#include <vector>

#include "multilift/dist_mpc.hpp"

namespace multilift {

/// One control tick of the closed loop driven by the control models.
struct LoopTick {
    double time = 0.0;
    double beta = 0.0;
    std::vector<Vec13> quad_x;
    Vec13 load_x = Vec13::Zero();
    std::vector<Vec4> quad_u;
    Vec load_u;
    TrajectoryBundle frozen;  ///< exchanged plans; only entries after the first are used
    TickResult solutions;     ///< quad_solutions and load_solution of the tick
};

struct NominalWindow {
    std::vector<LoopTick> ticks;            ///< N_cl ticks
    std::vector<std::vector<Vec13>> quad_x;  ///< N_cl + 1 states per tick index, then per quadrotor
    std::vector<Vec13> load_x;              ///< N_cl + 1 load states
};

/**
 * @brief Closed loop on the control models with the exchanged plans frozen.
 *
 * Every tick the load solves first against the frozen quadrotor plans (first
 * entries replaced by the current states), then each quadrotor solves against
 * the frozen load plan whose first state and control are the current load state
 * and the fresh load control. States advance with the agents' own models.
 *
 * Without `replay`, the frozen plans of each tick come from a full distributed
 * solve at that tick and the tilt from the scenario schedule; with
 * `replay`, plans and tilts are taken from it so that perturbed runs share them.
 * `on_tick` runs after the solves of a tick while the agent models still hold that tick's data.
 */
NominalWindow run_nominal_window(DistributedMpc& mpc, const std::vector<Vec13>& quad_x0, const Vec13& load_x0,
                                 double t0, int n_cl, const SolverOptions& solver, const NominalWindow* replay,
                                 const std::function<void(const LoopTick&)>& on_tick = {}, int workers = 1);

}  // namespace multilift

#endif  // MULTILIFT_NOMINAL_LOOP_HPP
