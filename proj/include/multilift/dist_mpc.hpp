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

#ifndef MULTILIFT_DIST_MPC_HPP
#define MULTILIFT_DIST_MPC_HPP

#include <memory>
#include <ostream>
#include <vector>

#include "multilift/agents.hpp"
#include "multilift/ilqr.hpp"
#include "multilift/scenarios.hpp"

namespace multilift {

struct AgentPlan {
    std::vector<Vec> X;  ///< N+1 states
    std::vector<Vec> U;  ///< N controls
};

/// Plans of all agents after some rounds of the fixed-point iteration.
struct TrajectoryBundle {
    std::vector<AgentPlan> quads;
    AgentPlan load;
    int iteration = 0;
    double error = 0.0;

    /// Drops the first entry of every trajectory and repeats the last one.
    TrajectoryBundle shifted() const;
};

/// max over agents of (1/N)||X - X'||_2 and (1/N)||U - U'||_2 (stacked Euclidean norms).
double bundle_error(const TrajectoryBundle& a, const TrajectoryBundle& b);

struct AgentDiagnostics {
    int iterations = 0;
    double pmp_residual = 0.0;
    SolveStatus status = SolveStatus::Converged;
};

struct TickResult {
    std::vector<Vec4> quad_controls;  ///< u*_0 of every quadrotor
    Vec load_control;                 ///< u*_0 of the load (tension magnitudes)
    int rounds = 0;
    double error = 0.0;
    bool converged = false;
    std::vector<OcpSolution> quad_solutions;  ///< last round
    OcpSolution load_solution;
    std::vector<AgentDiagnostics> diagnostics;  ///< n quadrotors then the load
};

/**
 * @brief The n + 1 agent problems of one multilift team and the distributed solve.
 *
 * References, hyperparameters and feedback states are set per control tick;
 * run() performs the rounds and keeps the shifted bundle as the next warm start.
 */
class DistributedMpc {
public:
    explicit DistributedMpc(const Scenario& scenario);

    int num_quads() const { return static_cast<int>(quads_.size()); }
    QuadrotorOcp& quad(int i) { return *quads_.at(i); }
    const QuadrotorOcp& quad(int i) const { return *quads_.at(i); }
    LoadOcp& load() { return *load_; }
    const LoadOcp& load() const { return *load_; }
    const Scenario& scenario() const { return scenario_; }

    /// Horizon references starting at time t; tilt fixed over the horizon at beta.
    void set_references(double t, double beta);
    void set_quad_theta(int i, const Vec& theta) { quad(i).set_theta(theta); }
    void set_load_theta(const Vec& theta) { load().set_theta(theta); }

    /// Initial bundle from the current references.
    TrajectoryBundle reference_bundle() const;

    /// One round: quadrotors against the previous bundle (Jacobi), then the load against the fresh quadrotor plans.
    TrajectoryBundle solve_round(const TrajectoryBundle& previous, const std::vector<Vec13>& quad_states,
                                 const Vec13& load_state, int workers, TickResult* result = nullptr);

    /// Rounds until e < delta or k_max; warm bundle is the stored shifted bundle, or the references.
    TickResult run(const std::vector<Vec13>& quad_states, const Vec13& load_state, int workers);

    const std::vector<ReferenceSample>& references() const { return refs_; }
    const TrajectoryBundle& last_bundle() const { return last_; }
    void set_warm_bundle(const TrajectoryBundle& b) { warm_ = b; has_warm_ = true; }
    void clear_warm_bundle() { has_warm_ = false; }
    bool has_warm_bundle() const { return has_warm_; }
    const TrajectoryBundle& warm_bundle() const { return warm_; }

private:
    Scenario scenario_;
    std::vector<ReferenceSample> refs_;  ///< N+1 samples of the current horizon
    std::vector<std::unique_ptr<QuadrotorOcp>> quads_;
    std::unique_ptr<LoadOcp> load_;
    TrajectoryBundle last_;
    TrajectoryBundle warm_;
    bool has_warm_ = false;
};

/// Header and one row of the per-tick diagnostics CSV.
void write_mpc_csv_header(std::ostream& os, int num_quads);
void write_mpc_csv_row(std::ostream& os, double t, const TickResult& r);

}  // namespace multilift

#endif  // MULTILIFT_DIST_MPC_HPP
