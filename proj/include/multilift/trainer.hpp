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

#ifndef MULTILIFT_TRAINER_HPP
#define MULTILIFT_TRAINER_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "multilift/dist_mpc.hpp"
#include "multilift/dsp.hpp"
#include "multilift/losses.hpp"
#include "multilift/policy.hpp"

namespace multilift {

/// Closed-loop states of one control tick and the loss terms evaluated on them.
struct WindowSample {
    std::vector<Vec13> quad_x;
    Vec13 load_x = Vec13::Zero();
    std::vector<LossTerm> quad_loss;
    LossTerm load_loss;
};

/// Loss terms of the scenario's loss kind on one set of closed-loop states.
WindowSample evaluate_losses(const Scenario& s, const std::vector<Vec13>& quad_x, const Vec13& load_x,
                             const ReferenceSample& ref);

/// Per-agent loss of the samples, quadrotors first, then the load.
std::vector<double> window_losses(const std::vector<WindowSample>& window);

/**
 * @brief dL/dtheta of every learning agent from the sensitivities of a window.
 *
 * sens[k] pairs with window[k]. Quadrotor i sums its own and the load's loss
 * gradients through X_i^i and X_i^l (plus X_i^j in the Full mode); the load sums
 * every quadrotor's through X_l^i and its own through X_l^l. Owners with an empty
 * block get an empty vector.
 */
struct ThetaGradients {
    std::vector<Vec> quads;
    Vec load;
};
ThetaGradients window_theta_gradients(const std::vector<WindowSample>& window,
                                      const std::vector<SensitivityState>& sens, CouplingMode mode);

/// |L_k - L_{k-1}| <= L_0 / 1000; needs at least two episodes.
bool stopping_criterion(const std::vector<double>& history);

/// RMSE of the load position (x, y, z) and of roll, pitch, yaw (ZYX) against the reference.
struct TrackingRmse {
    Vec3 position = Vec3::Zero();
    Vec3 euler = Vec3::Zero();
    int samples = 0;
};

class RmseAccumulator {
public:
    void add(const Vec13& x, const Vec13& ref);
    TrackingRmse result() const;

private:
    Vec3 sq_p_ = Vec3::Zero();
    Vec3 sq_e_ = Vec3::Zero();
    int n_ = 0;
};

struct TickLog {
    int tick = 0;
    double time = 0.0;
    std::vector<double> agent_loss;  ///< window loss per agent (zero before the window fills)
    double l_mean_running = 0.0;
    int rounds = 0;
    double tension_gap_max = 0.0;
    bool updated = false;
};

struct EpisodeResult {
    int episode = 0;
    double l_mean = 0.0;
    int ticks = 0;
    int updates = 0;
    int skipped_updates = 0;
    bool aborted = false;
    std::string fault;
    double tension_gap_max = 0.0;
    std::optional<double> min_clearance;  ///< slot scenarios: min z^l - z^s while passing
    double max_spectral_norm = 0.0;       ///< largest layer norm after any update (when tracked)
    TrackingRmse rmse;
    std::vector<TickLog> log;
};

/// Optional per-episode outputs.
struct EpisodeSinks {
    std::ostream* ticks = nullptr;     ///< episode CSV rows
    std::ostream* states = nullptr;    ///< state CSV
    std::ostream* tensions = nullptr;  ///< tension CSV
    std::ostream* mpc = nullptr;       ///< distributed MPC diagnostics CSV
};

void write_episode_csv_header(std::ostream& os, int num_quads);
void write_episode_csv_row(std::ostream& os, int episode, const TickLog& log);
void write_state_csv_header(std::ostream& os, int num_quads);
void write_tension_csv_header(std::ostream& os, int num_quads);

struct TrainerOptions {
    int workers = 1;
    CouplingMode coupling = CouplingMode::Pairwise;
    bool fixed_weights = false;  ///< no nets: the MPC keeps the scenario weights
    bool track_spectral_norms = false;  ///< SVD of every layer after each update
};

/**
 * @brief Closed-loop distributed policy-gradient training on the simulated world.
 *
 * Weight learning trains one net per quadrotor (28 outputs) and one for the load
 * (24 + n). Tension-reference learning trains only the load net, whose single
 * output is the tension offset; the quadrotors keep the scenario weights.
 * Each episode starts from the hover equilibrium at the path's start.
 */
class Trainer {
public:
    Trainer(Scenario scenario, std::uint64_t seed, TrainerOptions options = {});

    const Scenario& scenario() const { return scenario_; }
    bool learns_quads() const { return !quad_policies_.empty(); }
    bool learns_load() const { return load_policy_.has_value(); }
    std::vector<AgentPolicy>& quad_policies() { return quad_policies_; }
    const std::vector<AgentPolicy>& quad_policies() const { return quad_policies_; }
    std::optional<AgentPolicy>& load_policy() { return load_policy_; }
    const std::optional<AgentPolicy>& load_policy() const { return load_policy_; }

    /// One episode; `learn` = false freezes the policies.
    EpisodeResult run_episode(int episode, bool learn, const EpisodeSinks& sinks = {});

    nlohmann::json checkpoint(int episode) const;
    /// Restores policies from a checkpoint; returns the stored episode index.
    int restore(const nlohmann::json& j);

    Vec quad_observation(const Vec13& x, const Vec13& ref) const;
    Vec load_observation(const Vec13& x, const Vec13& ref, const std::vector<double>& tension_magnitudes) const;
    Vec tension_observation(const Vec13& x, const Vec13& ref, double beta) const;

private:
    Scenario scenario_;
    std::uint64_t seed_;
    TrainerOptions options_;
    DistributedMpc mpc_;
    std::vector<AgentPolicy> quad_policies_;
    std::optional<AgentPolicy> load_policy_;
};

}  // namespace multilift

#endif  // MULTILIFT_TRAINER_HPP
