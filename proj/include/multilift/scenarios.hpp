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

#ifndef MULTILIFT_SCENARIOS_HPP
#define MULTILIFT_SCENARIOS_HPP

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "multilift/agents.hpp"
#include "multilift/ilqr.hpp"
#include "multilift/world.hpp"

namespace multilift {

/// Even split of the load's required force: m ||g e3 + a|| / (n cos(beta)).
double static_tension(double load_mass, const Vec3& accel, double beta, int n, double g = 9.81);

enum class PathKind { Hover, Circle, Figure8 };

std::string to_string(PathKind k);
PathKind path_kind_from_string(const std::string& s);

/**
 * @brief Planar load path at constant height with a quintic ramp on the phase rate.
 *
 * Circle: c + A (cos phi, sin phi, 0). Figure-8: c + (A sin phi, A/2 sin 2 phi, 0).
 * phi_dot ramps from 0 to `rate` over `ramp_time` with a C2 quintic profile.
 */
struct PathSpec {
    PathKind kind = PathKind::Hover;
    Vec3 center = Vec3(0.0, 0.0, 1.0);
    double amplitude = 1.0;
    double rate = 0.5;  ///< rad/s after the ramp
    double ramp_time = 2.0;
};

struct PathSample {
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 a = Vec3::Zero();
};

/// Phase, phase rate and phase acceleration at time t.
Vec3 path_phase(const PathSpec& spec, double t);
PathSample sample_path(const PathSpec& spec, double t);

struct SlotSpec {
    Vec3 position = Vec3(0.0, 1.0, 1.0);  ///< centre of the opening
    double lower_z = 0.0;                 ///< height of the lower boundary
    double height = 1.6;                  ///< opening height
    double margin = 0.1;
    double beta_min = 0.0;
    double eta_cf = 1.0;
    double pass_radius = 0.6;  ///< horizontal distance from the slot counted as the passing stage

    double beta_max(double natural_length) const;
};

/// beta_min + (beta_max - beta_min) exp(-eta_cf ||p - p_s||^4).
double tilt_schedule(const Vec3& load_p, const SlotSpec& slot, double natural_length);

struct AgentReference {
    Vec13 x = Vec13::Zero();
    Vec u;
};

struct ReferenceSample {
    AgentReference load;
    std::vector<AgentReference> quads;
};

/// Unit cable direction of attachment i at tilt beta: (sin(beta) c_i, cos(beta)), c_i the radial direction.
Vec3 cable_direction(const Vec3& attachment, double beta);

/// Multilift geometry and the feasibility margin of references.
struct MultiliftParams {
    int num_quads = 3;
    QuadParams quad;
    LoadParams load;
    CableParams cable;
    double attach_radius = 0.5;
    double g = 9.81;
    double motor_tau = 0.033;
    double mass_scale = 1.0;  ///< multiplies the load mass of the simulated world only

    /// Load params with the n-gon attachments filled in.
    LoadParams load_params() const;
    WorldParams world_params() const;
};

/**
 * @brief Agent references for a load state reference and tilt angles.
 *
 * The load keeps identity attitude; quadrotors sit at p_l + r_i + l0 d_i and
 * their thrust balances m_q (a + g e3) + T d_i. tension_beta sets T.
 */
ReferenceSample make_reference(const MultiliftParams& mp, const PathSample& load_path, double config_beta,
                               double tension_beta);

struct HoverEquilibrium {
    WorldState state;
    std::vector<Vec4> controls;
    double tension = 0.0;
};

/// Static equilibrium of the actual (elastic) world with symmetric tensions; requires zero CoM bias for exactness.
HoverEquilibrium hover_equilibrium(const MultiliftParams& mp, const Vec3& load_position, double beta);

/// Weights of one agent's cost and the box the learned weights live in.
struct WeightDefaults {
    CostWeights quad;
    CostWeights load;
};

enum class Experiment { Weights, TensionRef };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

enum class LossKind { Tracking, Obstacle, Slot };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct TrainingSettings {
    double episode_time = 4.0;  ///< T_ep, s
    double physics_dt = 0.005;
    int window = 20;  ///< N_cl
    LossKind loss = LossKind::Tracking;
    Vec12 loss_weights = Vec12::Ones();  ///< W on the 12-dim error state
    double alpha = 1.0;
    double eta = 1.0;
    double eta_s = 1.0;
    double learning_rate = 1e-3;
    double theta_min = 0.01;
    double theta_max = 100.0;
    double delta_t_min = -10.0;
    double delta_t_max = 10.0;
    int hidden = 30;
    int max_episodes = 8;
    int power_iterations = 1;
    bool tension_ref_enabled = true;
    /// Output bias set so the initial nets reproduce the scenario weights; otherwise plain random init.
    bool init_from_defaults = false;
};

struct DistributedSettings {
    double delta = 1e-2;
    int k_max = 5;
    int central_agent = 0;
};

/// Complete experiment definition; round-trips through JSON.
struct Scenario {
    std::string name = "hover";
    std::string role = "train";  ///< train | eval
    Experiment experiment = Experiment::Weights;
    MultiliftParams system;
    PathSpec path;
    double beta = 0.3;  ///< configuration tilt angle, rad
    std::optional<SlotSpec> slot;
    std::optional<Obstacle> obstacle;
    HorizonSettings horizon;
    SolverOptions solver;
    DistributedSettings distributed;
    TrainingSettings training;
    WeightDefaults weights;
    std::uint64_t seed = 1;

    void validate() const;
    /// Tilt at load position p (slot schedule if a slot is present, else beta).
    double tilt_at(const Vec3& p) const;
    /// Tension reference tilt (the static configuration).
    double tension_beta() const;
};

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

/// Applies "a.b.c=value" overrides to a JSON document (value parsed as JSON, else taken as a string).
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Built-in fixtures.
Scenario hover_fixture(int num_quads);
Scenario circle_scenario(int num_quads, bool biased_com);
Scenario figure8_scenario(int num_quads);
Scenario slot_scenario(int num_quads);
/// Full-size weight-learning bundle: 6 quadrotors, 10 kg load, biased CoM.
Scenario weight_learning_scenario();

/// Checks the cable-consistency and thrust-feasibility invariants of references over [0, duration].
void check_references(const Scenario& s, double duration);

}  // namespace multilift

#endif  // MULTILIFT_SCENARIOS_HPP
