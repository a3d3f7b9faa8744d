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

#ifndef MULTILIFT_CHECKS_HPP
#define MULTILIFT_CHECKS_HPP

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "multilift/dist_mpc.hpp"
#include "multilift/dsp.hpp"
#include "multilift/gradient_check.hpp"

namespace multilift {

/// Analytic-versus-numeric comparisons of one check.
struct CheckReport {
    std::string name;
    std::vector<GradientComparison> items;
    double seconds = 0.0;

    bool pass() const;
    double worst_ratio() const;
};

void write_report_csv(std::ostream& os, const CheckReport& r);

/**
 * @brief Closed-loop state of a team after some ticks on the scenario's path.
 *
 * The default is the 2-quadrotor biased circle with N = 5 and a tight solver
 * tolerance so that finite differences resolve the solution map.
 */
struct GradientFixture {
    Scenario scenario;
    std::unique_ptr<DistributedMpc> mpc;
    TickResult tick;  ///< solve at `time`
    std::vector<Vec13> quad_x;
    Vec13 load_x = Vec13::Zero();
    double time = 0.0;
};

Scenario gradient_fixture_scenario();
GradientFixture make_gradient_fixture(const Scenario& s, int warmup_ticks);

/// Every generalized-hyperparameter tag of every agent against central differences of u*_0.
CheckReport check_mpc_gradients(GradientFixture& f, double step = 1e-4, double abs_tol = 1e-3, double rel_tol = 1e-2);

/// dL/dtheta of each agent from the propagated sensitivities against finite differences of the window loss.
CheckReport check_dsp_theta(GradientFixture& f, int n_cl, CouplingMode mode, double step = 1e-4,
                            double abs_tol = 1e-2, double rel_tol = 2e-2);

/**
 * @brief dL/dvarpi through the policy nets against end-to-end finite differences.
 *
 * Each agent's net maps a fixed observation to theta, held over the window.
 * Directional derivatives are compared along the analytic gradient and
 * `directions` - 1 random unit vectors per agent; errors are measured against
 * max(rel_tol |f|, rel_tol max|f|).
 */
CheckReport check_dsp_policy(GradientFixture& f, int n_cl, CouplingMode mode, std::uint64_t seed, int directions,
                             double step = 1e-5, double rel_tol = 2e-2);

/// Backprop Jacobian of random nets against central differences.
CheckReport check_policy_backprop(std::uint64_t seed, double rel_tol = 1e-5);

/// State gradients of the tracking, obstacle and slot terms at random states.
CheckReport check_loss_gradients(std::uint64_t seed, double tol = 1e-8);

}  // namespace multilift

#endif  // MULTILIFT_CHECKS_HPP
