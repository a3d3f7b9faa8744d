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

#ifndef MULTILIFT_DSP_HPP
#define MULTILIFT_DSP_HPP

#include <ostream>
#include <string>
#include <vector>

#include "multilift/grad_mpc.hpp"

namespace multilift {

class DistributedMpc;

/**
 * @brief Which closed-loop couplings the propagation keeps.
 *
 * Pairwise keeps only the quadrotor/load pairs: the sensitivity of quadrotor j
 * to theta^i (j != i) is not propagated and the load's control reacts only to the
 * state of the quadrotor being updated. Full tracks every (state, theta) pair.
 */
enum class CouplingMode { Pairwise, Full };

std::string to_string(CouplingMode m);
CouplingMode coupling_mode_from_string(const std::string& s);

/// Linear closed-loop maps of one tick.
struct SensitivityStep {
    int t = 0;
    // per quadrotor i
    std::vector<Mat> Fi;   ///< 13 x 13, d x^i_{t+1} / d x^i_t through the loop
    std::vector<Mat> Fil;  ///< 13 x 13, d x^i_{t+1} / d x^l_t
    std::vector<Mat> Gi;   ///< 13 x 4, d f^i / d u^i
    std::vector<Mat> Gil;  ///< 13 x n, d x^i_{t+1} / d u^l_0 through the loop
    std::vector<Mat> Ui;   ///< 4 x m_i, d u^i_0 / d theta^i (empty when quadrotor i does not learn)
    // load
    Mat Fl;                 ///< 13 x 13
    std::vector<Mat> Fli;   ///< 13 x 13 per quadrotor
    Mat Gl;                 ///< 13 x n
    Mat Ul;                 ///< n x m_l (empty when the load does not learn)
    std::vector<Mat> dul_dxi;  ///< n x 13, d u^l_0 / d x^i (cross terms of the Full mode)
};

/**
 * @brief Assembles the maps of tick t from dynamics Jacobians of the control models and MPC gradients.
 *
 * The Jacobians are evaluated at the given closed-loop states and applied first
 * controls using the agent models stored in `mpc`. learn_quads / learn_load
 * select which U blocks are filled.
 */
SensitivityStep assemble_step(int t, const DistributedMpc& mpc, const std::vector<Vec13>& quad_x, const Vec13& load_x,
                              const std::vector<Vec4>& quad_u, const Vec& load_u, const MpcGradients& g,
                              bool learn_quads, bool learn_load);

/// Sensitivities of every state with respect to the hyperparameters of one owner.
struct OwnerSensitivity {
    std::vector<Mat> quads;  ///< d x^k / d theta^owner, k = 0..n-1
    Mat load;                ///< d x^l / d theta^owner
};

/**
 * @brief Stacked sensitivity state.
 *
 * Pairwise mode uses quad_owners[i].quads[i] (X_i^i), quad_owners[i].load (X_i^l),
 * load_owner.quads[i] (X_l^i) and load_owner.load (X_l^l); the other blocks stay zero.
 */
struct SensitivityState {
    std::vector<OwnerSensitivity> quad_owners;
    OwnerSensitivity load_owner;
};

/// Zero state; an owner with dimension 0 is not propagated.
SensitivityState zero_sensitivity(int num_quads, const std::vector<int>& quad_theta_dims, int load_theta_dim);

/// One synchronous step: every update reads time-t blocks and writes time-t+1 blocks.
SensitivityState propagate_step(const SensitivityState& x, const SensitivityStep& s, CouplingMode mode, int workers);

/// X_T = 0 and one state per step; returns steps.size() + 1 states.
std::vector<SensitivityState> propagate(const std::vector<SensitivityStep>& steps, int num_quads,
                                        const std::vector<int>& quad_theta_dims, int load_theta_dim,
                                        CouplingMode mode, int workers);

/// Debug CSV "t,block_label,frobenius_norm".
void write_sensitivity_norms_header(std::ostream& os);
void write_sensitivity_norms(std::ostream& os, double t, const SensitivityState& x);

}  // namespace multilift

#endif  // MULTILIFT_DSP_HPP
