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

#ifndef MULTILIFT_GRAD_MPC_HPP
#define MULTILIFT_GRAD_MPC_HPP

#include <string>
#include <vector>

#include "multilift/ilqr.hpp"
#include "multilift/stage_model.hpp"

namespace multilift {

class DistributedMpc;
struct TickResult;

/// What the first control is differentiated against.
enum class ThetaTag {
    OwnTheta,          ///< the agent's hyperparameters theta
    OwnFeedbackState,  ///< x_t, the agent's own initial state
    PeerState,         ///< first entry of an external state trajectory
    PeerControl,       ///< first entry of the load's tension trajectory (quadrotor problems)
};

std::string to_string(ThetaTag t);

/**
 * @brief Generalized hyperparameter: a tag plus the slice of p_0 (or of theta) it occupies.
 *
 * For OwnTheta the segment is the theta slice of every p_k; for peer tags it is
 * the slice of p_0 only, later stages hold the external trajectory fixed.
 */
struct GeneralizedTheta {
    ThetaTag tag = ThetaTag::OwnTheta;
    ParamSegment segment;
    int dim() const { return segment.size; }

    static GeneralizedTheta own_theta(const StageModel& m);
    static GeneralizedTheta own_state(const StageModel& m);
    static GeneralizedTheta peer_state(ParamSegment seg) { return {ThetaTag::PeerState, seg}; }
    static GeneralizedTheta peer_control(ParamSegment seg) { return {ThetaTag::PeerControl, seg}; }
};

/// Coefficients of the differential PMP system of one OCP solution.
struct PmpDerivatives {
    std::vector<Mat> F, G;                 ///< k = 0..N-1
    std::vector<Mat> Hxx, Hxu, Hux, Huu;   ///< k = 0..N-1
    Mat HNxx;

    GeneralizedTheta theta;
    Mat dx0;                         ///< d x*_0 / d theta_bar
    std::vector<Mat> E, Hxth, Huth;  ///< k = 0..N-1
    Mat HNxth;
};

/// Hessian blocks of H_k at the solution and the coupling blocks of `theta`; Huu must be SPD (NotStrictlyConvex).
PmpDerivatives build_pmp_derivatives(const StageModel& m, const OcpSolution& sol, const GeneralizedTheta& theta);

/// Replaces only the theta-dependent blocks; the Hessians are reused.
void set_theta_coupling(PmpDerivatives& d, const StageModel& m, const OcpSolution& sol,
                        const GeneralizedTheta& theta);

struct PwResult {
    Mat P1, W1;
    std::vector<Mat> P;  ///< P_1..P_N
};

/// Backward recursion from P_N = H_N^xx, W_N = H_N^xtheta down to k = 1.
PwResult backward_pw(const PmpDerivatives& d);

/// Gradient of u*_0 with respect to theta_bar (control dim x theta_bar dim).
Mat first_control_gradient(const PmpDerivatives& d, const PwResult& pw);

/// build + backward_pw + first_control_gradient.
Mat mpc_gradient(const StageModel& m, const OcpSolution& sol, const GeneralizedTheta& theta);

struct QuadGradients {
    Mat du_dtheta;  ///< 4 x theta dim
    Mat du_dx;      ///< 4 x 13, own feedback state
    Mat du_dxl;     ///< 4 x 13, load state
    Mat du_dul;     ///< 4 x n, load first control
};

struct LoadGradients {
    Mat du_dtheta;              ///< n x theta dim
    Mat du_dx;                  ///< n x 13
    std::vector<Mat> du_dxi;    ///< n x 13 per quadrotor
};

struct MpcGradients {
    std::vector<QuadGradients> quads;
    LoadGradients load;
};

/// All first-control gradients of the last tick of `mpc`; quadrotors run concurrently.
MpcGradients all_mpc_gradients(const DistributedMpc& mpc, const TickResult& tick, int workers);

}  // namespace multilift

#endif  // MULTILIFT_GRAD_MPC_HPP
