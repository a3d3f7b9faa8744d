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

#ifndef MULTILIFT_ILQR_HPP
#define MULTILIFT_ILQR_HPP

#include <string>
#include <vector>

#include "multilift/stage_model.hpp"

namespace multilift {

struct SolverOptions {
    double tolerance = 1e-6;  ///< stationarity residual max_k |l_u + f_u^T lambda_{k+1}|_inf
    int max_iterations = 100;
    double mu_init = 1e-6;
    double mu_min = 1e-9;
    double mu_max = 1e10;
    double mu_factor = 10.0;
    int max_line_search = 25;
    double armijo = 1e-4;
};

enum class SolveStatus { Converged, MaxIterations, LineSearchStalled };

std::string to_string(SolveStatus s);

struct SolverDiagnostics {
    SolveStatus status = SolveStatus::MaxIterations;
    int iterations = 0;
    double initial_cost = 0.0;
    double final_cost = 0.0;
    double max_pmp_residual = 0.0;
    int line_search_failures = 0;
    bool warm_started = false;
};

/**
 * @brief Trajectories of one solve. Lambda[k] holds lambda_{k+1}, k = 0..N-1,
 * so Lambda.back() is the terminal costate.
 */
struct OcpSolution {
    std::vector<Vec> X;
    std::vector<Vec> U;
    std::vector<Vec> Lambda;
    SolverDiagnostics diagnostics;
};

struct PmpResidual {
    double dynamics = 0.0;
    double costate = 0.0;
    double stationarity = 0.0;
    double boundary = 0.0;

    double max() const;
};

/// Rolls out U from the problem's initial state.
std::vector<Vec> rollout(const StageModel& m, const std::vector<Vec>& U);

/// Total cost; throws InfeasiblePoint outside the barrier interior.
double total_cost(const StageModel& m, const std::vector<Vec>& X, const std::vector<Vec>& U);

/// Exact backward costate sweep lambda_N = dc_N/dx, lambda_k = dH_k/dx_k; returns lambda_1..lambda_N.
std::vector<Vec> costates(const StageModel& m, const std::vector<Vec>& X, const std::vector<Vec>& U);

/**
 * @brief iLQR on the barrier-softened problem.
 *
 * warm_start (controls only) is used when its rollout is interior; otherwise
 * the problem's initial_controls(). Throws InfeasibleStart when neither is
 * interior and NumericalFailure on non-finite derivatives.
 */
OcpSolution solve_ocp(const StageModel& m, const std::vector<Vec>* warm_start = nullptr,
                      const SolverOptions& opt = {});

PmpResidual pmp_residual(const StageModel& m, const OcpSolution& sol);

/**
 * @brief Linear dynamics and quadratic cost, x+ = A x + B u, c = x'Qx/2 + u'Ru/2.
 *
 * theta = [diag Q | diag R | diag QN]; used as a Riccati-checkable stub.
 */
class LqrStub : public StageModelImpl<LqrStub> {
public:
    LqrStub(Mat a, Mat b, Vec q, Vec r, Vec qn, Vec x0, int horizon);

    int state_dim() const override { return static_cast<int>(a_.rows()); }
    int control_dim() const override { return static_cast<int>(b_.cols()); }
    int param_dim() const override { return static_cast<int>(theta_.size()); }
    int theta_dim() const override { return param_dim(); }
    int horizon() const override { return horizon_; }
    double dt() const override { return 1.0; }
    const Vec& initial_state() const override { return x0_; }
    Vec params(int) const override { return theta_; }
    std::optional<std::string> violated_constraint(int, const Vec& x, const Vec*) const override;
    std::vector<Vec> initial_controls() const override;

    void set_initial_state(const Vec& x0) { x0_ = x0; }
    void set_theta(const Vec& theta) { theta_ = theta; }
    const Mat& a() const { return a_; }
    const Mat& b() const { return b_; }

    template <typename S>
    VecXT<S> dyn(int k, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const;
    template <typename S>
    S cost(int k, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const;
    template <typename S>
    S terminal(const VecXT<S>& x, const VecXT<S>& p) const;

private:
    Mat a_, b_;
    Vec theta_, x0_;
    int horizon_;
};

/// Finite-horizon discrete Riccati recursion; returns value Hessians P_0..P_N and gains K_0..K_{N-1} (u = -K x).
void riccati(const Mat& a, const Mat& b, const Mat& q, const Mat& r, const Mat& qn, int horizon,
             std::vector<Mat>& p, std::vector<Mat>& k);

}  // namespace multilift

#endif  // MULTILIFT_ILQR_HPP
