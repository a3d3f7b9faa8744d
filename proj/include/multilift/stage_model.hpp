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

#ifndef MULTILIFT_STAGE_MODEL_HPP
#define MULTILIFT_STAGE_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "multilift/dual.hpp"
#include "multilift/geometry.hpp"

namespace multilift {

/// Contiguous slice of the per-stage parameter vector p_k.
struct ParamSegment {
    int offset = 0;
    int size = 0;
};

/**
 * @brief Discrete-time optimal control problem with per-stage parameters.
 *
 * Stage k maps (x_k, u_k, p_k) to x_{k+1} and a running cost; the terminal
 * cost depends on (x_N, p_N). Parameters carry the learnable hyperparameters
 * in p[0, theta_dim()) followed by external trajectories. Every function is
 * evaluated for double and for first/second order dual numbers.
 */
class StageModel {
public:
    virtual ~StageModel() = default;

    virtual int state_dim() const = 0;
    virtual int control_dim() const = 0;
    virtual int param_dim() const = 0;
    virtual int theta_dim() const = 0;
    virtual int horizon() const = 0;
    virtual double dt() const = 0;
    virtual const Vec& initial_state() const = 0;

    /// Nominal parameter vector of stage k, k = 0..N.
    virtual Vec params(int k) const = 0;

    virtual VecXT<double> dynamics(int k, const VecXT<double>& x, const VecXT<double>& u,
                                   const VecXT<double>& p) const = 0;
    virtual VecXT<ad::D1> dynamics(int k, const VecXT<ad::D1>& x, const VecXT<ad::D1>& u,
                                   const VecXT<ad::D1>& p) const = 0;
    virtual VecXT<ad::D2> dynamics(int k, const VecXT<ad::D2>& x, const VecXT<ad::D2>& u,
                                   const VecXT<ad::D2>& p) const = 0;

    virtual double running_cost(int k, const VecXT<double>& x, const VecXT<double>& u,
                                const VecXT<double>& p) const = 0;
    virtual ad::D1 running_cost(int k, const VecXT<ad::D1>& x, const VecXT<ad::D1>& u,
                                const VecXT<ad::D1>& p) const = 0;
    virtual ad::D2 running_cost(int k, const VecXT<ad::D2>& x, const VecXT<ad::D2>& u,
                                const VecXT<ad::D2>& p) const = 0;

    virtual double terminal_cost(const VecXT<double>& x, const VecXT<double>& p) const = 0;
    virtual ad::D1 terminal_cost(const VecXT<ad::D1>& x, const VecXT<ad::D1>& p) const = 0;
    virtual ad::D2 terminal_cost(const VecXT<ad::D2>& x, const VecXT<ad::D2>& p) const = 0;

    /// Name of the first constraint whose barrier argument is >= 0, if any. u == nullptr at k = N.
    virtual std::optional<std::string> violated_constraint(int k, const Vec& x, const Vec* u) const = 0;

    /// Controls used when no warm start is available; must be interior.
    virtual std::vector<Vec> initial_controls() const = 0;

    /// Index groups of [x; u] between which the running and terminal costs have no cross terms.
    virtual std::vector<std::vector<int>> cost_blocks() const;

    /// Whether the hyperparameters enter the dynamics (they enter the cost always).
    virtual bool theta_in_dynamics() const { return false; }

    /// Throwing evaluation of the running cost (InfeasiblePoint outside the barrier interior).
    double checked_running_cost(int k, const Vec& x, const Vec& u) const;
    double checked_terminal_cost(const Vec& x) const;
};

/// Forwards the scalar-typed virtuals to Derived::template dyn<S>, cost<S>, terminal<S>.
template <typename Derived>
class StageModelImpl : public StageModel {
public:
    VecXT<double> dynamics(int k, const VecXT<double>& x, const VecXT<double>& u,
                           const VecXT<double>& p) const override {
        return self().template dyn<double>(k, x, u, p);
    }
    VecXT<ad::D1> dynamics(int k, const VecXT<ad::D1>& x, const VecXT<ad::D1>& u,
                           const VecXT<ad::D1>& p) const override {
        return self().template dyn<ad::D1>(k, x, u, p);
    }
    VecXT<ad::D2> dynamics(int k, const VecXT<ad::D2>& x, const VecXT<ad::D2>& u,
                           const VecXT<ad::D2>& p) const override {
        return self().template dyn<ad::D2>(k, x, u, p);
    }
    double running_cost(int k, const VecXT<double>& x, const VecXT<double>& u,
                        const VecXT<double>& p) const override {
        return self().template cost<double>(k, x, u, p);
    }
    ad::D1 running_cost(int k, const VecXT<ad::D1>& x, const VecXT<ad::D1>& u,
                        const VecXT<ad::D1>& p) const override {
        return self().template cost<ad::D1>(k, x, u, p);
    }
    ad::D2 running_cost(int k, const VecXT<ad::D2>& x, const VecXT<ad::D2>& u,
                        const VecXT<ad::D2>& p) const override {
        return self().template cost<ad::D2>(k, x, u, p);
    }
    double terminal_cost(const VecXT<double>& x, const VecXT<double>& p) const override {
        return self().template terminal<double>(x, p);
    }
    ad::D1 terminal_cost(const VecXT<ad::D1>& x, const VecXT<ad::D1>& p) const override {
        return self().template terminal<ad::D1>(x, p);
    }
    ad::D2 terminal_cost(const VecXT<ad::D2>& x, const VecXT<ad::D2>& p) const override {
        return self().template terminal<ad::D2>(x, p);
    }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

/// First and second derivatives of one stage at (x, u, p).
struct StageDerivatives {
    Mat fx, fu;
    Vec lx, lu;
    Mat lxx, luu, lux;
    double cost = 0.0;
};

struct TerminalDerivatives {
    Vec lx;
    Mat lxx;
    double cost = 0.0;
};

/// Dynamics Jacobians and cost gradient/Hessian (Hessian restricted to cost_blocks()).
StageDerivatives stage_derivatives(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p);
TerminalDerivatives terminal_derivatives(const StageModel& m, const Vec& x, const Vec& p);

/// Dynamics Jacobians only.
void dynamics_jacobians(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p, Mat& fx,
                        Mat& fu);

/// Gradient of c_k with respect to x and u.
void cost_gradient(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p, Vec& lx, Vec& lu);

/// Full Hessian over [x; u] of H_k = c_k + lambda^T f_k.
Mat hamiltonian_hessian(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p,
                        const Vec& lambda);

/// Terminal cost Hessian over x (full, no block assumption).
Mat terminal_hessian(const StageModel& m, const Vec& x, const Vec& p);

/// d^2 H_k / d[x;u] d p[seg]; cost_only skips the lambda^T f term.
Mat hamiltonian_mixed(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p,
                      const Vec& lambda, ParamSegment seg, bool cost_only);

/// d^2 c_N / dx d p[seg].
Mat terminal_mixed(const StageModel& m, const Vec& x, const Vec& p, ParamSegment seg);

/// d f_k / d p[seg].
Mat dynamics_param_jacobian(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p,
                            ParamSegment seg);

}  // namespace multilift

#endif  // MULTILIFT_STAGE_MODEL_HPP
