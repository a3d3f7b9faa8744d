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

#ifndef MULTILIFT_GRADIENT_CHECK_HPP
#define MULTILIFT_GRADIENT_CHECK_HPP

#include <ostream>
#include <string>
#include <vector>

#include "multilift/grad_mpc.hpp"
#include "multilift/ilqr.hpp"

namespace multilift {

/**
 * @brief View of a problem with a shifted initial state or parameter slice.
 *
 * OwnTheta shifts the slice in every p_k, the peer tags only in p_0 and
 * OwnFeedbackState shifts x_0.
 */
class ShiftedModel : public StageModel {
public:
    ShiftedModel(const StageModel& base, const GeneralizedTheta& theta, const Vec& shift);

    int state_dim() const override { return base_.state_dim(); }
    int control_dim() const override { return base_.control_dim(); }
    int param_dim() const override { return base_.param_dim(); }
    int theta_dim() const override { return base_.theta_dim(); }
    int horizon() const override { return base_.horizon(); }
    double dt() const override { return base_.dt(); }
    const Vec& initial_state() const override { return x0_; }
    Vec params(int k) const override;

    VecXT<double> dynamics(int k, const VecXT<double>& x, const VecXT<double>& u,
                           const VecXT<double>& p) const override {
        return base_.dynamics(k, x, u, p);
    }
    VecXT<ad::D1> dynamics(int k, const VecXT<ad::D1>& x, const VecXT<ad::D1>& u,
                           const VecXT<ad::D1>& p) const override {
        return base_.dynamics(k, x, u, p);
    }
    VecXT<ad::D2> dynamics(int k, const VecXT<ad::D2>& x, const VecXT<ad::D2>& u,
                           const VecXT<ad::D2>& p) const override {
        return base_.dynamics(k, x, u, p);
    }
    double running_cost(int k, const VecXT<double>& x, const VecXT<double>& u,
                        const VecXT<double>& p) const override {
        return base_.running_cost(k, x, u, p);
    }
    ad::D1 running_cost(int k, const VecXT<ad::D1>& x, const VecXT<ad::D1>& u,
                        const VecXT<ad::D1>& p) const override {
        return base_.running_cost(k, x, u, p);
    }
    ad::D2 running_cost(int k, const VecXT<ad::D2>& x, const VecXT<ad::D2>& u,
                        const VecXT<ad::D2>& p) const override {
        return base_.running_cost(k, x, u, p);
    }
    double terminal_cost(const VecXT<double>& x, const VecXT<double>& p) const override {
        return base_.terminal_cost(x, p);
    }
    ad::D1 terminal_cost(const VecXT<ad::D1>& x, const VecXT<ad::D1>& p) const override {
        return base_.terminal_cost(x, p);
    }
    ad::D2 terminal_cost(const VecXT<ad::D2>& x, const VecXT<ad::D2>& p) const override {
        return base_.terminal_cost(x, p);
    }
    std::optional<std::string> violated_constraint(int k, const Vec& x, const Vec* u) const override;
    std::vector<Vec> initial_controls() const override { return base_.initial_controls(); }
    std::vector<std::vector<int>> cost_blocks() const override { return base_.cost_blocks(); }
    bool theta_in_dynamics() const override { return base_.theta_in_dynamics(); }

private:
    const StageModel& base_;
    GeneralizedTheta theta_;
    Vec shift_;
    Vec x0_;
};

/// Central differences of u*_0 over every component of theta_bar, warm-started at `sol`.
Mat fd_first_control_gradient(const StageModel& m, const OcpSolution& sol, const GeneralizedTheta& theta,
                              double step, const SolverOptions& opts);

/// Componentwise comparison |a - f| <= max(abs_tol, rel_tol |f|).
struct GradientComparison {
    std::string name;
    Mat analytic;
    Mat numeric;
    double max_abs_error = 0.0;
    double worst_ratio = 0.0;  ///< max |a - f| / max(abs_tol, rel_tol |f|); <= 1 passes
    bool pass() const { return worst_ratio <= 1.0; }
};

GradientComparison compare_gradients(const std::string& name, const Mat& analytic, const Mat& numeric,
                                     double abs_tol, double rel_tol);

/// Long-format CSV: name,row,col,analytic,numeric,abs_error.
void write_comparison_csv_header(std::ostream& os);
void write_comparison_csv(std::ostream& os, const GradientComparison& c);

}  // namespace multilift

#endif  // MULTILIFT_GRADIENT_CHECK_HPP
