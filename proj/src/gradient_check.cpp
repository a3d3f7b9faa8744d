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

#include "multilift/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "multilift/errors.hpp"

namespace multilift {

ShiftedModel::ShiftedModel(const StageModel& base, const GeneralizedTheta& theta, const Vec& shift)
    : base_(base), theta_(theta), shift_(shift), x0_(base.initial_state()) {
    if (shift.size() != theta.dim()) throw Error("shift dimension mismatch");
    if (theta.tag == ThetaTag::OwnFeedbackState) x0_ += shift;
}

Vec ShiftedModel::params(int k) const {
    Vec p = base_.params(k);
    const bool every_stage = theta_.tag == ThetaTag::OwnTheta;
    const bool first_stage = theta_.tag == ThetaTag::PeerState || theta_.tag == ThetaTag::PeerControl;
    if (every_stage || (first_stage && k == 0)) p.segment(theta_.segment.offset, theta_.segment.size) += shift_;
    return p;
}

std::optional<std::string> ShiftedModel::violated_constraint(int k, const Vec& x, const Vec* u) const {
    return base_.violated_constraint(k, x, u);
}

Mat fd_first_control_gradient(const StageModel& m, const OcpSolution& sol, const GeneralizedTheta& theta,
                              double step, const SolverOptions& opts) {
    const int nu = m.control_dim();
    Mat g(nu, theta.dim());
    for (int j = 0; j < theta.dim(); ++j) {
        Vec e = Vec::Zero(theta.dim());
        e(j) = step;
        ShiftedModel plus(m, theta, e);
        ShiftedModel minus(m, theta, -e);
        OcpSolution sp = solve_ocp(plus, &sol.U, opts);
        OcpSolution sm = solve_ocp(minus, &sol.U, opts);
        g.col(j) = (sp.U.front() - sm.U.front()) / (2.0 * step);
    }
    return g;
}

GradientComparison compare_gradients(const std::string& name, const Mat& analytic, const Mat& numeric,
                                     double abs_tol, double rel_tol) {
    if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols())
        throw Error("gradient shape mismatch for " + name);
    GradientComparison c{name, analytic, numeric};
    for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
        for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
            double err = std::abs(analytic(i, j) - numeric(i, j));
            double tol = std::max(abs_tol, rel_tol * std::abs(numeric(i, j)));
            c.max_abs_error = std::max(c.max_abs_error, err);
            double ratio = std::isfinite(err) ? err / tol : INFINITY;
            c.worst_ratio = std::max(c.worst_ratio, ratio);
        }
    }
    return c;
}

void write_comparison_csv_header(std::ostream& os) { os << "name,row,col,analytic,numeric,abs_error\n"; }

void write_comparison_csv(std::ostream& os, const GradientComparison& c) {
    for (Eigen::Index i = 0; i < c.analytic.rows(); ++i)
        for (Eigen::Index j = 0; j < c.analytic.cols(); ++j)
            os << c.name << ',' << i << ',' << j << ',' << c.analytic(i, j) << ',' << c.numeric(i, j) << ','
               << std::abs(c.analytic(i, j) - c.numeric(i, j)) << '\n';
}

}  // namespace multilift
