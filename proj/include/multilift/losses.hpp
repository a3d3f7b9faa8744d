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

#ifndef MULTILIFT_LOSSES_HPP
#define MULTILIFT_LOSSES_HPP

#include "multilift/geometry.hpp"
#include "multilift/scenarios.hpp"

namespace multilift {

/// One term of an agent loss and its gradient with respect to the 13-dim state.
struct LossTerm {
    double value = 0.0;
    Vec13 grad = Vec13::Zero();
};

/// sum_j W_j e_j^2 with e = tracking_error(x, ref).
LossTerm tracking_term(const Vec13& x, const Vec13& ref, const Vec12& w);

/// alpha exp(-eta ||p - p_obs||); the gradient is zero when ||p - p_obs|| < 1e-9.
LossTerm obstacle_term(const Vec13& x, const Vec3& p_obs, double alpha, double eta);

/// alpha [(1 - a_s)(z - z_ref) + a_s exp(-eta (z - z_s))], a_s = exp(-eta_s ||p - p_s||^4).
LossTerm slot_term(const Vec13& x, double z_ref, const SlotSpec& slot, double alpha, double eta, double eta_s);

}  // namespace multilift

#endif  // MULTILIFT_LOSSES_HPP
