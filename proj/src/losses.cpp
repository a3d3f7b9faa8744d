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

#include "multilift/losses.hpp"

#include <cmath>

#include "multilift/dual.hpp"

namespace multilift {

LossTerm tracking_term(const Vec13& x, const Vec13& ref, const Vec12& w) {
    using ad::D1;
    LossTerm out;
    Vec13T<D1> z = x.cast<D1>();
    for (int i = 0; i < 13; ++i) {
        z(i).d = 1.0;
        auto e = tracking_error<D1>(z, ref);
        z(i).d = 0.0;
        D1 l(0.0);
        for (int j = 0; j < 12; ++j) l += w(j) * e(j) * e(j);
        out.grad(i) = l.d;
        out.value = l.v;
    }
    return out;
}

LossTerm obstacle_term(const Vec13& x, const Vec3& p_obs, double alpha, double eta) {
    LossTerm out;
    Vec3 d = x.segment<3>(idx::p) - p_obs;
    double r = d.norm();
    out.value = alpha * std::exp(-eta * r);
    if (r >= 1e-9) out.grad.segment<3>(idx::p) = -eta * out.value * d / r;
    return out;
}

LossTerm slot_term(const Vec13& x, double z_ref, const SlotSpec& slot, double alpha, double eta, double eta_s) {
    LossTerm out;
    Vec3 d = x.segment<3>(idx::p) - slot.position;
    double r2 = d.squaredNorm();
    double as = std::exp(-eta_s * r2 * r2);
    double z = x(idx::p + 2);
    double barrier = std::exp(-eta * (z - slot.lower_z));
    out.value = alpha * ((1.0 - as) * (z - z_ref) + as * barrier);
    // d a_s / d p = -4 eta_s r^2 a_s d
    Vec3 das = -4.0 * eta_s * r2 * as * d;
    Vec3 g = alpha * das * (barrier - (z - z_ref));
    g(2) += alpha * ((1.0 - as) - as * eta * barrier);
    out.grad.segment<3>(idx::p) = g;
    return out;
}

}  // namespace multilift
