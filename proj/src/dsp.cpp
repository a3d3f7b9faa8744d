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

#include "multilift/dsp.hpp"

#include "multilift/dist_mpc.hpp"
#include "multilift/errors.hpp"
#include "multilift/parallel.hpp"

namespace multilift {

namespace {

void require(bool ok, int t, const std::string& what, const std::string& agent) {
    if (!ok) throw ProtocolError("step " + std::to_string(t) + ": missing " + what + " from " + agent);
}

std::string quad_name(int i) { return "quadrotor " + std::to_string(i); }

void check_step(const SensitivityStep& s, int n, const SensitivityState& x) {
    auto sized = [n](const std::vector<Mat>& v) { return static_cast<int>(v.size()) == n; };
    require(sized(s.Fi) && sized(s.Fil) && sized(s.Gi) && sized(s.Gil) && sized(s.Fli) && sized(s.dul_dxi), s.t,
            "coupling blocks", "the central agent");
    for (int i = 0; i < n; ++i) {
        require(s.Fi[i].rows() == 13 && s.Fil[i].rows() == 13 && s.Gi[i].rows() == 13 && s.Gil[i].rows() == 13,
                s.t, "F/G blocks", quad_name(i));
        require(s.Fli[i].rows() == 13 && s.dul_dxi[i].rows() == n, s.t, "load coupling blocks", quad_name(i));
        const int m = static_cast<int>(x.quad_owners[i].load.cols());
        if (m > 0) require(s.Ui.size() == static_cast<size_t>(n) && s.Ui[i].cols() == m, s.t, "U block", quad_name(i));
    }
    require(s.Fl.rows() == 13 && s.Gl.rows() == 13, s.t, "load dynamics blocks", "the central agent");
    if (x.load_owner.load.cols() > 0)
        require(s.Ul.cols() == x.load_owner.load.cols(), s.t, "U block", "the central agent");
}

}  // namespace

std::string to_string(CouplingMode m) { return m == CouplingMode::Pairwise ? "pairwise" : "full"; }

CouplingMode coupling_mode_from_string(const std::string& s) {
    if (s == "pairwise") return CouplingMode::Pairwise;
    if (s == "full") return CouplingMode::Full;
    throw ConfigError("unknown coupling mode '" + s + "'");
}

SensitivityStep assemble_step(int t, const DistributedMpc& mpc, const std::vector<Vec13>& quad_x, const Vec13& load_x,
                              const std::vector<Vec4>& quad_u, const Vec& load_u, const MpcGradients& g,
                              bool learn_quads, bool learn_load) {
    const int n = mpc.num_quads();
    if (static_cast<int>(quad_x.size()) != n || static_cast<int>(quad_u.size()) != n ||
        static_cast<int>(g.quads.size()) != n || load_u.size() != n)
        throw Error("assemble_step: dimension mismatch");
    SensitivityStep s;
    s.t = t;

    const LoadOcp& lm = mpc.load();
    Vec lp = lm.params(0);
    for (int i = 0; i < n; ++i) lp.segment(lm.quad_state_segment(i).offset, 13) = quad_x[i];
    Mat flx, flu;
    dynamics_jacobians(lm, 0, load_x, load_u, lp, flx, flu);
    const Mat& Ll = g.load.du_dx;
    s.Fl = flx + flu * Ll;
    s.Gl = flu;
    s.Ul = learn_load ? g.load.du_dtheta : Mat();
    s.dul_dxi = g.load.du_dxi;
    for (int i = 0; i < n; ++i) {
        Mat fli = dynamics_param_jacobian(lm, 0, load_x, load_u, lp, lm.quad_state_segment(i));
        s.Fli.push_back(fli + flu * g.load.du_dxi[i]);
    }

    for (int i = 0; i < n; ++i) {
        const QuadrotorOcp& qm = mpc.quad(i);
        Vec qp = qm.params(0);
        qp.segment(qm.load_state_segment().offset, 13) = load_x;
        qp.segment(qm.load_control_segment().offset, n) = load_u;
        Mat fx, fu;
        const Vec xi = quad_x[i];
        const Vec ui = quad_u[i];
        dynamics_jacobians(qm, 0, xi, ui, qp, fx, fu);
        Mat fxl = dynamics_param_jacobian(qm, 0, xi, ui, qp, qm.load_state_segment());
        Mat ful = dynamics_param_jacobian(qm, 0, xi, ui, qp, qm.load_control_segment());
        const auto& gi = g.quads[i];
        Mat A = fx + fu * gi.du_dx;
        Mat B = fxl + fu * gi.du_dxl;
        Mat C = ful + fu * gi.du_dul;
        s.Fi.push_back(A + C * g.load.du_dxi[i]);
        s.Fil.push_back(B + C * Ll);
        s.Gi.push_back(fu);
        s.Gil.push_back(C);
        s.Ui.push_back(learn_quads ? gi.du_dtheta : Mat());
    }
    return s;
}

SensitivityState zero_sensitivity(int num_quads, const std::vector<int>& quad_theta_dims, int load_theta_dim) {
    if (static_cast<int>(quad_theta_dims.size()) != num_quads) throw Error("zero_sensitivity: dimension mismatch");
    SensitivityState x;
    auto owner = [num_quads](int m) {
        OwnerSensitivity o;
        o.quads.assign(num_quads, Mat::Zero(13, m));
        o.load = Mat::Zero(13, m);
        return o;
    };
    for (int i = 0; i < num_quads; ++i) x.quad_owners.push_back(owner(quad_theta_dims[i]));
    x.load_owner = owner(load_theta_dim);
    return x;
}

SensitivityState propagate_step(const SensitivityState& x, const SensitivityStep& s, CouplingMode mode, int workers) {
    const int n = static_cast<int>(x.quad_owners.size());
    check_step(s, n, x);
    SensitivityState y = x;

    // Full mode: the central agent gathers sum_j (d u^l / d x^j) X_o^j for every owner o and broadcasts it.
    std::vector<Mat> cross_q(n);
    Mat cross_l;
    if (mode == CouplingMode::Full) {
        auto gather = [&](const OwnerSensitivity& o) {
            Mat acc = Mat::Zero(n, o.load.cols());
            for (int j = 0; j < n; ++j) acc += s.dul_dxi[j] * o.quads[j];
            return acc;
        };
        for (int o = 0; o < n; ++o) cross_q[o] = gather(x.quad_owners[o]);
        cross_l = gather(x.load_owner);
    }

    // Tasks 0..n-1 are the quadrotors, task n the central agent.
    parallel_for(n + 1, workers, [&](int a) {
        if (a < n) {
            const int i = a;
            if (mode == CouplingMode::Pairwise) {
                const auto& own = x.quad_owners[i];
                if (own.load.cols() > 0) {
                    y.quad_owners[i].quads[i] = s.Fi[i] * own.quads[i] + s.Fil[i] * own.load + s.Gi[i] * s.Ui[i];
                    y.quad_owners[i].load = s.Fl * own.load + s.Fli[i] * own.quads[i];
                }
                const auto& lo = x.load_owner;
                if (lo.load.cols() > 0)
                    y.load_owner.quads[i] = s.Fi[i] * lo.quads[i] + s.Fil[i] * lo.load + s.Gil[i] * s.Ul;
            } else {
                for (int o = 0; o < n; ++o) {
                    const auto& ow = x.quad_owners[o];
                    if (ow.load.cols() == 0) continue;
                    Mat xi = s.Fi[i] * ow.quads[i] + s.Fil[i] * ow.load +
                             s.Gil[i] * (cross_q[o] - s.dul_dxi[i] * ow.quads[i]);
                    if (o == i) xi += s.Gi[i] * s.Ui[i];
                    y.quad_owners[o].quads[i] = xi;
                }
                const auto& lo = x.load_owner;
                if (lo.load.cols() > 0)
                    y.load_owner.quads[i] = s.Fi[i] * lo.quads[i] + s.Fil[i] * lo.load +
                                            s.Gil[i] * (cross_l - s.dul_dxi[i] * lo.quads[i] + s.Ul);
            }
        } else {
            const auto& lo = x.load_owner;
            if (lo.load.cols() > 0) {
                Mat xl = s.Fl * lo.load + s.Gl * s.Ul;
                for (int i = 0; i < n; ++i) xl += s.Fli[i] * lo.quads[i];
                y.load_owner.load = xl;
            }
            if (mode == CouplingMode::Full) {
                for (int o = 0; o < n; ++o) {
                    const auto& ow = x.quad_owners[o];
                    if (ow.load.cols() == 0) continue;
                    Mat xl = s.Fl * ow.load;
                    for (int k = 0; k < n; ++k) xl += s.Fli[k] * ow.quads[k];
                    y.quad_owners[o].load = xl;
                }
            }
        }
    });
    return y;
}

std::vector<SensitivityState> propagate(const std::vector<SensitivityStep>& steps, int num_quads,
                                        const std::vector<int>& quad_theta_dims, int load_theta_dim,
                                        CouplingMode mode, int workers) {
    std::vector<SensitivityState> out;
    out.reserve(steps.size() + 1);
    out.push_back(zero_sensitivity(num_quads, quad_theta_dims, load_theta_dim));
    for (const auto& s : steps) out.push_back(propagate_step(out.back(), s, mode, workers));
    return out;
}

void write_sensitivity_norms_header(std::ostream& os) { os << "t,block_label,frobenius_norm\n"; }

void write_sensitivity_norms(std::ostream& os, double t, const SensitivityState& x) {
    const int n = static_cast<int>(x.quad_owners.size());
    for (int o = 0; o < n; ++o) {
        const auto& ow = x.quad_owners[o];
        if (ow.load.cols() == 0) continue;
        for (int k = 0; k < n; ++k)
            os << t << ",X_q" << o << "^q" << k << ',' << ow.quads[k].norm() << '\n';
        os << t << ",X_q" << o << "^l," << ow.load.norm() << '\n';
    }
    const auto& lo = x.load_owner;
    if (lo.load.cols() > 0) {
        for (int k = 0; k < n; ++k) os << t << ",X_l^q" << k << ',' << lo.quads[k].norm() << '\n';
        os << t << ",X_l^l," << lo.load.norm() << '\n';
    }
}

}  // namespace multilift
