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

#include "multilift/stage_model.hpp"

#include <numeric>

#include "multilift/errors.hpp"

namespace multilift {

using ad::D1;
using ad::D2;

namespace {

template <typename S>
VecXT<S> lift(const Vec& v) {
    VecXT<S> out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = S(v(i));
    return out;
}

// Lifted (x, u, p) addressed by a single index over the concatenation [x; u; p].
template <typename S>
struct Lifted {
    VecXT<S> x, u, p;
    int nx, nu;

    Lifted(const Vec& x0, const Vec& u0, const Vec& p0)
        : x(lift<S>(x0)), u(lift<S>(u0)), p(lift<S>(p0)),
          nx(static_cast<int>(x0.size())), nu(static_cast<int>(u0.size())) {}

    S& at(int i) {
        if (i < nx) return x(i);
        if (i < nx + nu) return u(i - nx);
        return p(i - nx - nu);
    }
};

void require_finite(const Mat& m, const char* what) {
    if (!m.allFinite()) throw NumericalFailure(std::string("non-finite ") + what);
}

}  // namespace

std::vector<std::vector<int>> StageModel::cost_blocks() const {
    std::vector<int> all(state_dim() + control_dim());
    std::iota(all.begin(), all.end(), 0);
    return {all};
}

double StageModel::checked_running_cost(int k, const Vec& x, const Vec& u) const {
    if (auto v = violated_constraint(k, x, &u)) throw InfeasiblePoint(*v, k);
    return running_cost(k, VecXT<double>(x), VecXT<double>(u), VecXT<double>(params(k)));
}

double StageModel::checked_terminal_cost(const Vec& x) const {
    if (auto v = violated_constraint(horizon(), x, nullptr)) throw InfeasiblePoint(*v, horizon());
    return terminal_cost(VecXT<double>(x), VecXT<double>(params(horizon())));
}

void dynamics_jacobians(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p, Mat& fx,
                        Mat& fu) {
    const int nx = m.state_dim();
    const int nu = m.control_dim();
    fx.resize(nx, nx);
    fu.resize(nx, nu);
    Lifted<D1> z(x, u, p);
    for (int j = 0; j < nx + nu; ++j) {
        z.at(j).d = 1.0;
        VecXT<D1> f = m.dynamics(k, z.x, z.u, z.p);
        z.at(j).d = 0.0;
        for (int i = 0; i < nx; ++i) {
            if (j < nx) fx(i, j) = f(i).d;
            else fu(i, j - nx) = f(i).d;
        }
    }
    require_finite(fx, "dynamics Jacobian");
    require_finite(fu, "dynamics Jacobian");
}

void cost_gradient(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p, Vec& lx, Vec& lu) {
    const int nx = m.state_dim();
    const int nu = m.control_dim();
    lx.resize(nx);
    lu.resize(nu);
    Lifted<D1> z(x, u, p);
    for (int j = 0; j < nx + nu; ++j) {
        z.at(j).d = 1.0;
        D1 c = m.running_cost(k, z.x, z.u, z.p);
        z.at(j).d = 0.0;
        if (j < nx) lx(j) = c.d;
        else lu(j - nx) = c.d;
    }
}

StageDerivatives stage_derivatives(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p) {
    const int nx = m.state_dim();
    const int nu = m.control_dim();
    StageDerivatives out;
    dynamics_jacobians(m, k, x, u, p, out.fx, out.fu);
    Mat h = Mat::Zero(nx + nu, nx + nu);
    Vec g = Vec::Zero(nx + nu);
    Lifted<D2> z(x, u, p);
    bool have_value = false;
    for (const auto& block : m.cost_blocks()) {
        for (size_t a = 0; a < block.size(); ++a) {
            for (size_t b = a; b < block.size(); ++b) {
                int i = block[a];
                int j = block[b];
                z.at(i).v.d = 1.0;
                z.at(j).d.v = 1.0;
                D2 c = m.running_cost(k, z.x, z.u, z.p);
                z.at(i).v.d = 0.0;
                z.at(j).d.v = 0.0;
                h(i, j) = c.d.d;
                h(j, i) = c.d.d;
                if (a == b) g(i) = c.v.d;
                if (!have_value) {
                    out.cost = c.v.v;
                    have_value = true;
                }
            }
        }
    }
    out.lx = g.head(nx);
    out.lu = g.tail(nu);
    out.lxx = h.topLeftCorner(nx, nx);
    out.luu = h.bottomRightCorner(nu, nu);
    out.lux = h.bottomLeftCorner(nu, nx);
    require_finite(h, "cost Hessian");
    require_finite(g, "cost gradient");
    return out;
}

TerminalDerivatives terminal_derivatives(const StageModel& m, const Vec& x, const Vec& p) {
    const int nx = m.state_dim();
    TerminalDerivatives out;
    out.lx = Vec::Zero(nx);
    out.lxx = Mat::Zero(nx, nx);
    Lifted<D2> z(x, Vec(), p);
    bool have_value = false;
    for (const auto& block : m.cost_blocks()) {
        std::vector<int> xs;
        for (int i : block)
            if (i < nx) xs.push_back(i);
        for (size_t a = 0; a < xs.size(); ++a) {
            for (size_t b = a; b < xs.size(); ++b) {
                int i = xs[a];
                int j = xs[b];
                z.x(i).v.d = 1.0;
                z.x(j).d.v = 1.0;
                D2 c = m.terminal_cost(z.x, z.p);
                z.x(i).v.d = 0.0;
                z.x(j).d.v = 0.0;
                out.lxx(i, j) = c.d.d;
                out.lxx(j, i) = c.d.d;
                if (a == b) out.lx(i) = c.v.d;
                if (!have_value) {
                    out.cost = c.v.v;
                    have_value = true;
                }
            }
        }
    }
    require_finite(out.lxx, "terminal Hessian");
    return out;
}

Mat hamiltonian_hessian(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p,
                        const Vec& lambda) {
    const int n = m.state_dim() + m.control_dim();
    Mat h(n, n);
    Lifted<D2> z(x, u, p);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            z.at(i).v.d = 1.0;
            z.at(j).d.v = 1.0;
            D2 c = m.running_cost(k, z.x, z.u, z.p);
            VecXT<D2> f = m.dynamics(k, z.x, z.u, z.p);
            z.at(i).v.d = 0.0;
            z.at(j).d.v = 0.0;
            double val = c.d.d;
            for (Eigen::Index r = 0; r < f.size(); ++r) val += lambda(r) * f(r).d.d;
            h(i, j) = val;
            h(j, i) = val;
        }
    }
    require_finite(h, "Hamiltonian Hessian");
    return h;
}

Mat terminal_hessian(const StageModel& m, const Vec& x, const Vec& p) {
    const int nx = m.state_dim();
    Mat h(nx, nx);
    Lifted<D2> z(x, Vec(), p);
    for (int i = 0; i < nx; ++i) {
        for (int j = i; j < nx; ++j) {
            z.x(i).v.d = 1.0;
            z.x(j).d.v = 1.0;
            D2 c = m.terminal_cost(z.x, z.p);
            z.x(i).v.d = 0.0;
            z.x(j).d.v = 0.0;
            h(i, j) = c.d.d;
            h(j, i) = c.d.d;
        }
    }
    require_finite(h, "terminal Hessian");
    return h;
}

Mat hamiltonian_mixed(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p,
                      const Vec& lambda, ParamSegment seg, bool cost_only) {
    const int nx = m.state_dim();
    const int nu = m.control_dim();
    const int n = nx + nu;
    Mat h(n, seg.size);
    Lifted<D2> z(x, u, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < seg.size; ++j) {
            z.at(i).v.d = 1.0;
            z.p(seg.offset + j).d.v = 1.0;
            D2 c = m.running_cost(k, z.x, z.u, z.p);
            double val = c.d.d;
            if (!cost_only) {
                VecXT<D2> f = m.dynamics(k, z.x, z.u, z.p);
                for (Eigen::Index r = 0; r < f.size(); ++r) val += lambda(r) * f(r).d.d;
            }
            z.at(i).v.d = 0.0;
            z.p(seg.offset + j).d.v = 0.0;
            h(i, j) = val;
        }
    }
    require_finite(h, "mixed Hamiltonian Hessian");
    return h;
}

Mat terminal_mixed(const StageModel& m, const Vec& x, const Vec& p, ParamSegment seg) {
    const int nx = m.state_dim();
    Mat h(nx, seg.size);
    Lifted<D2> z(x, Vec(), p);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < seg.size; ++j) {
            z.x(i).v.d = 1.0;
            z.p(seg.offset + j).d.v = 1.0;
            D2 c = m.terminal_cost(z.x, z.p);
            z.x(i).v.d = 0.0;
            z.p(seg.offset + j).d.v = 0.0;
            h(i, j) = c.d.d;
        }
    }
    require_finite(h, "terminal mixed Hessian");
    return h;
}

Mat dynamics_param_jacobian(const StageModel& m, int k, const Vec& x, const Vec& u, const Vec& p,
                            ParamSegment seg) {
    const int nx = m.state_dim();
    Mat e(nx, seg.size);
    Lifted<D1> z(x, u, p);
    for (int j = 0; j < seg.size; ++j) {
        z.p(seg.offset + j).d = 1.0;
        VecXT<D1> f = m.dynamics(k, z.x, z.u, z.p);
        z.p(seg.offset + j).d = 0.0;
        for (int i = 0; i < nx; ++i) e(i, j) = f(i).d;
    }
    require_finite(e, "parameter Jacobian");
    return e;
}

}  // namespace multilift
