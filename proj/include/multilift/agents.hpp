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

#ifndef MULTILIFT_AGENTS_HPP
#define MULTILIFT_AGENTS_HPP

#include <optional>
#include <vector>

#include "multilift/stage_model.hpp"
#include "multilift/world.hpp"

namespace multilift {

struct Obstacle {
    Vec3 position = Vec3::Zero();
    double radius = 0.5;
};

/// Diagonal weights of one agent: 12 running state, nu control, 12 terminal state.
struct CostWeights {
    Vec12 qx = Vec12::Ones();
    Vec qu;
    Vec12 qxn = Vec12::Ones();

    Vec pack() const;
    static CostWeights unpack(const Vec& theta, int nu);
};

struct HorizonSettings {
    int horizon = 10;
    double dt = 0.02;
    double gamma = 1e-2;
    double g = 9.81;
};

/**
 * @brief Barrier-softened MPC problem of quadrotor i.
 *
 * Stage parameters: [theta(28) | x^l_k(13) | u^l_k(n) | p^j_k(3) for j != i].
 */
class QuadrotorOcp : public StageModelImpl<QuadrotorOcp> {
public:
    static constexpr int kThetaDim = 28;

    struct Setup {
        int index = 0;
        int num_cables = 1;
        QuadParams quad;
        Vec3 attachment = Vec3::Zero();
        double natural_length = 2.0;
        bool attached = true;
        HorizonSettings horizon;
        std::optional<Obstacle> obstacle;
    };

    explicit QuadrotorOcp(Setup setup);

    void set_initial_state(const Vec13& x0);
    void set_theta(const Vec& theta);
    void set_references(const std::vector<Vec13>& x_ref, const std::vector<Vec>& u_ref);
    /// load_x: N+1 states, load_u: N tension vectors, peers: N+1 states per other quadrotor.
    void set_externals(const std::vector<Vec13>& load_x, const std::vector<Vec>& load_u,
                       const std::vector<std::vector<Vec13>>& peers);

    const Setup& setup() const { return setup_; }
    const Vec& theta() const { return theta_; }
    ParamSegment load_state_segment() const { return {kThetaDim, 13}; }
    ParamSegment load_control_segment() const { return {kThetaDim + 13, setup_.num_cables}; }

    int state_dim() const override { return 13; }
    int control_dim() const override { return 4; }
    int param_dim() const override;
    int theta_dim() const override { return kThetaDim; }
    int horizon() const override { return setup_.horizon.horizon; }
    double dt() const override { return setup_.horizon.dt; }
    const Vec& initial_state() const override { return x0_; }
    Vec params(int k) const override { return p_.at(k); }
    std::optional<std::string> violated_constraint(int k, const Vec& x, const Vec* u) const override;
    std::vector<Vec> initial_controls() const override;
    std::vector<std::vector<int>> cost_blocks() const override;

    template <typename S>
    VecXT<S> dyn(int k, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const;
    template <typename S>
    S cost(int k, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const;
    template <typename S>
    S terminal(const VecXT<S>& x, const VecXT<S>& p) const;

private:
    template <typename S>
    S constraint_terms(const VecXT<S>& x, const VecXT<S>& p) const;
    void rebuild();

    Setup setup_;
    Vec x0_ = Vec::Zero(13);
    Vec theta_ = Vec::Ones(kThetaDim);
    std::vector<Vec13> x_ref_;
    std::vector<Mat3> r_ref_;
    std::vector<Vec> u_ref_;
    std::vector<Vec13> load_x_;
    std::vector<Vec> load_u_;
    std::vector<std::vector<Vec13>> peers_;
    std::vector<Vec> p_;
};

/**
 * @brief Barrier-softened MPC problem of the load; controls are cable tension magnitudes.
 *
 * Stage parameters: [theta | x^i_k(13) for i = 1..n]. theta is either the
 * diagonal weights (24 + n) or a single tension-reference offset.
 */
class LoadOcp : public StageModelImpl<LoadOcp> {
public:
    enum class ThetaMode { Weights, TensionOffset };

    struct Setup {
        LoadParams load;
        CableParams cable;
        HorizonSettings horizon;
        std::optional<Obstacle> obstacle;
        ThetaMode mode = ThetaMode::Weights;
        /// Weights used when mode == TensionOffset.
        CostWeights fixed_weights;
    };

    explicit LoadOcp(Setup setup);

    void set_initial_state(const Vec13& x0);
    void set_theta(const Vec& theta);
    void set_references(const std::vector<Vec13>& x_ref, const std::vector<Vec>& u_ref);
    /// quads: N+1 states per quadrotor.
    void set_externals(const std::vector<std::vector<Vec13>>& quads);

    const Setup& setup() const { return setup_; }
    const Vec& theta() const { return theta_; }
    int num_cables() const { return setup_.load.num_cables(); }
    ParamSegment quad_state_segment(int i) const { return {theta_dim() + 13 * i, 13}; }

    int state_dim() const override { return 13; }
    int control_dim() const override { return num_cables(); }
    int param_dim() const override { return theta_dim() + 13 * num_cables(); }
    int theta_dim() const override;
    int horizon() const override { return setup_.horizon.horizon; }
    double dt() const override { return setup_.horizon.dt; }
    const Vec& initial_state() const override { return x0_; }
    Vec params(int k) const override { return p_.at(k); }
    std::optional<std::string> violated_constraint(int k, const Vec& x, const Vec* u) const override;
    std::vector<Vec> initial_controls() const override;
    std::vector<std::vector<int>> cost_blocks() const override;

    template <typename S>
    VecXT<S> dyn(int k, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const;
    template <typename S>
    S cost(int k, const VecXT<S>& x, const VecXT<S>& u, const VecXT<S>& p) const;
    template <typename S>
    S terminal(const VecXT<S>& x, const VecXT<S>& p) const;

private:
    template <typename S>
    S cable_terms(const VecXT<S>& x, const VecXT<S>& p) const;
    void rebuild();

    Setup setup_;
    LoadCoupling coupling_;
    Vec x0_ = Vec::Zero(13);
    Vec theta_;
    std::vector<Vec13> x_ref_;
    std::vector<Mat3> r_ref_;
    std::vector<Vec> u_ref_;
    std::vector<std::vector<Vec13>> quads_;
    std::vector<Vec> p_;
};

}  // namespace multilift

#endif  // MULTILIFT_AGENTS_HPP
