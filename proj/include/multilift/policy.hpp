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

#ifndef MULTILIFT_POLICY_HPP
#define MULTILIFT_POLICY_HPP

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "multilift/geometry.hpp"

namespace multilift {

/// theta = lo + (hi - lo) Theta, componentwise.
struct HyperBounds {
    Vec lo;
    Vec hi;

    static HyperBounds uniform(int dim, double lo, double hi);
    void validate() const;
    Vec to_hyperparameters(const Vec& normalized) const;
    /// Diagonal of d theta / d Theta.
    Vec jacobian_diagonal() const { return hi - lo; }
    /// Inverse map, clamped to [eps, 1 - eps].
    Vec to_normalized(const Vec& theta, double eps = 1e-6) const;
};

struct AdamState {
    Vec m, v;
    std::int64_t step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One linear layer with spectral normalization: W = V / sigma, sigma = u^T V v.
struct SpectralLinear {
    Mat V;     ///< raw weights, out x in
    Vec b;
    Vec u;     ///< left singular vector estimate (out)
    Vec v;     ///< right singular vector estimate (in)
    double sigma = 1.0;

    /// sigma of a (numerically) zero matrix; the layer then uses W = V.
    bool degenerate() const { return !(sigma > 1e-12); }
    /// Effective weight V / sigma with the current u, v.
    Mat weight() const { return degenerate() ? V : Mat(V / sigma); }
    /// At least `iterations` power iterations on V, continued until sigma settles; refreshes u, v and sigma.
    void power_iterate(int iterations);
};

/// Activations kept by forward() for backpropagation.
struct ForwardCache {
    Vec input;
    std::vector<Vec> pre;   ///< pre-activations per layer
    std::vector<Vec> post;  ///< activations per layer (last is Theta)
};

/**
 * @brief MLP input -> hidden (ReLU) -> hidden (ReLU) -> output (sigmoid), every layer spectrally normalized.
 *
 * Parameters flatten as [V_1 row-major, b_1, V_2, b_2, V_3, b_3]. u and v are
 * treated as constants in the backward pass.
 */
class PolicyNet {
public:
    PolicyNet() = default;
    PolicyNet(int input_dim, int hidden, int output_dim, std::uint64_t seed, int power_iterations = 1);

    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }
    int hidden() const { return hidden_; }
    int num_params() const;
    int power_iterations() const { return power_iterations_; }
    const std::vector<SpectralLinear>& layers() const { return layers_; }

    Vec forward(const Vec& obs, ForwardCache* cache = nullptr) const;
    /// Vector-Jacobian product: d(g^T Theta)/d(params) at the cached point.
    Vec backward(const ForwardCache& cache, const Vec& dL_dTheta) const;
    /// Jacobian d Theta / d params (output_dim x num_params).
    Mat jacobian(const Vec& obs) const;

    Vec parameters() const;
    /// Sets raw parameters; u, v and sigma are kept.
    void set_parameters(const Vec& p);

    /// Sets the output bias so that forward(0) is close to `normalized`.
    void set_output_bias(const Vec& normalized);

    /// Largest singular value of each effective weight (SVD).
    std::vector<double> spectral_norms() const;

    /// Refreshes the power iteration of every layer.
    void renormalize();

    nlohmann::json to_json() const;
    static PolicyNet from_json(const nlohmann::json& j);

private:
    int input_dim_ = 0;
    int hidden_ = 0;
    int output_dim_ = 0;
    int power_iterations_ = 1;
    std::vector<SpectralLinear> layers_;
};

/// Adam step on the net's raw parameters followed by renormalization (skipped when nothing moved).
/// A non-finite gradient skips the step and returns false.
bool apply_gradient(PolicyNet& net, AdamState& adam, const Vec& grad);

/// Learner of one agent: net, bounds and optimizer.
struct AgentPolicy {
    PolicyNet net;
    HyperBounds bounds;
    AdamState adam;
    int skipped_updates = 0;

    Vec theta(const Vec& obs, ForwardCache* cache = nullptr) const;

    nlohmann::json to_json() const;
    static AgentPolicy from_json(const nlohmann::json& j);
};

}  // namespace multilift

#endif  // MULTILIFT_POLICY_HPP
