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

#include "multilift/policy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "multilift/errors.hpp"

namespace multilift {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec json_vec(const nlohmann::json& j) {
    auto s = j.get<std::vector<double>>();
    return Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(s.size()));
}

nlohmann::json mat_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
    return rows;
}

Mat json_mat(const nlohmann::json& j, int cols) {
    Mat m(static_cast<int>(j.size()), cols);
    for (int r = 0; r < m.rows(); ++r) {
        Vec row = json_vec(j.at(r));
        if (row.size() != cols) throw ConfigError("checkpoint: ragged weight matrix");
        m.row(r) = row.transpose();
    }
    return m;
}

}  // namespace

HyperBounds HyperBounds::uniform(int dim, double lo, double hi) {
    return {Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
}

void HyperBounds::validate() const {
    if (lo.size() != hi.size() || lo.size() == 0) throw ConfigError("hyperparameter bounds: size mismatch");
    for (int i = 0; i < lo.size(); ++i)
        if (!(hi(i) > lo(i))) throw ConfigError("hyperparameter bounds: hi must exceed lo");
}

Vec HyperBounds::to_hyperparameters(const Vec& normalized) const {
    if (normalized.size() != lo.size()) throw Error("hyperparameter bounds: size mismatch");
    return lo + (hi - lo).cwiseProduct(normalized);
}

Vec HyperBounds::to_normalized(const Vec& theta, double eps) const {
    Vec z = (theta - lo).cwiseQuotient(hi - lo);
    return z.cwiseMax(eps).cwiseMin(1.0 - eps);
}

void SpectralLinear::power_iterate(int iterations) {
    constexpr int kMaxIterations = 2000;
    constexpr double kTol = 1e-12;
    double prev = -1.0;
    for (int k = 0; k < kMaxIterations; ++k) {
        v = V.transpose() * u;
        double nv = v.norm();
        if (nv > 0.0) v /= nv;
        u = V * v;
        double nu = u.norm();
        if (nu > 0.0) u /= nu;
        sigma = u.dot(V * v);
        if (k + 1 >= iterations && std::abs(sigma - prev) <= kTol * std::abs(sigma)) break;
        prev = sigma;
    }
    if (!std::isfinite(sigma)) throw NumericalFailure("spectral normalization: non-finite sigma");
}

PolicyNet::PolicyNet(int input_dim, int hidden, int output_dim, std::uint64_t seed, int power_iterations)
    : input_dim_(input_dim), hidden_(hidden), output_dim_(output_dim), power_iterations_(power_iterations) {
    if (input_dim <= 0 || hidden <= 0 || output_dim <= 0) throw ConfigError("policy: dimensions must be positive");
    if (power_iterations < 1) throw ConfigError("policy: power_iterations must be >= 1");
    std::mt19937_64 rng(seed);
    const int dims[4] = {input_dim, hidden, hidden, output_dim};
    for (int l = 0; l < 3; ++l) {
        SpectralLinear layer;
        const int in = dims[l], out = dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> w(-bound, bound);
        layer.V.resize(out, in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) layer.V(r, c) = w(rng);
        layer.b.resize(out);
        for (int r = 0; r < out; ++r) layer.b(r) = w(rng);
        std::normal_distribution<double> nrm(0.0, 1.0);
        layer.u.resize(out);
        for (int r = 0; r < out; ++r) layer.u(r) = nrm(rng);
        layer.u.normalize();
        // Converge once so that later single-step refreshes track the top singular pair.
        layer.power_iterate(200);
        layers_.push_back(std::move(layer));
    }
}

int PolicyNet::num_params() const {
    int n = 0;
    for (const auto& l : layers_) n += static_cast<int>(l.V.size() + l.b.size());
    return n;
}

Vec PolicyNet::forward(const Vec& obs, ForwardCache* cache) const {
    if (obs.size() != input_dim_) throw Error("policy: observation has the wrong dimension");
    Vec a = obs;
    if (cache) {
        cache->input = obs;
        cache->pre.clear();
        cache->post.clear();
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Vec z = layers_[l].weight() * a + layers_[l].b;
        if (l + 1 < layers_.size())
            a = z.cwiseMax(0.0);
        else
            a = z.unaryExpr([](double x) { return sigmoid(x); });
        if (cache) {
            cache->pre.push_back(z);
            cache->post.push_back(a);
        }
    }
    return a;
}

Vec PolicyNet::backward(const ForwardCache& cache, const Vec& dL_dTheta) const {
    if (cache.post.size() != layers_.size()) throw Error("policy: backward needs a forward cache");
    Vec grad(num_params());
    // Offsets of each layer's block.
    std::vector<int> off;
    int o = 0;
    for (const auto& l : layers_) {
        off.push_back(o);
        o += static_cast<int>(l.V.size() + l.b.size());
    }
    Vec delta;
    {
        const Vec& y = cache.post.back();
        delta = dL_dTheta.cwiseProduct(y.cwiseProduct(Vec::Ones(y.size()) - y));
    }
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
        const SpectralLinear& L = layers_[l];
        const Vec& in = l == 0 ? cache.input : cache.post[l - 1];
        Mat gW = delta * in.transpose();
        // W = V / sigma with sigma = u^T V v, u and v fixed.
        Mat W = L.weight();
        Mat gV = gW;
        if (!L.degenerate()) {
            double s = (gW.cwiseProduct(W)).sum();
            gV = (gW - s * L.u * L.v.transpose()) / L.sigma;
        }
        int k = off[l];
        for (int r = 0; r < gV.rows(); ++r)
            for (int c = 0; c < gV.cols(); ++c) grad(k++) = gV(r, c);
        grad.segment(k, L.b.size()) = delta;
        if (l > 0) {
            Vec back = W.transpose() * delta;
            const Vec& z = cache.pre[l - 1];
            delta = back.cwiseProduct(z.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }));
        }
    }
    return grad;
}

Mat PolicyNet::jacobian(const Vec& obs) const {
    ForwardCache c;
    forward(obs, &c);
    Mat J(output_dim_, num_params());
    for (int i = 0; i < output_dim_; ++i) J.row(i) = backward(c, Vec::Unit(output_dim_, i)).transpose();
    return J;
}

Vec PolicyNet::parameters() const {
    Vec p(num_params());
    int k = 0;
    for (const auto& l : layers_) {
        for (int r = 0; r < l.V.rows(); ++r)
            for (int c = 0; c < l.V.cols(); ++c) p(k++) = l.V(r, c);
        p.segment(k, l.b.size()) = l.b;
        k += static_cast<int>(l.b.size());
    }
    return p;
}

void PolicyNet::set_parameters(const Vec& p) {
    if (p.size() != num_params()) throw Error("policy: parameter vector has the wrong size");
    int k = 0;
    for (auto& l : layers_) {
        for (int r = 0; r < l.V.rows(); ++r)
            for (int c = 0; c < l.V.cols(); ++c) l.V(r, c) = p(k++);
        l.b = p.segment(k, l.b.size());
        k += static_cast<int>(l.b.size());
        l.sigma = l.u.dot(l.V * l.v);
    }
}

void PolicyNet::set_output_bias(const Vec& normalized) {
    if (normalized.size() != output_dim_) throw Error("policy: output bias has the wrong size");
    auto& b = layers_.back().b;
    for (int i = 0; i < output_dim_; ++i) {
        double y = std::clamp(normalized(i), 1e-6, 1.0 - 1e-6);
        b(i) = std::log(y / (1.0 - y));
    }
}

std::vector<double> PolicyNet::spectral_norms() const {
    std::vector<double> out;
    for (const auto& l : layers_) {
        Eigen::JacobiSVD<Mat> svd(l.weight());
        out.push_back(svd.singularValues()(0));
    }
    return out;
}

void PolicyNet::renormalize() {
    for (auto& l : layers_) l.power_iterate(power_iterations_);
}

nlohmann::json PolicyNet::to_json() const {
    nlohmann::json j;
    j["input_dim"] = input_dim_;
    j["hidden"] = hidden_;
    j["output_dim"] = output_dim_;
    j["power_iterations"] = power_iterations_;
    j["layers"] = nlohmann::json::array();
    for (const auto& l : layers_) {
        j["layers"].push_back({{"V", mat_json(l.V)},
                               {"b", vec_json(l.b)},
                               {"u", vec_json(l.u)},
                               {"v", vec_json(l.v)},
                               {"sigma", l.sigma}});
    }
    return j;
}

PolicyNet PolicyNet::from_json(const nlohmann::json& j) {
    PolicyNet net;
    try {
        net.input_dim_ = j.at("input_dim").get<int>();
        net.hidden_ = j.at("hidden").get<int>();
        net.output_dim_ = j.at("output_dim").get<int>();
        net.power_iterations_ = j.at("power_iterations").get<int>();
        const int dims[4] = {net.input_dim_, net.hidden_, net.hidden_, net.output_dim_};
        const auto& layers = j.at("layers");
        if (layers.size() != 3) throw ConfigError("checkpoint: expected 3 layers");
        for (int l = 0; l < 3; ++l) {
            const auto& jl = layers.at(l);
            SpectralLinear layer;
            layer.V = json_mat(jl.at("V"), dims[l]);
            layer.b = json_vec(jl.at("b"));
            layer.u = json_vec(jl.at("u"));
            layer.v = json_vec(jl.at("v"));
            layer.sigma = jl.at("sigma").get<double>();
            if (layer.V.rows() != dims[l + 1] || layer.b.size() != dims[l + 1] || layer.u.size() != dims[l + 1] ||
                layer.v.size() != dims[l])
                throw ConfigError("checkpoint: layer shape mismatch");
            net.layers_.push_back(std::move(layer));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("checkpoint: ") + e.what());
    }
    return net;
}

bool apply_gradient(PolicyNet& net, AdamState& adam, const Vec& grad) {
    if (grad.size() != net.num_params()) throw Error("adam: gradient has the wrong size");
    if (!grad.allFinite()) return false;
    if (adam.m.size() != grad.size()) {
        adam.m = Vec::Zero(grad.size());
        adam.v = Vec::Zero(grad.size());
    }
    adam.step += 1;
    adam.m = adam.beta1 * adam.m + (1.0 - adam.beta1) * grad;
    adam.v = adam.beta2 * adam.v + (1.0 - adam.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
    const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
    Vec step = (adam.m / c1).cwiseQuotient(((adam.v / c2).cwiseSqrt().array() + adam.epsilon).matrix());
    const Vec before = net.parameters();
    const Vec after = before - adam.learning_rate * step;
    if ((after.array() == before.array()).all()) return true;
    net.set_parameters(after);
    net.renormalize();
    return true;
}

Vec AgentPolicy::theta(const Vec& obs, ForwardCache* cache) const {
    return bounds.to_hyperparameters(net.forward(obs, cache));
}

nlohmann::json AgentPolicy::to_json() const {
    nlohmann::json j;
    j["net"] = net.to_json();
    j["bounds"] = {{"lo", vec_json(bounds.lo)}, {"hi", vec_json(bounds.hi)}};
    j["adam"] = {{"m", vec_json(adam.m)},
                 {"v", vec_json(adam.v)},
                 {"step", adam.step},
                 {"learning_rate", adam.learning_rate},
                 {"beta1", adam.beta1},
                 {"beta2", adam.beta2},
                 {"epsilon", adam.epsilon}};
    j["skipped_updates"] = skipped_updates;
    return j;
}

AgentPolicy AgentPolicy::from_json(const nlohmann::json& j) {
    AgentPolicy p;
    try {
        p.net = PolicyNet::from_json(j.at("net"));
        p.bounds.lo = json_vec(j.at("bounds").at("lo"));
        p.bounds.hi = json_vec(j.at("bounds").at("hi"));
        p.bounds.validate();
        if (p.bounds.lo.size() != p.net.output_dim()) throw ConfigError("checkpoint: bounds do not match the net");
        const auto& a = j.at("adam");
        p.adam.m = json_vec(a.at("m"));
        p.adam.v = json_vec(a.at("v"));
        p.adam.step = a.at("step").get<std::int64_t>();
        p.adam.learning_rate = a.at("learning_rate").get<double>();
        p.adam.beta1 = a.at("beta1").get<double>();
        p.adam.beta2 = a.at("beta2").get<double>();
        p.adam.epsilon = a.at("epsilon").get<double>();
        p.skipped_updates = j.at("skipped_updates").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("checkpoint: ") + e.what());
    }
    return p;
}

}  // namespace multilift
