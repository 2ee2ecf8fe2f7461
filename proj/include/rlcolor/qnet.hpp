#pragma once

// Small feedforward Q-function approximator: 4 state features in, 9 action
// values out, analytic backprop, SGD on the masked per-action MSE, and the
// soft blend Tw = tau*Mw + (1-tau)*Tw between main and target copies.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlcolor/rng.hpp"

namespace rlcolor {

enum class Activation { Relu, Tanh };

struct NetworkArchitecture {
    int input_dim = 4;
    std::vector<int> hidden = {64, 64};
    int output_dim = 9;
    Activation activation = Activation::Relu;

    std::vector<int> layer_dims() const {
        std::vector<int> dims{input_dim};
        dims.insert(dims.end(), hidden.begin(), hidden.end());
        dims.push_back(output_dim);
        return dims;
    }
};

// Row-major weight matrices W[out][in] and bias vectors per layer.
struct NetworkParams {
    NetworkArchitecture arch;
    std::vector<std::vector<double>> weights; // layer -> out*in, row-major
    std::vector<std::vector<double>> biases;  // layer -> out
};

// Q-values reach reward/(1-gamma), over a thousand at the default gamma; the
// default step size is sized so SGD stays stable at that scale.
struct TrainConfig {
    double learning_rate = 2e-4;
};

struct QSample {
    std::vector<double> features;
    int action;
    double target;
};

inline NetworkParams init_params(const NetworkArchitecture& arch, std::uint64_t seed) {
    for (int w : arch.hidden)
        if (w < 1) throw std::invalid_argument("hidden width must be >= 1");
    NetworkParams p;
    p.arch = arch;
    Rng rng(seed);
    auto dims = arch.layer_dims();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        int fan_in = dims[l], fan_out = dims[l + 1];
        double bound = std::sqrt(6.0 / fan_in);
        std::vector<double> w(static_cast<std::size_t>(fan_out) * fan_in);
        for (double& x : w) x = (2.0 * uniform01(rng) - 1.0) * bound;
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(fan_out, 0.0);
    }
    return p;
}

namespace detail {

inline double activate(double x, Activation a) {
    return a == Activation::Relu ? (x > 0 ? x : 0.0) : std::tanh(x);
}

inline double activate_grad(double pre, double post, Activation a) {
    return a == Activation::Relu ? (pre > 0 ? 1.0 : 0.0) : 1.0 - post * post;
}

// Forward pass keeping pre- and post-activation values per layer.
struct ForwardTrace {
    std::vector<std::vector<double>> pre;  // per affine layer
    std::vector<std::vector<double>> post; // post[0] = input, then activations
};

inline ForwardTrace forward_trace(const NetworkParams& p, const std::vector<double>& x) {
    if (int(x.size()) != p.arch.input_dim) throw std::invalid_argument("feature dimension mismatch");
    ForwardTrace t;
    t.post.push_back(x);
    auto dims = p.arch.layer_dims();
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        int in = dims[l], out = dims[l + 1];
        std::vector<double> z(out);
        const auto& prev = t.post.back();
        for (int o = 0; o < out; ++o) {
            double acc = p.biases[l][o];
            const double* wrow = p.weights[l].data() + std::size_t(o) * in;
            for (int i = 0; i < in; ++i) acc += wrow[i] * prev[i];
            z[o] = acc;
        }
        t.pre.push_back(z);
        bool last = (l + 1 == p.weights.size());
        if (!last)
            for (double& v : z) v = activate(v, p.arch.activation);
        t.post.push_back(std::move(z));
    }
    return t;
}

} // namespace detail

inline std::vector<double> forward(const NetworkParams& p, const std::vector<double>& features) {
    return detail::forward_trace(p, features).post.back();
}

inline double batch_loss(const NetworkParams& p, const std::vector<QSample>& batch) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    double loss = 0.0;
    for (const QSample& s : batch) {
        double err = forward(p, s.features)[s.action] - s.target;
        loss += err * err;
    }
    return loss / double(batch.size());
}

// Gradient structure shares the NetworkParams layout.
using Gradient = NetworkParams;

// Batch loss: mean over samples of (Q(s, a) - target)^2, only the selected
// action's output contributing per sample.
inline std::pair<Gradient, double> gradient(const NetworkParams& p,
                                            const std::vector<QSample>& batch) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    Gradient g;
    g.arch = p.arch;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        g.weights.emplace_back(p.weights[l].size(), 0.0);
        g.biases.emplace_back(p.biases[l].size(), 0.0);
    }
    auto dims = p.arch.layer_dims();
    double loss = 0.0;
    for (const QSample& s : batch) {
        if (!std::isfinite(s.target)) throw std::invalid_argument("non-finite training target");
        if (s.action < 0 || s.action >= p.arch.output_dim)
            throw std::invalid_argument("action id out of range");
        auto t = detail::forward_trace(p, s.features);
        double err = t.post.back()[s.action] - s.target;
        loss += err * err;

        std::vector<double> delta(p.arch.output_dim, 0.0);
        delta[s.action] = 2.0 * err / double(batch.size());
        for (int l = int(p.weights.size()) - 1; l >= 0; --l) {
            int in = dims[l], out = dims[l + 1];
            const auto& prev = t.post[l];
            for (int o = 0; o < out; ++o) {
                if (delta[o] == 0.0) continue;
                double* grow = g.weights[l].data() + std::size_t(o) * in;
                for (int i = 0; i < in; ++i) grow[i] += delta[o] * prev[i];
                g.biases[l][o] += delta[o];
            }
            if (l == 0) break;
            std::vector<double> next(in, 0.0);
            for (int o = 0; o < out; ++o) {
                if (delta[o] == 0.0) continue;
                const double* wrow = p.weights[l].data() + std::size_t(o) * in;
                for (int i = 0; i < in; ++i) next[i] += wrow[i] * delta[o];
            }
            for (int i = 0; i < in; ++i)
                next[i] *= detail::activate_grad(t.pre[l - 1][i], t.post[l][i], p.arch.activation);
            delta = std::move(next);
        }
    }
    return {std::move(g), loss / double(batch.size())};
}

// One SGD step; returns the updated params and the pre-step batch loss.
inline std::pair<NetworkParams, double> train_batch(const NetworkParams& p,
                                                    const std::vector<QSample>& batch,
                                                    const TrainConfig& cfg) {
    auto [g, loss] = gradient(p, batch);
    NetworkParams out = p;
    for (std::size_t l = 0; l < out.weights.size(); ++l) {
        for (std::size_t i = 0; i < out.weights[l].size(); ++i)
            out.weights[l][i] -= cfg.learning_rate * g.weights[l][i];
        for (std::size_t i = 0; i < out.biases[l].size(); ++i)
            out.biases[l][i] -= cfg.learning_rate * g.biases[l][i];
    }
    return {std::move(out), loss};
}

inline NetworkParams soft_update(const NetworkParams& target, const NetworkParams& main,
                                 double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau outside [0, 1]");
    if (target.weights.size() != main.weights.size())
        throw std::invalid_argument("parameter shape mismatch");
    NetworkParams out = target;
    for (std::size_t l = 0; l < out.weights.size(); ++l) {
        if (target.weights[l].size() != main.weights[l].size() ||
            target.biases[l].size() != main.biases[l].size())
            throw std::invalid_argument("parameter shape mismatch");
        for (std::size_t i = 0; i < out.weights[l].size(); ++i)
            out.weights[l][i] = main.weights[l][i] * tau + target.weights[l][i] * (1.0 - tau);
        for (std::size_t i = 0; i < out.biases[l].size(); ++i)
            out.biases[l][i] = main.biases[l][i] * tau + target.biases[l][i] * (1.0 - tau);
    }
    return out;
}

// Checkpoint format: JSON with the architecture and all layer arrays.
// nlohmann serialises doubles with round-trip precision, so save -> load
// reproduces every parameter bit-exactly.
inline nlohmann::json params_to_json(const NetworkParams& p) {
    nlohmann::json j;
    j["input_dim"] = p.arch.input_dim;
    j["hidden"] = p.arch.hidden;
    j["output_dim"] = p.arch.output_dim;
    j["activation"] = p.arch.activation == Activation::Relu ? "relu" : "tanh";
    j["weights"] = p.weights;
    j["biases"] = p.biases;
    return j;
}

inline NetworkParams params_from_json(const nlohmann::json& j) {
    NetworkParams p;
    p.arch.input_dim = j.at("input_dim").get<int>();
    p.arch.hidden = j.at("hidden").get<std::vector<int>>();
    p.arch.output_dim = j.at("output_dim").get<int>();
    std::string act = j.at("activation").get<std::string>();
    if (act == "relu") p.arch.activation = Activation::Relu;
    else if (act == "tanh") p.arch.activation = Activation::Tanh;
    else throw std::invalid_argument("unknown activation '" + act + "'");
    p.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    p.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    auto dims = p.arch.layer_dims();
    if (p.weights.size() != dims.size() - 1 || p.biases.size() != dims.size() - 1)
        throw std::invalid_argument("checkpoint layer count mismatch");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l)
        if (int(p.weights[l].size()) != dims[l] * dims[l + 1] || int(p.biases[l].size()) != dims[l + 1])
            throw std::invalid_argument("checkpoint shape mismatch");
    return p;
}

} // namespace rlcolor
