// Copyright 2026 The qtlbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Dense layers, classification losses, Adam and the step schedule.
 */

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <random>
#include <string>

#include "qtl/errors.hpp"

namespace qtl {

enum class Activation { None, Relu, Tanh };

template <typename Scalar = double>
struct DenseLayer {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Matrix weights;  // out_dim x in_dim
    Vector bias;
    Activation activation = Activation::None;

    [[nodiscard]] Eigen::Index in_dim() const { return weights.cols(); }
    [[nodiscard]] Eigen::Index out_dim() const { return weights.rows(); }
    [[nodiscard]] Eigen::Index param_count() const {
        return weights.size() + bias.size();
    }

    /// Weights and bias uniform in +-1/sqrt(in_dim).
    template <typename Rng>
    static DenseLayer uniform_init(Eigen::Index in_dim, Eigen::Index out_dim,
                                   Activation act, Rng &rng) {
        const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(in_dim));
        std::uniform_real_distribution<Scalar> dist(-bound, bound);
        DenseLayer layer;
        layer.weights.resize(out_dim, in_dim);
        layer.bias.resize(out_dim);
        // Row-major fill so the draw order matches the serialized order.
        for (Eigen::Index r = 0; r < out_dim; ++r)
            for (Eigen::Index c = 0; c < in_dim; ++c) layer.weights(r, c) = dist(rng);
        for (Eigen::Index r = 0; r < out_dim; ++r) layer.bias(r) = dist(rng);
        layer.activation = act;
        return layer;
    }
};

template <typename Scalar>
struct DenseGrads {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weights;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bias;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> input;
};

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1>
dense_preactivation(const DenseLayer<Scalar> &layer,
                    const Eigen::MatrixBase<Derived> &input) {
    if (input.size() != layer.in_dim()) {
        throw ShapeError("dense layer expects " + std::to_string(layer.in_dim()) +
                         " inputs, got " + std::to_string(input.size()));
    }
    return layer.weights * input + layer.bias;
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1>
dense_forward(const DenseLayer<Scalar> &layer, const Eigen::MatrixBase<Derived> &input) {
    auto pre = dense_preactivation(layer, input);
    switch (layer.activation) {
    case Activation::None: return pre;
    case Activation::Relu: return pre.cwiseMax(Scalar(0));
    case Activation::Tanh: return pre.array().tanh().matrix();
    }
    return pre;
}

/// Chain rule through activation then affine map.
template <typename Scalar, typename InDerived, typename UpDerived>
DenseGrads<Scalar> dense_backward(const DenseLayer<Scalar> &layer,
                                  const Eigen::MatrixBase<InDerived> &input,
                                  const Eigen::MatrixBase<UpDerived> &upstream) {
    if (upstream.size() != layer.out_dim()) {
        throw ShapeError("dense_backward: upstream has " +
                         std::to_string(upstream.size()) + " entries, layer emits " +
                         std::to_string(layer.out_dim()));
    }
    const auto pre = dense_preactivation(layer, input);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> delta = upstream;
    switch (layer.activation) {
    case Activation::None: break;
    case Activation::Relu:
        delta = (pre.array() > Scalar(0)).select(delta, Scalar(0));
        break;
    case Activation::Tanh:
        delta = delta.cwiseProduct(
            (Scalar(1) - pre.array().tanh().square()).matrix());
        break;
    }
    DenseGrads<Scalar> g;
    g.weights = delta * input.transpose();
    g.bias = delta;
    g.input = layer.weights.transpose() * delta;
    return g;
}

// ---------------------------------------------------------------------------
// Losses

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
log_softmax(const Eigen::MatrixBase<Derived> &logits) {
    using Scalar = typename Derived::Scalar;
    const Scalar mx = logits.maxCoeff();
    const auto shifted = (logits.array() - mx).eval();
    const Scalar lse = std::log(shifted.exp().sum());
    return (shifted - lse).matrix();
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
softmax(const Eigen::MatrixBase<Derived> &logits) {
    using Scalar = typename Derived::Scalar;
    const Scalar mx = logits.maxCoeff();
    const auto e = (logits.array() - mx).exp().eval();
    return (e / e.sum()).matrix();
}

template <typename Scalar = double>
struct LossResult {
    Scalar loss = 0;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grads;
};

template <typename Derived>
LossResult<typename Derived::Scalar>
cross_entropy_loss(const Eigen::MatrixBase<Derived> &logits, int label) {
    if (label < 0 || label >= logits.size()) {
        throw LabelError("label " + std::to_string(label) + " outside [0, " +
                         std::to_string(logits.size()) + ")");
    }
    LossResult<typename Derived::Scalar> out;
    out.loss = -log_softmax(logits)(label);
    out.grads = softmax(logits);
    out.grads(label) -= 1;
    return out;
}

struct DistillConfig {
    double temperature = 2.0;
    double alpha = 0.4;
};

/// alpha * CE(student, label) + (1 - alpha) * T^2 * KL(p_teacher || p_student)
/// with p = softmax(logits / T). At alpha = 1 the KL term is skipped entirely
/// and at alpha = 0 the CE term is, so both endpoints are exact.
template <typename SDerived, typename TDerived>
LossResult<typename SDerived::Scalar>
distillation_loss(const Eigen::MatrixBase<SDerived> &student,
                  const Eigen::MatrixBase<TDerived> &teacher, int label,
                  const DistillConfig &cfg) {
    using Scalar = typename SDerived::Scalar;
    if (student.size() != teacher.size()) {
        throw ShapeError("distillation_loss: student has " +
                         std::to_string(student.size()) + " logits, teacher " +
                         std::to_string(teacher.size()));
    }
    if (!(cfg.temperature > 0) || cfg.alpha < 0 || cfg.alpha > 1) {
        throw ConfigError("distillation needs T > 0 and alpha in [0, 1]");
    }
    const Scalar alpha = static_cast<Scalar>(cfg.alpha);
    const Scalar t = static_cast<Scalar>(cfg.temperature);

    LossResult<Scalar> out;
    out.grads = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(student.size());
    if (alpha != 0) {
        auto ce = cross_entropy_loss(student, label);
        if (alpha == 1) return ce;
        out.loss += alpha * ce.loss;
        out.grads += alpha * ce.grads;
    } else if (label < 0 || label >= student.size()) {
        throw LabelError("label " + std::to_string(label) + " out of range");
    }
    const auto log_ps = log_softmax((student / t).eval());
    const auto log_pt = log_softmax((teacher / t).eval());
    const auto pt = log_pt.array().exp().eval();
    const Scalar kl = (pt * (log_pt.array() - log_ps.array())).sum();
    const Scalar w = (1 - alpha) * t * t;
    out.loss += w * kl;
    // d(T^2 KL)/d student = T (p_s - p_t)
    out.grads += ((1 - alpha) * t) * (log_ps.array().exp() - pt).matrix();
    return out;
}

// ---------------------------------------------------------------------------
// Optimization

template <typename Scalar = double>
struct AdamState {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> first_moment;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> second_moment;
    long step_count = 0;
    Scalar lr = Scalar(1e-3);
    Scalar beta1 = Scalar(0.9);
    Scalar beta2 = Scalar(0.999);
    Scalar eps = Scalar(1e-8);
    Scalar weight_decay = 0;

    static AdamState for_size(Eigen::Index n, Scalar lr, Scalar weight_decay = 0) {
        AdamState s;
        s.first_moment = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
        s.second_moment = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
        s.lr = lr;
        s.weight_decay = weight_decay;
        return s;
    }
};

/// One bias-corrected Adam step with decoupled weight decay.
template <typename Scalar, typename GDerived>
void adam_update(AdamState<Scalar> &state,
                 Eigen::Ref<typename AdamState<Scalar>::Vector> params,
                 const Eigen::MatrixBase<GDerived> &grads) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        throw ShapeError("adam_update: misaligned params/grads/moments");
    }
    if (!grads.allFinite()) {
        throw NumericFault("adam_update: non-finite gradient");
    }
    state.step_count += 1;
    if (state.weight_decay > 0) {
        params -= (state.lr * state.weight_decay) * params;
    }
    state.first_moment = state.beta1 * state.first_moment + (1 - state.beta1) * grads;
    state.second_moment = state.beta2 * state.second_moment +
                          (1 - state.beta2) * grads.cwiseAbs2();
    const auto t = static_cast<Scalar>(state.step_count);
    const Scalar bc1 = 1 - std::pow(state.beta1, t);
    const Scalar bc2 = 1 - std::pow(state.beta2, t);
    params.array() -= state.lr * (state.first_moment.array() / bc1) /
                      ((state.second_moment.array() / bc2).sqrt() + state.eps);
}

/// base_lr * gamma^floor(epoch / step_size), accumulated by repeated
/// multiplication so that 1e-3 * 0.1 * 0.1 lands exactly on 1e-5.
inline double step_lr(double base_lr, int epoch, int step_size, double gamma) {
    if (step_size < 1) throw ConfigError("step_lr: step_size must be >= 1");
    double lr = base_lr;
    for (int k = 0; k < epoch / step_size; ++k) lr *= gamma;
    return lr;
}

}  // namespace qtl
