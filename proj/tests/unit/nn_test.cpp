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

#include "qtl/nn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qtl/errors.hpp"

using namespace qtl;
using Layer = DenseLayer<double>;

namespace {

Eigen::VectorXd gaussian(Eigen::Index n, std::mt19937_64 &rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Eigen::VectorXd v(n);
    for (auto &x : v) x = g(rng);
    return v;
}

// Softened KL(teacher || student) by direct summation, no shared helpers.
double direct_kl(const Eigen::VectorXd &student, const Eigen::VectorXd &teacher, double t) {
    double zs = 0, zt = 0;
    for (Eigen::Index k = 0; k < student.size(); ++k) {
        zs += std::exp(student(k) / t);
        zt += std::exp(teacher(k) / t);
    }
    double kl = 0;
    for (Eigen::Index k = 0; k < student.size(); ++k) {
        const double ps = std::exp(student(k) / t) / zs;
        const double pt = std::exp(teacher(k) / t) / zt;
        kl += pt * std::log(pt / ps);
    }
    return kl;
}

double direct_ce(const Eigen::VectorXd &logits, int label) {
    double z = 0;
    for (double x : logits) z += std::exp(x);
    return -std::log(std::exp(logits(label)) / z);
}

}  // namespace

TEST(DenseForward, IdentityLayer) {
    Layer l{Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), Activation::None};
    Eigen::Vector3d x(0.5, -2, 7);
    EXPECT_EQ(dense_forward(l, x), Eigen::VectorXd(x));
    EXPECT_EQ(l.param_count(), 12);
}

TEST(DenseForward, TanhClosedForm) {
    Layer l{Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Zero(1), Activation::Tanh};
    EXPECT_NEAR(dense_forward(l, Eigen::Vector2d(0.5, 0.5))(0), 0.7615941559557649, 1e-15);
}

TEST(DenseForward, MatchesRowDotOracle) {
    std::mt19937_64 rng(1);
    auto l = Layer::uniform_init(512, 128, Activation::Relu, rng);
    const auto x = gaussian(512, rng);
    const auto y = dense_forward(l, x);
    for (int r = 0; r < 128; ++r) {
        double acc = l.bias(r);
        for (int c = 0; c < 512; ++c) acc += l.weights(r, c) * x(c);
        EXPECT_NEAR(y(r), std::max(acc, 0.0), 1e-12);
    }
}

TEST(DenseForward, ShapeError) {
    Layer l{Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Zero(2), Activation::None};
    EXPECT_THROW(dense_forward(l, Eigen::Vector2d(1, 1)), ShapeError);
    EXPECT_THROW(dense_backward(l, Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, 1, 1)),
                 ShapeError);
}

TEST(DenseInit, BoundsAndDeterminism) {
    std::mt19937_64 a(9), b(9);
    auto la = Layer::uniform_init(16, 4, Activation::Tanh, a);
    auto lb = Layer::uniform_init(16, 4, Activation::Tanh, b);
    EXPECT_EQ(la.weights, lb.weights);
    EXPECT_EQ(la.bias, lb.bias);
    EXPECT_LE(la.weights.cwiseAbs().maxCoeff(), 0.25);
    EXPECT_LE(la.bias.cwiseAbs().maxCoeff(), 0.25);
}

TEST(DenseBackward, LinearCase) {
    std::mt19937_64 rng(2);
    auto l = Layer::uniform_init(4, 3, Activation::None, rng);
    const auto x = gaussian(4, rng);
    const Eigen::Vector3d e0(1, 0, 0);
    const auto g = dense_backward(l, x, e0);
    EXPECT_EQ(Eigen::VectorXd(g.weights.row(0).transpose()), x);
    EXPECT_EQ(g.weights.bottomRows(2).cwiseAbs().sum(), 0.0);
    EXPECT_EQ(g.bias, Eigen::VectorXd(e0));
}

TEST(DenseBackward, TanhAtZeroIsLinear) {
    Layer tanh_layer{Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2), Activation::Tanh};
    Layer linear = tanh_layer;
    linear.activation = Activation::None;
    const Eigen::Vector2d x(0.3, -0.8), up(1.5, -0.5);
    const auto a = dense_backward(tanh_layer, x, up);
    const auto b = dense_backward(linear, x, up);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.bias, b.bias);
    EXPECT_EQ(a.input, b.input);
}

TEST(DenseBackward, MatchesFiniteDifferences) {
    std::mt19937_64 rng(3);
    for (auto act : {Activation::None, Activation::Relu, Activation::Tanh}) {
        auto l = Layer::uniform_init(5, 4, act, rng);
        const auto x = gaussian(5, rng);
        const auto probe = gaussian(4, rng);  // loss = probe . forward(x)
        const auto g = dense_backward(l, x, probe);
        const double eps = 1e-5;
        auto loss = [&](const Layer &m, const Eigen::VectorXd &in) {
            return probe.dot(dense_forward(m, in));
        };
        auto check = [](double analytic, double fd) {
            EXPECT_LE(std::abs(analytic - fd), std::max(1e-5 * std::abs(fd), 1e-8));
        };
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 5; ++c) {
                Layer up = l, down = l;
                up.weights(r, c) += eps;
                down.weights(r, c) -= eps;
                check(g.weights(r, c), (loss(up, x) - loss(down, x)) / (2 * eps));
            }
            Layer up = l, down = l;
            up.bias(r) += eps;
            down.bias(r) -= eps;
            check(g.bias(r), (loss(up, x) - loss(down, x)) / (2 * eps));
        }
        for (int c = 0; c < 5; ++c) {
            Eigen::VectorXd xp = x, xm = x;
            xp(c) += eps;
            xm(c) -= eps;
            check(g.input(c), (loss(l, xp) - loss(l, xm)) / (2 * eps));
        }
    }
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto z = gaussian(2 + trial % 9, rng, 5.0);
        const auto p = softmax(z);
        EXPECT_NEAR(p.sum(), 1.0, 1e-12);
        for (double shift : {1000.0, -1000.0}) {
            const Eigen::VectorXd zs = (z.array() + shift).matrix();
            const auto ps = softmax(zs);
            EXPECT_TRUE(ps.allFinite());
            EXPECT_NEAR(ps.sum(), 1.0, 1e-12);
            EXPECT_LE((ps - p).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(CrossEntropy, Examples) {
    EXPECT_NEAR(cross_entropy_loss(Eigen::Vector2d(0, 0), 0).loss, std::log(2.0), 1e-15);
    EXPECT_LE(cross_entropy_loss(Eigen::Vector2d(100, 0), 0).loss, 1e-10);
    EXPECT_THROW(cross_entropy_loss(Eigen::Vector2d(0, 0), 2), LabelError);
    EXPECT_THROW(cross_entropy_loss(Eigen::Vector2d(0, 0), -1), LabelError);
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(5);
    const auto z = gaussian(10, rng, 2.0);
    const auto r = cross_entropy_loss(z, 7);
    EXPECT_NEAR(r.loss, direct_ce(z, 7), 1e-12);
    const double eps = 1e-5;
    for (int k = 0; k < 10; ++k) {
        Eigen::VectorXd up = z, down = z;
        up(k) += eps;
        down(k) -= eps;
        const double fd =
            (cross_entropy_loss(up, 7).loss - cross_entropy_loss(down, 7).loss) / (2 * eps);
        EXPECT_NEAR(r.grads(k), fd, 1e-6);
    }
}

TEST(Distillation, AlphaOneIsCrossEntropyExactly) {
    std::mt19937_64 rng(6);
    const auto s = gaussian(3, rng), t = gaussian(3, rng);
    const auto ce = cross_entropy_loss(s, 1);
    const auto d = distillation_loss(s, t, 1, {2.0, 1.0});
    EXPECT_EQ(d.loss, ce.loss);
    EXPECT_EQ(d.grads, ce.grads);
}

TEST(Distillation, IdenticalLogitsLeaveOnlyCrossEntropy) {
    std::mt19937_64 rng(7);
    const auto s = gaussian(4, rng);
    const DistillConfig cfg{2.0, 0.4};
    const auto d = distillation_loss(s, s, 2, cfg);
    EXPECT_NEAR(d.loss, 0.4 * cross_entropy_loss(s, 2).loss, 1e-12);
}

TEST(Distillation, AlphaZeroDropsCrossEntropy) {
    std::mt19937_64 rng(8);
    const auto s = gaussian(3, rng), t = gaussian(3, rng);
    const auto d = distillation_loss(s, t, 0, {3.0, 0.0});
    EXPECT_NEAR(d.loss, 9.0 * direct_kl(s, t, 3.0), 1e-12);
}

TEST(Distillation, MatchesDirectKlOracle) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = gaussian(2, rng, 3.0), t = gaussian(2, rng, 3.0);
        const int label = trial % 2;
        const DistillConfig cfg{2.0, 0.4};
        const double want = 0.4 * direct_ce(s, label) + 0.6 * 4.0 * direct_kl(s, t, 2.0);
        EXPECT_NEAR(distillation_loss(s, t, label, cfg).loss, want, 1e-10);
    }
}

TEST(Distillation, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(10);
    const auto s = gaussian(5, rng), t = gaussian(5, rng);
    const DistillConfig cfg{2.0, 0.4};
    const auto r = distillation_loss(s, t, 3, cfg);
    const double eps = 1e-5;
    for (int k = 0; k < 5; ++k) {
        Eigen::VectorXd up = s, down = s;
        up(k) += eps;
        down(k) -= eps;
        const double fd = (distillation_loss(up, t, 3, cfg).loss -
                           distillation_loss(down, t, 3, cfg).loss) /
                          (2 * eps);
        EXPECT_LE(std::abs(r.grads(k) - fd), std::max(1e-5 * std::abs(fd), 1e-9));
    }
}

TEST(Distillation, Errors) {
    const Eigen::Vector2d s(0, 1);
    EXPECT_THROW(distillation_loss(s, Eigen::Vector3d(0, 1, 2), 0, {}), ShapeError);
    EXPECT_THROW(distillation_loss(s, s, 0, {0.0, 0.4}), ConfigError);
    EXPECT_THROW(distillation_loss(s, s, 0, {2.0, 1.5}), ConfigError);
    EXPECT_THROW(distillation_loss(s, s, 5, {2.0, 0.0}), LabelError);
}

TEST(Adam, ZeroGradientIsIdentity) {
    auto st = AdamState<double>::for_size(3, 1e-3);
    Eigen::VectorXd p(3);
    p << 1, -2, 3;
    const Eigen::VectorXd before = p;
    for (int i = 0; i < 5; ++i) adam_update(st, p, Eigen::VectorXd::Zero(3));
    EXPECT_EQ(p, before);
    EXPECT_EQ(st.step_count, 5);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
    auto st = AdamState<double>::for_size(3, 1e-3);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
    adam_update(st, p, Eigen::Vector3d(0.5, -20, 3e-3));
    EXPECT_NEAR(p(0), -1e-3, 1e-10);
    EXPECT_NEAR(p(1), 1e-3, 1e-10);
    EXPECT_NEAR(p(2), -1e-3, 1e-8);
}

TEST(Adam, MatchesHandRolledLoopOnQuadratic) {
    // f(x) = 0.5 * a * (x - b)^2
    const double a = 3.0, b = 1.7;
    auto st = AdamState<double>::for_size(1, 0.05, 0.01);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, -0.4);

    double rx = -0.4, m = 0, v = 0;
    const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 0.01;
    for (int t = 1; t <= 5; ++t) {
        adam_update(st, x, Eigen::VectorXd::Constant(1, a * (x(0) - b)));

        const double g = a * (rx - b);
        rx = rx - lr * wd * rx;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, t));
        const double vh = v / (1 - std::pow(b2, t));
        rx = rx - lr * mh / (std::sqrt(vh) + eps);
        EXPECT_NEAR(x(0), rx, 1e-12) << "step " << t;
    }
}

TEST(Adam, Errors) {
    auto st = AdamState<double>::for_size(2, 1e-3);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
    EXPECT_THROW(adam_update(st, p, Eigen::VectorXd::Zero(3)), ShapeError);
    EXPECT_THROW(adam_update(st, p, Eigen::Vector2d(std::nan(""), 0)), NumericFault);
    EXPECT_THROW(adam_update(st, p, Eigen::Vector2d(INFINITY, 0)), NumericFault);
}

TEST(StepLr, Schedule) {
    EXPECT_EQ(step_lr(1e-3, 0, 20, 0.1), 1e-3);
    EXPECT_EQ(step_lr(1e-3, 19, 20, 0.1), 1e-3);
    EXPECT_EQ(step_lr(1e-3, 20, 20, 0.1), 1e-4);
    EXPECT_EQ(step_lr(1e-3, 40, 20, 0.1), 1e-5);
    for (int e = 0; e < 100; e += 7) EXPECT_EQ(step_lr(0.01, e, 3, 1.0), 0.01);
    EXPECT_THROW(step_lr(1e-3, 1, 0, 0.1), ConfigError);
}
