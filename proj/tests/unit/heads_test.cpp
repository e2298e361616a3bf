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

#include "qtl/heads.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "qtl/errors.hpp"
#include "qtl/metrics.hpp"
#include "qtl/oracles.hpp"

using namespace qtl;

namespace {

constexpr Family kAllFamilies[] = {Family::DQN,      Family::QPIE,     Family::AECQTL,
                                   Family::PVCQTL_M, Family::PVCQTL_V, Family::EDQTL};

HeadConfig small_config(Family f, int n = 3, int d = 1, int k = 2) {
    HeadConfig h;
    h.family = f;
    h.n_qubits = n;
    h.depth = d;
    h.locality = k;
    h.num_classes = 3;
    h.feature_dim = f == Family::AECQTL ? (1 << n) : 8;
    h.hidden_dim = 6;
    h.seed = 19;
    return h;
}

Eigen::VectorXd gaussian(Eigen::Index n, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXd v(n);
    for (auto &x : v) x = g(rng);
    return v;
}

long binomial(int n, int k) {
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void expect_gradients_close(const Eigen::VectorXd &analytic, const Eigen::VectorXd &fd,
                            const char *what) {
    ASSERT_EQ(analytic.size(), fd.size()) << what;
    for (Eigen::Index k = 0; k < fd.size(); ++k) {
        EXPECT_LE(std::abs(analytic(k) - fd(k)), std::max(1e-4 * std::abs(fd(k)), 1e-7))
            << what << "[" << k << "]: " << analytic(k) << " vs " << fd(k);
    }
}

}  // namespace

TEST(HeadConfig, Validation) {
    auto ok = small_config(Family::DQN);
    EXPECT_NO_THROW(ok.validate());
    auto bad = ok;
    bad.n_qubits = 1;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = ok;
    bad.num_classes = 1;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = ok;
    bad.depth = -1;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = small_config(Family::AECQTL, 3);
    bad.feature_dim = 9;
    EXPECT_THROW(build_head(bad), ConfigError);
    bad = small_config(Family::PVCQTL_M, 3, 1, 4);
    EXPECT_THROW(build_head(bad), ConfigError);
    bad.locality = 0;
    EXPECT_THROW(build_head(bad), ConfigError);
}

TEST(Family, ParseNames) {
    EXPECT_EQ(parse_family("dqn"), Family::DQN);
    EXPECT_EQ(parse_family("PVCQTL-M"), Family::PVCQTL_M);
    EXPECT_EQ(parse_family("ae-cqtl"), Family::AECQTL);
    for (auto f : kAllFamilies) EXPECT_EQ(parse_family(family_name(f)), f);
    EXPECT_THROW(parse_family("resnet"), ConfigError);
}

TEST(BuildHead, ReferenceCounts) {
    HeadConfig h;
    h.family = Family::DQN;
    auto m = build_head(h);
    EXPECT_EQ(m.quantum_param_count(), 24);
    EXPECT_EQ(m.measurement_plan.size(), 4u);

    h.family = Family::AECQTL;
    h.n_qubits = 9;
    h.depth = 6;
    EXPECT_EQ(build_head(h).quantum_param_count(), 189);

    h.family = Family::PVCQTL_M;
    h.n_qubits = 4;
    h.locality = 2;
    m = build_head(h);
    EXPECT_EQ(m.measurement_plan.size(), 10u);
    EXPECT_EQ(m.quantum_param_count(), 0);
}

TEST(BuildHead, ParameterCountFormulasAcrossGrid) {
    for (auto f : kAllFamilies) {
        for (int n = 2; n <= 9; ++n) {
            for (int d = 0; d <= 6; ++d) {
                HeadConfig h = small_config(f, n, d, 1);
                h.hidden_dim = 2;
                const int want = f == Family::AECQTL     ? 3 * n * (d + 1)
                                 : f == Family::PVCQTL_M ? 0
                                 : f == Family::PVCQTL_V ? 3 * n
                                                         : 3 * n * d;
                const auto m = build_head(h);
                EXPECT_EQ(m.quantum_param_count(), want) << config_id(h);
                EXPECT_EQ(analytic_quantum_params(h), want);
                EXPECT_EQ(m.circuit.param_count - m.encoding_slots, want);
            }
        }
    }
}

TEST(BuildHead, MeasurementCardinality) {
    for (int n = 2; n <= 9; ++n) {
        for (int k = 1; k <= std::min(n, 3); ++k) {
            long want = 0;
            for (int j = 1; j <= k; ++j) want += binomial(n, j);
            long enumerated = 0;
            for (unsigned mask = 1; mask < (1u << n); ++mask) enumerated += std::popcount(mask) <= k;
            EXPECT_EQ(want, enumerated);
            const auto plan = z_strings_up_to_weight(n, k);
            EXPECT_EQ(static_cast<long>(plan.size()), want);
            HeadConfig h = small_config(Family::PVCQTL_V, n, 1, k);
            h.hidden_dim = 2;
            EXPECT_EQ(static_cast<long>(build_head(h).measurement_plan.size()), want);
            EXPECT_EQ(analytic_measurement_count(h), want);
        }
        HeadConfig h = small_config(Family::DQN, n);
        EXPECT_EQ(static_cast<int>(build_head(h).measurement_plan.size()), n);
    }
}

TEST(BuildHead, MeasurementOrder) {
    const auto plan = z_strings_up_to_weight(3, 2);
    std::vector<std::string> got;
    for (const auto &p : plan) got.push_back(p.to_string());
    EXPECT_EQ(got, (std::vector<std::string>{"ZII", "IZI", "IIZ", "ZZI", "ZIZ", "IZZ"}));
}

TEST(BuildHead, Deterministic) {
    for (auto f : kAllFamilies) {
        const auto a = build_head(small_config(f));
        const auto b = build_head(small_config(f));
        EXPECT_EQ(a.classical_params(), b.classical_params());
        EXPECT_EQ(a.quantum_params, b.quantum_params);
    }
}

TEST(BuildHead, InitRanges) {
    const auto m = build_head(small_config(Family::DQN, 4, 2));
    EXPECT_LE(m.quantum_params.cwiseAbs().maxCoeff(), std::numbers::pi);
    EXPECT_LE(m.pre_net[0].weights.cwiseAbs().maxCoeff(), 1 / std::sqrt(8.0));
    EXPECT_LE(m.pre_net[1].weights.cwiseAbs().maxCoeff(), 1 / std::sqrt(6.0));
}

TEST(HeadForward, ZeroAnglesGiveAllOnes) {
    auto m = build_head(small_config(Family::DQN, 4, 2));
    m.set_quantum_params(Eigen::VectorXd::Zero(m.quantum_param_count()));
    // Zero the last pre-net layer so every encoding angle is tanh(0) = 0.
    Eigen::VectorXd theta = m.classical_params();
    const auto first = m.pre_net[0].param_count();
    theta.segment(first, m.pre_net[1].param_count()).setZero();
    m.set_classical_params(theta);
    const auto fwd = head_forward(m, Eigen::VectorXd::Ones(8));
    EXPECT_EQ(fwd.cache.z, Eigen::VectorXd::Ones(4));
    EXPECT_NEAR((fwd.logits - dense_forward(m.readout[0], Eigen::VectorXd::Ones(4)))
                    .cwiseAbs()
                    .maxCoeff(),
                0.0, 1e-15);
}

TEST(HeadForward, AmplitudeBasisInputAtDepthZero) {
    auto m = build_head(small_config(Family::AECQTL, 4, 0));
    m.set_quantum_params(Eigen::VectorXd::Zero(m.quantum_param_count()));
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(16);
    e0(0) = 1;
    EXPECT_EQ(head_forward(m, e0).cache.z, Eigen::VectorXd::Ones(4));
}

TEST(HeadForward, MatchesDensePipelineOracle) {
    std::mt19937_64 rng(23);
    const auto m = build_head(small_config(Family::DQN, 3, 1));
    for (int trial = 0; trial < 5; ++trial) {
        const auto x = gaussian(8, rng);
        // Classical part recomputed by hand.
        Eigen::VectorXd h = m.pre_net[0].weights * x + m.pre_net[0].bias;
        h = h.cwiseMax(0.0);
        Eigen::VectorXd u = m.pre_net[1].weights * h + m.pre_net[1].bias;
        Eigen::VectorXd angles(3);
        for (int q = 0; q < 3; ++q) angles(q) = std::tanh(u(q)) * std::numbers::pi / 2;
        // Circuit rebuilt gate by gate from the family description.
        oracle::ComplexMatrix U = oracle::ComplexMatrix::Identity(8, 8);
        auto apply = [&](const GateOpD &g, double a) { U = oracle::gate_unitary(3, g, a) * U; };
        for (int q = 0; q < 3; ++q) apply(GateOpD::ry(q, 0), angles(q));
        int k = 0;
        for (int q = 0; q < 3; ++q) {
            apply(GateOpD::rx(q, 0), m.quantum_params(k++));
            apply(GateOpD::ry(q, 0), m.quantum_params(k++));
            apply(GateOpD::rz(q, 0), m.quantum_params(k++));
        }
        for (int q = 0; q < 3; ++q) apply(GateOpD::cnot(q, (q + 1) % 3), 0);
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
        psi(0) = 1;
        psi = U * psi;
        const auto fwd = head_forward(m, x);
        for (int q = 0; q < 3; ++q) {
            const double want = oracle::quadratic_form(
                psi, oracle::observable_matrix(PauliString::z_on(3, {q})));
            EXPECT_NEAR(fwd.cache.z(q), want, 1e-10);
        }
        EXPECT_EQ(head_measurements(m, x), fwd.cache.z);
    }
}

TEST(HeadForward, ShapeError) {
    const auto m = build_head(small_config(Family::DQN));
    EXPECT_THROW(head_forward(m, Eigen::VectorXd::Ones(7)), ShapeError);
}

TEST(HeadBackward, ZeroUpstreamGivesZeroGrads) {
    for (auto f : kAllFamilies) {
        const auto m = build_head(small_config(f));
        std::mt19937_64 rng(1);
        const auto fwd = head_forward(m, gaussian(m.config.feature_dim, rng));
        const auto g = head_backward(m, fwd.cache, Eigen::VectorXd::Zero(3));
        EXPECT_EQ(g.classical.cwiseAbs().sum(), 0.0);
        EXPECT_EQ(g.quantum.cwiseAbs().sum(), 0.0);
    }
}

TEST(HeadBackward, PostVariationalModifiedHasNoQuantumGrads) {
    const auto m = build_head(small_config(Family::PVCQTL_M));
    std::mt19937_64 rng(2);
    const auto step = train_ce_step(m, gaussian(8, rng), 0);
    EXPECT_EQ(step.grads.quantum.size(), 0);
    EXPECT_GT(step.grads.classical.cwiseAbs().sum(), 0.0);
}

TEST(HeadBackward, StaleCacheRejected) {
    auto m = build_head(small_config(Family::DQN));
    std::mt19937_64 rng(3);
    const auto fwd = head_forward(m, gaussian(8, rng));
    m.set_quantum_params(m.quantum_params);
    EXPECT_THROW(head_backward(m, fwd.cache, Eigen::VectorXd::Ones(3)), InvalidCacheError);
    const auto other = build_head(small_config(Family::DQN));
    EXPECT_THROW(head_backward(other, fwd.cache, Eigen::VectorXd::Ones(3)), InvalidCacheError);
}

TEST(HeadBackward, EveryFamilyMatchesFiniteDifferences) {
    std::mt19937_64 rng(4);
    for (auto f : kAllFamilies) {
        for (int n : {2, 3, 4}) {
            for (int d : {0, 1, 2}) {
                const auto cfg = small_config(f, n, d, std::min(n, 2));
                const auto m = build_head(cfg);
                const auto x = gaussian(cfg.feature_dim, rng);
                const int label = static_cast<int>(rng() % 3);
                const auto step = train_ce_step(m, x, label);
                const auto fd = oracle::finite_difference_loss_gradient(m, x, label, 1e-5);
                SCOPED_TRACE(config_id(cfg));
                expect_gradients_close(step.grads.classical, fd.classical, "classical");
                expect_gradients_close(step.grads.quantum, fd.quantum, "quantum");
            }
        }
    }
}

TEST(EdqtlStep, DistillationGradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(5);
    const auto m = build_head(small_config(Family::EDQTL, 4, 2));
    const auto x = gaussian(8, rng);
    const Eigen::VectorXd teacher = gaussian(3, rng);
    const DistillConfig cfg{2.0, 0.4};
    const auto step = train_edqtl_step(m, x, 1, {teacher}, cfg);
    const auto fd = oracle::finite_difference_loss_gradient(m, x, 1, 1e-5, &teacher, cfg);
    expect_gradients_close(step.grads.classical, fd.classical, "classical");
    expect_gradients_close(step.grads.quantum, fd.quantum, "quantum");
}

TEST(EdqtlStep, AlphaOneEqualsCrossEntropyStep) {
    std::mt19937_64 rng(6);
    const auto m = build_head(small_config(Family::EDQTL));
    const auto x = gaussian(8, rng);
    const auto ce = train_ce_step(m, x, 2);
    const auto ed = train_edqtl_step(m, x, 2, {gaussian(3, rng)}, {2.0, 1.0});
    EXPECT_EQ(ce.loss, ed.loss);
    EXPECT_EQ(ce.grads.classical, ed.grads.classical);
    EXPECT_EQ(ce.grads.quantum, ed.grads.quantum);
}

TEST(EdqtlStep, TeacherEqualsStudent) {
    std::mt19937_64 rng(7);
    const auto m = build_head(small_config(Family::EDQTL));
    const auto x = gaussian(8, rng);
    const auto logits = head_forward(m, x).logits;
    const auto ed = train_edqtl_step(m, x, 0, {logits}, {2.0, 0.4});
    EXPECT_NEAR(ed.loss, 0.4 * train_ce_step(m, x, 0).loss, 1e-12);
}

TEST(EdqtlStep, LossCompositionOracle) {
    std::mt19937_64 rng(8);
    const auto m = build_head(small_config(Family::EDQTL));
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = gaussian(8, rng);
        const Eigen::VectorXd teacher = gaussian(3, rng);
        const auto s = head_forward(m, x).logits;
        const double t = 2.0, a = 0.4;
        double zs = 0, zt = 0, z1 = 0;
        for (int k = 0; k < 3; ++k) {
            zs += std::exp(s(k) / t);
            zt += std::exp(teacher(k) / t);
            z1 += std::exp(s(k));
        }
        double kl = 0;
        for (int k = 0; k < 3; ++k) {
            const double pt = std::exp(teacher(k) / t) / zt;
            kl += pt * std::log(pt / (std::exp(s(k) / t) / zs));
        }
        const double ce = -std::log(std::exp(s(1)) / z1);
        EXPECT_NEAR(train_edqtl_step(m, x, 1, {teacher}, {t, a}).loss,
                    a * ce + (1 - a) * t * t * kl, 1e-10);
    }
}

TEST(EdqtlStep, TeacherErrors) {
    const auto m = build_head(small_config(Family::EDQTL));
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(8);
    EXPECT_THROW(train_edqtl_step(m, x, 0, {Eigen::VectorXd()}, {}), DataError);
    EXPECT_THROW(train_edqtl_step(m, x, 0, {Eigen::VectorXd::Ones(2)}, {}), ShapeError);
}

TEST(Teachers, Average) {
    const auto avg = average_teachers({Eigen::Vector2d(1, 3), Eigen::Vector2d(3, -1)});
    EXPECT_EQ(avg.logits, Eigen::Vector2d(2, 1));
    EXPECT_THROW(average_teachers({}), DataError);
}

TEST(HybridModel, PredictionInvariantToLogitShift) {
    std::mt19937_64 rng(9);
    const auto m = build_head(small_config(Family::QPIE));
    for (int trial = 0; trial < 20; ++trial) {
        const auto logits = head_forward(m, gaussian(8, rng)).logits;
        Eigen::Index a = 0, b = 0;
        logits.maxCoeff(&a);
        Eigen::VectorXd(logits.array() + 123.0).maxCoeff(&b);
        EXPECT_EQ(a, b);
    }
}

TEST(HybridModel, ParamFlattenRoundTrip) {
    auto m = build_head(small_config(Family::QPIE, 3, 2));
    EXPECT_EQ(m.classical_param_count(), (8 * 6 + 6) + (6 * 9 + 9) + (3 * 3 + 3));
    Eigen::VectorXd theta = m.classical_params();
    theta(0) = 0.125;
    m.set_classical_params(theta);
    EXPECT_EQ(m.pre_net[0].weights(0, 0), 0.125);
    EXPECT_EQ(m.classical_params(), theta);
    EXPECT_THROW(m.set_classical_params(Eigen::VectorXd::Zero(3)), ShapeError);
    EXPECT_THROW(m.set_quantum_params(Eigen::VectorXd::Zero(3)), ShapeError);
}

TEST(Checkpoint, RoundTripBitExact) {
    for (auto f : kAllFamilies) {
        const auto m = build_head(small_config(f));
        const auto bytes = encode_checkpoint(m);
        const auto back = decode_checkpoint(bytes);
        EXPECT_EQ(back.config, m.config);
        EXPECT_EQ(back.classical_params(), m.classical_params());
        EXPECT_EQ(back.quantum_params, m.quantum_params);
        EXPECT_EQ(encode_checkpoint(back), bytes);
    }
}

TEST(Checkpoint, FileRoundTripAndCorruption) {
    const auto m = build_head(small_config(Family::DQN));
    const auto path = (std::filesystem::temp_directory_path() / "qtl_ckpt_test.qtlc").string();
    save_checkpoint(m, path);
    EXPECT_EQ(load_checkpoint(path).quantum_params, m.quantum_params);
    std::filesystem::remove(path);

    auto bytes = encode_checkpoint(m);
    EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), CorruptionError);
    EXPECT_THROW(decode_checkpoint(bytes + "x"), CorruptionError);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_checkpoint(bad_magic), FormatError);
    auto bad_version = bytes;
    bad_version[4] = 9;
    EXPECT_THROW(decode_checkpoint(bad_version), FormatError);
}
