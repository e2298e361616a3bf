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
 * Hybrid quantum-classical classification heads.
 *
 * Every head is a pipeline
 *
 *   features -> pre-net -> encoding -> ansatz -> measurement -> readout
 *
 * built for one of six families. Angle-encoded families map pre-net outputs u
 * to angles (pi/2) tanh(u); the amplitude-encoded family loads the feature
 * vector directly and has no pre-net.
 *
 * | family   | encoding           | ansatz                               | measured           | theta_q   |
 * |----------|--------------------|--------------------------------------|--------------------|-----------|
 * | DQN      | RY per qubit       | d x [RX RY RZ per qubit, CNOT ring]  | Z_i                | 3nd       |
 * | QPIE     | RX RY RZ per qubit | same as DQN                          | Z_i                | 3nd       |
 * | AECQTL   | amplitudes         | d x [H, RX RY RZ, CNOT ring] + RX RY RZ | Z_i             | 3n(d+1)   |
 * | PVCQTL_M | RY per qubit       | CZ ring                              | Z strings, wt <= k | 0         |
 * | PVCQTL_V | RY per qubit       | CZ ring, RX RY RZ, CZ ring           | Z strings, wt <= k | 3n        |
 * | EDQTL    | as DQN             | as DQN                               | Z_i                | 3nd       |
 *
 * Rings connect qubit i to (i + 1) mod n for i = 0..n-1.
 */

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtl/diffgrad.hpp"
#include "qtl/nn.hpp"
#include "qtl/statevector.hpp"

namespace qtl {

enum class Family : std::uint16_t {
    DQN = 1,
    QPIE = 2,
    AECQTL = 3,
    PVCQTL_M = 4,
    PVCQTL_V = 5,
    EDQTL = 6,
};

std::string family_name(Family family);
/// Accepts canonical names ("DQN", "PVCQTL_M", ...) case-insensitively, and
/// the hyphenated long forms ("DQN-QTL", "AE-CQTL", "ED-QTL").
Family parse_family(std::string_view name);

constexpr bool is_pvcqtl(Family f) {
    return f == Family::PVCQTL_M || f == Family::PVCQTL_V;
}
constexpr bool is_angle_encoded(Family f) { return f != Family::AECQTL; }

/// Scale applied to tanh pre-net outputs before angle encoding.
inline constexpr double kAngleScale = std::numbers::pi / 2;

struct HeadConfig {
    Family family = Family::DQN;
    int n_qubits = 4;
    int depth = 2;
    int locality = 1;
    int num_classes = 2;
    int feature_dim = 512;
    int hidden_dim = 128;
    std::uint64_t seed = 42;

    /// Throws ConfigError when the config violates a family constraint.
    void validate() const;

    friend bool operator==(const HeadConfig &, const HeadConfig &) = default;
};

/// Analytic count of trainable circuit angles for a config.
int analytic_quantum_params(const HeadConfig &config);
/// Number of measured observables m.
int analytic_measurement_count(const HeadConfig &config);

/// All Z strings of weight 1..k on n qubits, by weight then lexicographic
/// subset order.
std::vector<PauliString> z_strings_up_to_weight(int n_qubits, int max_weight);

struct HybridModel {
    HeadConfig config;
    std::vector<DenseLayer<double>> pre_net;
    CircuitProgramD circuit;
    /// Slots [0, encoding_slots) are bound to pre-net outputs at forward time;
    /// slots [encoding_slots, param_count) are theta_q.
    int encoding_slots = 0;
    std::vector<PauliString> measurement_plan;
    std::vector<DenseLayer<double>> readout;
    Eigen::VectorXd quantum_params;
    /// Bumped on every parameter write; forward caches record it.
    std::uint64_t revision = 0;

    [[nodiscard]] Eigen::Index classical_param_count() const;
    [[nodiscard]] Eigen::Index quantum_param_count() const {
        return quantum_params.size();
    }
    [[nodiscard]] Eigen::Index total_param_count() const {
        return classical_param_count() + quantum_param_count();
    }

    /// Pre-net layers then readout layers; each layer is W row-major, then b.
    [[nodiscard]] Eigen::VectorXd classical_params() const;
    void set_classical_params(const Eigen::VectorXd &flat);
    void set_quantum_params(const Eigen::VectorXd &theta);
};

HybridModel build_head(const HeadConfig &config);

/// Intermediate values retained by head_forward for head_backward.
struct HeadCache {
    const HybridModel *model = nullptr;
    std::uint64_t revision = 0;
    std::vector<Eigen::VectorXd> pre_inputs;  // input of each pre-net layer
    Eigen::VectorXd pre_output;               // tanh outputs (angle families)
    Eigen::VectorXd circuit_params;           // encoding angles then theta_q
    std::optional<StateVectorD> input_state;  // state fed to the circuit
    std::optional<StateVectorD> final_state;
    Eigen::VectorXd z;
    std::vector<Eigen::VectorXd> readout_inputs;
};

struct ForwardResult {
    Eigen::VectorXd logits;
    HeadCache cache;
};

ForwardResult head_forward(const HybridModel &model, const Eigen::VectorXd &features);

/// Measurement vector z only; skips building a cache.
Eigen::VectorXd head_measurements(const HybridModel &model,
                                  const Eigen::VectorXd &features);

struct HeadGradients {
    Eigen::VectorXd classical;  // aligned with HybridModel::classical_params()
    Eigen::VectorXd quantum;    // aligned with HybridModel::quantum_params
    GradientTape<double> tape;  // full slot gradient of the loss and dz/dslot
};

HeadGradients head_backward(const HybridModel &model, const HeadCache &cache,
                            const Eigen::VectorXd &logit_grads);

struct TeacherEnsembleOutput {
    Eigen::VectorXd logits;
};

/// Arithmetic mean of individual teacher logit vectors.
TeacherEnsembleOutput average_teachers(const std::vector<Eigen::VectorXd> &teachers);

struct StepResult {
    double loss = 0;
    Eigen::VectorXd logits;
    HeadGradients grads;
};

StepResult train_ce_step(const HybridModel &model, const Eigen::VectorXd &features,
                         int label);

StepResult train_edqtl_step(const HybridModel &model, const Eigen::VectorXd &features,
                            int label, const TeacherEnsembleOutput &teacher,
                            const DistillConfig &cfg);

// Checkpoints: "QTLC", u16 version, u16 family tag, u32 n_qubits, u32 depth,
// u32 locality, u32 num_classes, u32 feature_dim, u32 hidden_dim, u64 seed,
// u64 |theta_c|, u64 |theta_q|, then theta_c and theta_q as little-endian f64.
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::string encode_checkpoint(const HybridModel &model);
HybridModel decode_checkpoint(std::string_view bytes);
void save_checkpoint(const HybridModel &model, const std::string &path);
HybridModel load_checkpoint(const std::string &path);

}  // namespace qtl
