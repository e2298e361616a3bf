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
 * Slow, independent reference implementations used to check the fast paths:
 * full 2^n x 2^n unitaries built from Kronecker products, diagonal observable
 * matrices, brute-force metric counting, and finite-difference loss gradients.
 * Nothing here calls the simulator kernels.
 */

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "qtl/heads.hpp"
#include "qtl/statevector.hpp"

namespace qtl::oracle {

using ComplexMatrix = Eigen::MatrixXcd;

/// Full-register unitary of one gate with rotation angle `angle`.
ComplexMatrix gate_unitary(int n_qubits, const GateOpD &gate, double angle);

/// Product of gate unitaries in program order.
ComplexMatrix program_unitary(const CircuitProgramD &program, const Eigen::VectorXd &params);

/// Dense matrix of a Z-type Pauli string.
ComplexMatrix observable_matrix(const PauliString &observable);

/// <psi|M|psi> by explicit quadratic form.
double quadratic_form(const Eigen::VectorXcd &psi, const ComplexMatrix &m);

/// Random program mixing every gate kind. About `param_fraction` of the
/// rotations are bound to slots; the rest carry fixed angles. Every slot is
/// referenced.
CircuitProgramD random_program(int n_qubits, int n_gates, std::mt19937_64 &rng,
                               double param_fraction = 0.5);

/// Random normalized state from a Gaussian draw.
StateVectorD random_state(int n_qubits, std::mt19937_64 &rng);

struct CountedMetrics {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

/// Macro metrics from an explicitly tabulated confusion matrix.
CountedMetrics counted_metrics(std::span<const int> predictions,
                               std::span<const int> labels, int num_classes);

/// Concordant-pair fraction with ties counted as 1/2.
double all_pairs_auc(std::span<const double> scores, std::span<const bool> positive);

/// One-vs-rest macro over present classes; binary uses column 1.
double all_pairs_auc_ovr(const Eigen::MatrixXd &scores, std::span<const int> labels,
                         int num_classes);

/// Central finite-difference gradient of the loss of one sample with respect
/// to classical then quantum parameters. The loss is cross-entropy, or the
/// distillation blend when `teacher_logits` is given.
struct LossGradient {
    Eigen::VectorXd classical;
    Eigen::VectorXd quantum;
};
LossGradient finite_difference_loss_gradient(const HybridModel &model,
                                             const Eigen::VectorXd &features, int label,
                                             double epsilon,
                                             const Eigen::VectorXd *teacher_logits = nullptr,
                                             const DistillConfig &cfg = {});

}  // namespace qtl::oracle
