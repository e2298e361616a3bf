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
 * Experiment runner: seeded training of one head on a feature bundle, qubit
 * and depth sweeps, and the built-in verification suite.
 *
 * Configs are plain text, one `key = value` per line, `#` comments:
 *
 *   data.train             path to the training QTLB bundle
 *   data.eval              path to the evaluation QTLB bundle
 *   head.family            DQN | QPIE | AECQTL | PVCQTL_M | PVCQTL_V | EDQTL
 *   head.qubits            n                       (default 4)
 *   head.depth             d                       (default 2)
 *   head.locality          k, PVCQTL only          (default 1)
 *   head.hidden            pre-net hidden width    (default 128)
 *   head.classes           C                       (default: from bundle)
 *   head.feature_dim       D                       (default: from bundle)
 *   optimizer.lr           (default 1e-3)
 *   optimizer.weight_decay (default 1e-4 for DQN/QPIE/EDQTL, else 0)
 *   optimizer.batch_size   (default 32)
 *   optimizer.max_epochs   (default 80)
 *   optimizer.scheduler    on | off (default on for DQN/QPIE only)
 *   optimizer.step_size    (default 20)
 *   optimizer.gamma        (default 0.1)
 *   distill.temperature    (default 2.0, EDQTL)
 *   distill.alpha          (default 0.4, EDQTL)
 *   run.seeds              comma list (default 42,123,600)
 *   run.subset_total       class-balanced training subset size (optional)
 *   run.patience           epochs without eval improvement before stopping;
 *                          0 disables (default 15)
 *   run.output             CSV output path (optional)
 *   sweep.qubits           comma list (optional)
 *   sweep.depth            comma list (optional)
 *
 * Relative data paths resolve against the config file's directory.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtl/datasets.hpp"
#include "qtl/heads.hpp"
#include "qtl/metrics.hpp"

namespace qtl {

struct OptimizerConfig {
    double lr = 1e-3;
    std::optional<double> weight_decay;
    int batch_size = 32;
    int max_epochs = 80;
    std::optional<bool> scheduler;
    int step_size = 20;
    double gamma = 0.1;
};

struct ExperimentConfig {
    std::string train_path;
    std::string eval_path;
    /// num_classes / feature_dim of 0 mean "take from the training bundle".
    HeadConfig head{.num_classes = 0, .feature_dim = 0};
    OptimizerConfig optimizer;
    std::optional<DistillConfig> distill;
    std::vector<std::uint64_t> seeds{42, 123, 600};
    std::optional<std::size_t> subset_total;
    int patience = 15;
    std::string output;
    std::vector<int> sweep_qubits;
    std::vector<int> sweep_depths;

    [[nodiscard]] double effective_weight_decay() const;
    [[nodiscard]] bool effective_scheduler() const;
    [[nodiscard]] std::optional<DistillConfig> effective_distill() const;
};

/// Throws ConfigError on unknown keys or malformed values.
ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::string &base_dir = "");
ExperimentConfig load_experiment_config(const std::string &path);

/// Worker threads for per-sample evaluation, from QTL_THREADS (default 1).
int thread_count_from_env();

struct TrainingData {
    FeatureBundle train;
    FeatureBundle eval;
};

TrainingData load_training_data(const ExperimentConfig &config);

/// Per-epoch observer: (epoch, learning rate, eval accuracy).
using EpochObserver = std::function<void(int, double, double)>;

struct RunOptions {
    int threads = 1;
    EpochObserver on_epoch;
};

/// Trains one head for one seed and reports the best-eval-accuracy epoch.
RunReport run_experiment(const ExperimentConfig &config, std::uint64_t seed,
                         const TrainingData &data, const RunOptions &options = {});
RunReport run_experiment(const ExperimentConfig &config, std::uint64_t seed,
                         const RunOptions &options = {});

struct SweepSpec {
    ExperimentConfig base;
    std::vector<int> qubits;  // empty: base head.n_qubits
    std::vector<int> depths;  // empty: base head.depth
};

struct SweepResult {
    std::vector<AggregateReport> rows;  // qubit-major, then depth
    std::vector<RunReport> runs;
    std::vector<std::string> failures;  // "config_id seed N: message"
};

SweepResult run_sweep(const SweepSpec &spec, const TrainingData &data,
                      const RunOptions &options = {});
SweepResult run_sweep(const SweepSpec &spec, const RunOptions &options = {});

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifySummary {
    std::vector<VerifyCheck> checks;
    double seconds = 0;
    [[nodiscard]] bool all_passed() const;
};

/// Gradient routine under test; defaults to parameter_shift_gradient.
using GradientFn = std::function<Eigen::VectorXd(
    const CircuitProgramD &, const Eigen::VectorXd &, const StateVectorD &,
    const PauliString &)>;

VerifySummary self_verify(const GradientFn &gradient = {});

}  // namespace qtl
