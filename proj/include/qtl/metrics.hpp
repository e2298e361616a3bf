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
 * Predictive metrics, seed aggregation and the per-run cost ledger.
 *
 * Precision, recall and F1 are macro averages over all C classes, with 0/0
 * taken as 0. ROC-AUC is the one-vs-rest macro average of Mann-Whitney AUCs
 * with midrank ties; binary tasks score the positive class directly.
 */

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qtl/heads.hpp"

namespace qtl {

struct ClassificationMetrics {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

ClassificationMetrics classification_metrics(std::span<const int> predictions,
                                             std::span<const int> labels,
                                             int num_classes);

/// Mann-Whitney AUC of `scores` for the positive set marked by `positive`.
double binary_auc(std::span<const double> scores, std::span<const bool> positive);

/// `scores` is N x C with rows summing to 1 (within 1e-6).
double roc_auc_ovr(const Eigen::MatrixXd &scores, std::span<const int> labels,
                   int num_classes);

enum class StopReason { Budget, Saturation, Manual };

std::string stop_reason_name(StopReason reason);
StopReason parse_stop_reason(std::string_view name);

/// Cost figures recorded next to the predictive metrics of one run.
struct CostLedger {
    long total_params = 0;
    long quantum_params = 0;
    int circuit_width = 0;
    int circuit_depth = 0;
    double train_time_s = 0;
    int epochs_completed = 0;
    StopReason stop_reason = StopReason::Budget;
    /// ';'-separated annotations, e.g. the backbone convention and any
    /// disagreement with published reference counts.
    std::string flags;
};

/// Quantum-parameter counts listed in the published reference table, for the
/// configurations it covers.
std::optional<int> reference_quantum_params(const HeadConfig &config);

CostLedger cost_ledger(const HybridModel &model, double train_time_s, int epochs,
                       StopReason stop_reason);

std::string config_id(const HeadConfig &config);

struct RunReport {
    std::string config_id;
    Family family = Family::DQN;
    int n_qubits = 0;
    int depth = 0;
    int locality = 0;
    std::uint64_t seed = 0;
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double roc_auc = 0;
    long total_params = 0;
    long quantum_params = 0;
    int circuit_width = 0;
    int circuit_depth = 0;
    double train_time_s = 0;
    int epochs_completed = 0;
    int best_epoch = 0;
    StopReason stop_reason = StopReason::Budget;
    std::string flags;
};

struct MeanStd {
    double mean = 0;
    double std = 0;
};

/// mean and sample standard deviation (N - 1 denominator; 0 for N = 1).
MeanStd mean_std(std::span<const double> values);

struct AggregateReport {
    std::string config_id;
    Family family = Family::DQN;
    int n_qubits = 0;
    int depth = 0;
    int locality = 0;
    std::size_t runs = 0;
    MeanStd accuracy, precision, recall, f1, roc_auc, train_time_s;
    long total_params = 0;
    long quantum_params = 0;
    int circuit_width = 0;
    int circuit_depth = 0;
    int max_epochs_completed = 0;
    /// Per-run stop reasons in input order, '|'-separated.
    std::string stop_reasons;
    std::vector<std::uint64_t> failed_seeds;
    bool failed = false;
    std::string flags;
};

/// Aggregates runs of one configuration. Mixed configurations throw.
AggregateReport aggregate_runs(std::span<const RunReport> reports);

/// "88.00 ± 0.00"
std::string format_mean_std(double mean, double std, int decimals = 2);

// CSV serialization. Column order is fixed; see the *_csv_header functions.
std::string run_csv_header();
std::string to_csv_row(const RunReport &r);
std::vector<RunReport> parse_run_csv(std::string_view text);

std::string aggregate_csv_header();
std::string to_csv_row(const AggregateReport &a);
std::string format_aggregate_csv(std::span<const AggregateReport> rows);

/// Aligned plain-text table; accuracy in percent, other metrics as fractions.
std::string format_aggregate_table(std::span<const AggregateReport> rows);

}  // namespace qtl
