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

#include "qtl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <sstream>

#include "qtl/errors.hpp"

namespace qtl {

namespace {

std::string fmt(const char *spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

void check_labels(std::span<const int> v, int num_classes, const char *what) {
    for (int x : v) {
        if (x < 0 || x >= num_classes) {
            throw LabelError(std::string(what) + " value " + std::to_string(x) +
                             " outside [0, " + std::to_string(num_classes) + ")");
        }
    }
}

}  // namespace

ClassificationMetrics classification_metrics(std::span<const int> predictions,
                                             std::span<const int> labels,
                                             int num_classes) {
    if (predictions.empty() || predictions.size() != labels.size()) {
        throw DataError("classification_metrics: need equal, non-empty inputs");
    }
    check_labels(predictions, num_classes, "prediction");
    check_labels(labels, num_classes, "label");

    const auto c = static_cast<std::size_t>(num_classes);
    std::vector<long> tp(c, 0), pred_count(c, 0), true_count(c, 0);
    long correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto p = static_cast<std::size_t>(predictions[i]);
        const auto y = static_cast<std::size_t>(labels[i]);
        ++pred_count[p];
        ++true_count[y];
        if (p == y) {
            ++tp[y];
            ++correct;
        }
    }
    ClassificationMetrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    for (std::size_t k = 0; k < c; ++k) {
        const double prec = pred_count[k] ? static_cast<double>(tp[k]) / pred_count[k] : 0.0;
        const double rec = true_count[k] ? static_cast<double>(tp[k]) / true_count[k] : 0.0;
        const double f1 = (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        m.precision += prec;
        m.recall += rec;
        m.f1 += f1;
    }
    m.precision /= num_classes;
    m.recall /= num_classes;
    m.f1 /= num_classes;
    return m;
}

double binary_auc(std::span<const double> scores, std::span<const bool> positive) {
    const std::size_t n = scores.size();
    if (n != positive.size()) throw DataError("binary_auc: length mismatch");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Midranks over tied runs; ranks are 1-based.
    double pos_rank_sum = 0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (positive[order[k]]) {
                pos_rank_sum += midrank;
                ++n_pos;
            }
        }
        i = j + 1;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw UndefinedMetricError("AUC needs both positive and negative samples");
    }
    const double np = static_cast<double>(n_pos);
    return (pos_rank_sum - np * (np + 1) / 2) / (np * static_cast<double>(n_neg));
}

double roc_auc_ovr(const Eigen::MatrixXd &scores, std::span<const int> labels,
                   int num_classes) {
    const auto n = static_cast<std::size_t>(scores.rows());
    if (n == 0 || n != labels.size() || scores.cols() != num_classes) {
        throw DataError("roc_auc_ovr: scores must be N x C with N = label count > 0");
    }
    check_labels(labels, num_classes, "label");
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        if (std::abs(scores.row(i).sum() - 1.0) > 1e-6) {
            throw DataError("roc_auc_ovr: score row " + std::to_string(i) +
                            " does not sum to 1");
        }
    }
    std::vector<bool> present(static_cast<std::size_t>(num_classes), false);
    for (int y : labels) present[static_cast<std::size_t>(y)] = true;
    if (std::count(present.begin(), present.end(), true) < 2) {
        throw UndefinedMetricError("ROC-AUC undefined: labels contain a single class");
    }

    std::vector<double> col(n);
    std::unique_ptr<bool[]> pos(new bool[n]);
    auto class_auc = [&](int k) {
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = scores(static_cast<Eigen::Index>(i), k);
            pos[i] = labels[i] == k;
        }
        return binary_auc(col, std::span<const bool>(pos.get(), n));
    };
    if (num_classes == 2) return class_auc(1);

    double sum = 0;
    int used = 0;
    for (int k = 0; k < num_classes; ++k) {
        if (!present[static_cast<std::size_t>(k)]) continue;
        sum += class_auc(k);
        ++used;
    }
    return sum / used;
}

std::string stop_reason_name(StopReason reason) {
    switch (reason) {
    case StopReason::Budget: return "budget";
    case StopReason::Saturation: return "saturation";
    case StopReason::Manual: return "manual";
    }
    return "?";
}

StopReason parse_stop_reason(std::string_view name) {
    if (name == "budget") return StopReason::Budget;
    if (name == "saturation") return StopReason::Saturation;
    if (name == "manual") return StopReason::Manual;
    throw FormatError("unknown stop reason '" + std::string(name) + "'");
}

std::optional<int> reference_quantum_params(const HeadConfig &c) {
    const int n = c.n_qubits;
    switch (c.family) {
    case Family::DQN:
    case Family::QPIE:
    case Family::EDQTL:
        if ((n == 4 || n == 6) && c.depth == 2) return 3 * n * 2;  // 24 / 36
        return std::nullopt;
    case Family::AECQTL:
        if (n == 9 && (c.depth == 2 || c.depth == 4 || c.depth == 6)) {
            return 3 * n * (c.depth + 1);  // 81 / 135 / 189
        }
        return std::nullopt;
    case Family::PVCQTL_M:
    case Family::PVCQTL_V:
        // Listed as 16 and 24 for both variants.
        if (n == 4) return 16;
        if (n == 6) return 24;
        return std::nullopt;
    }
    return std::nullopt;
}

CostLedger cost_ledger(const HybridModel &model, double train_time_s, int epochs,
                       StopReason stop_reason) {
    CostLedger l;
    l.total_params = static_cast<long>(model.total_param_count());
    l.quantum_params = static_cast<long>(model.quantum_param_count());
    l.circuit_width = model.config.n_qubits;
    l.circuit_depth = model.config.depth;
    l.train_time_s = train_time_s;
    l.epochs_completed = epochs;
    l.stop_reason = stop_reason;
    l.flags = "backbone-excluded";
    if (const auto ref = reference_quantum_params(model.config);
        ref && *ref != l.quantum_params) {
        l.flags += ";reference-qparams=" + std::to_string(*ref);
    }
    return l;
}

std::string config_id(const HeadConfig &c) {
    std::string id = family_name(c.family) + "_n" + std::to_string(c.n_qubits) + "_d" +
                     std::to_string(c.depth);
    if (is_pvcqtl(c.family)) id += "_k" + std::to_string(c.locality);
    return id;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    // Identical inputs come back exactly.
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; }))
        out.mean = values[0];
    if (values.size() >= 2) {
        double ss = 0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / (n - 1));
    }
    return out;
}

AggregateReport aggregate_runs(std::span<const RunReport> reports) {
    if (reports.empty()) throw AggregationError("aggregate_runs: no reports");
    const RunReport &first = reports.front();
    for (const auto &r : reports) {
        if (r.config_id != first.config_id || r.total_params != first.total_params ||
            r.quantum_params != first.quantum_params) {
            throw AggregationError("aggregate_runs: mixed configurations '" +
                                   first.config_id + "' and '" + r.config_id + "'");
        }
    }
    auto collect = [&](double RunReport::*field) {
        std::vector<double> v;
        v.reserve(reports.size());
        for (const auto &r : reports) v.push_back(r.*field);
        return mean_std(v);
    };
    AggregateReport a;
    a.config_id = first.config_id;
    a.family = first.family;
    a.n_qubits = first.n_qubits;
    a.depth = first.depth;
    a.locality = first.locality;
    a.runs = reports.size();
    a.accuracy = collect(&RunReport::accuracy);
    a.precision = collect(&RunReport::precision);
    a.recall = collect(&RunReport::recall);
    a.f1 = collect(&RunReport::f1);
    a.roc_auc = collect(&RunReport::roc_auc);
    a.train_time_s = collect(&RunReport::train_time_s);
    a.total_params = first.total_params;
    a.quantum_params = first.quantum_params;
    a.circuit_width = first.circuit_width;
    a.circuit_depth = first.circuit_depth;
    a.flags = first.flags;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        a.max_epochs_completed = std::max(a.max_epochs_completed, reports[i].epochs_completed);
        if (i) a.stop_reasons += '|';
        a.stop_reasons += stop_reason_name(reports[i].stop_reason);
    }
    return a;
}

std::string format_mean_std(double mean, double std, int decimals) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.*f ± %.*f", decimals, mean, decimals, std);
    return buf;
}

std::string run_csv_header() {
    return "config_id,family,qubits,depth,locality,seed,accuracy,precision,recall,f1,"
           "roc_auc,total_params,quantum_params,circuit_width,circuit_depth,"
           "train_time_s,epochs_completed,best_epoch,stop_reason,flags";
}

std::string to_csv_row(const RunReport &r) {
    std::ostringstream ss;
    ss << r.config_id << ',' << family_name(r.family) << ',' << r.n_qubits << ','
       << r.depth << ',' << r.locality << ',' << r.seed << ',' << fmt("%.6f", r.accuracy)
       << ',' << fmt("%.6f", r.precision) << ',' << fmt("%.6f", r.recall) << ','
       << fmt("%.6f", r.f1) << ',' << fmt("%.6f", r.roc_auc) << ',' << r.total_params
       << ',' << r.quantum_params << ',' << r.circuit_width << ',' << r.circuit_depth
       << ',' << fmt("%.3f", r.train_time_s) << ',' << r.epochs_completed << ','
       << r.best_epoch << ',' << stop_reason_name(r.stop_reason) << ',' << r.flags;
    return ss.str();
}

std::vector<RunReport> parse_run_csv(std::string_view text) {
    std::vector<RunReport> out;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != run_csv_header()) {
                throw FormatError("run CSV: unexpected header on line " +
                                  std::to_string(line_no));
            }
            header = false;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 20) {
            throw FormatError("run CSV line " + std::to_string(line_no) + ": expected 20 "
                              "fields, got " + std::to_string(f.size()));
        }
        try {
            RunReport r;
            r.config_id = f[0];
            r.family = parse_family(f[1]);
            r.n_qubits = std::stoi(f[2]);
            r.depth = std::stoi(f[3]);
            r.locality = std::stoi(f[4]);
            r.seed = std::stoull(f[5]);
            r.accuracy = std::stod(f[6]);
            r.precision = std::stod(f[7]);
            r.recall = std::stod(f[8]);
            r.f1 = std::stod(f[9]);
            r.roc_auc = std::stod(f[10]);
            r.total_params = std::stol(f[11]);
            r.quantum_params = std::stol(f[12]);
            r.circuit_width = std::stoi(f[13]);
            r.circuit_depth = std::stoi(f[14]);
            r.train_time_s = std::stod(f[15]);
            r.epochs_completed = std::stoi(f[16]);
            r.best_epoch = std::stoi(f[17]);
            r.stop_reason = parse_stop_reason(f[18]);
            r.flags = f[19];
            out.push_back(std::move(r));
        } catch (const std::logic_error &e) {
            throw FormatError("run CSV line " + std::to_string(line_no) + ": " + e.what());
        } catch (const ConfigError &e) {
            throw FormatError("run CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (header) throw FormatError("run CSV: missing header");
    return out;
}

std::string aggregate_csv_header() {
    return "config_id,family,qubits,depth,locality,runs,failed_seeds,status,"
           "accuracy_mean,accuracy_std,precision_mean,precision_std,recall_mean,"
           "recall_std,f1_mean,f1_std,roc_auc_mean,roc_auc_std,total_params,"
           "quantum_params,circuit_width,circuit_depth,max_epochs_completed,"
           "stop_reasons,train_time_mean_s,train_time_std_s,flags";
}

std::string to_csv_row(const AggregateReport &a) {
    std::ostringstream ss;
    std::string failed;
    for (std::size_t i = 0; i < a.failed_seeds.size(); ++i) {
        if (i) failed += '|';
        failed += std::to_string(a.failed_seeds[i]);
    }
    ss << a.config_id << ',' << family_name(a.family) << ',' << a.n_qubits << ','
       << a.depth << ',' << a.locality << ',' << a.runs << ',' << failed << ','
       << (a.failed ? "failed" : "ok");
    for (const MeanStd *m : {&a.accuracy, &a.precision, &a.recall, &a.f1, &a.roc_auc}) {
        ss << ',' << fmt("%.6f", m->mean) << ',' << fmt("%.6f", m->std);
    }
    ss << ',' << a.total_params << ',' << a.quantum_params << ',' << a.circuit_width
       << ',' << a.circuit_depth << ',' << a.max_epochs_completed << ',' << a.stop_reasons
       << ',' << fmt("%.3f", a.train_time_s.mean) << ',' << fmt("%.3f", a.train_time_s.std)
       << ',' << a.flags;
    return ss.str();
}

std::string format_aggregate_csv(std::span<const AggregateReport> rows) {
    std::string out = aggregate_csv_header() + "\n";
    for (const auto &r : rows) out += to_csv_row(r) + "\n";
    return out;
}

std::string format_aggregate_table(std::span<const AggregateReport> rows) {
    const std::vector<std::string> head = {
        "config", "qubits", "depth", "runs", "accuracy (%)", "precision", "recall", "f1",
        "roc_auc", "total params", "quantum params", "train time (s)", "stop", "flags"};
    std::vector<std::vector<std::string>> cells;
    for (const auto &a : rows) {
        if (a.failed) {
            cells.push_back({a.config_id, std::to_string(a.n_qubits), std::to_string(a.depth),
                             "0", "failed", "-", "-", "-", "-", std::to_string(a.total_params),
                             std::to_string(a.quantum_params), "-", "-", a.flags});
            continue;
        }
        cells.push_back({a.config_id, std::to_string(a.n_qubits), std::to_string(a.depth),
                         std::to_string(a.runs),
                         format_mean_std(100 * a.accuracy.mean, 100 * a.accuracy.std),
                         format_mean_std(a.precision.mean, a.precision.std),
                         format_mean_std(a.recall.mean, a.recall.std),
                         format_mean_std(a.f1.mean, a.f1.std),
                         format_mean_std(a.roc_auc.mean, a.roc_auc.std),
                         std::to_string(a.total_params), std::to_string(a.quantum_params),
                         fmt("%.2f", a.train_time_s.mean), a.stop_reasons, a.flags});
    }
    // Display width: count UTF-8 code points, not bytes.
    auto width = [](const std::string &s) {
        std::size_t w = 0;
        for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
        return w;
    };
    std::vector<std::size_t> widths(head.size());
    for (std::size_t c = 0; c < head.size(); ++c) {
        widths[c] = width(head[c]);
        for (const auto &row : cells) widths[c] = std::max(widths[c], width(row[c]));
    }
    std::ostringstream ss;
    auto emit = [&](const std::vector<std::string> &row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            ss << row[c];
            if (c + 1 < row.size()) ss << std::string(widths[c] - width(row[c]) + 2, ' ');
        }
        ss << '\n';
    };
    emit(head);
    std::size_t total = 0;
    for (auto w : widths) total += w + 2;
    ss << std::string(total - 2, '-') << '\n';
    for (const auto &row : cells) emit(row);
    return ss.str();
}

}  // namespace qtl
