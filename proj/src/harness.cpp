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

#include "qtl/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "qtl/byteio.hpp"
#include "qtl/diffgrad.hpp"
#include "qtl/errors.hpp"
#include "qtl/oracles.hpp"

namespace qtl {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string &key, const std::string &value) {
    std::istringstream ss(value);
    T out{};
    ss >> out;
    if (!ss || !ss.eof()) {
        throw ConfigError("bad value for " + key + ": '" + value + "'");
    }
    return out;
}

template <typename T>
std::vector<T> parse_list(const std::string &key, const std::string &value) {
    std::vector<T> out;
    std::string item;
    std::istringstream ss(value);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number<T>(key, item));
    }
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

bool parse_switch(const std::string &key, const std::string &value) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    throw ConfigError("bad value for " + key + ": '" + value + "' (want on/off)");
}

/// Runs fn(i) for i in [0, n); each index writes only its own output slot.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn &&fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(threads, n));
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) t.join();
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

struct EvalOutcome {
    ClassificationMetrics metrics;
    double roc_auc = 0;
    bool auc_defined = true;
};

EvalOutcome evaluate(const HybridModel &model, const std::vector<Eigen::VectorXd> &x,
                     const std::vector<int> &y, int threads) {
    const int c = model.config.num_classes;
    Eigen::MatrixXd probs(static_cast<Eigen::Index>(x.size()), c);
    std::vector<int> pred(x.size());
    parallel_for(x.size(), threads, [&](std::size_t i) {
        const Eigen::VectorXd logits = head_forward(model, x[i]).logits;
        if (!logits.allFinite()) throw NumericFault("non-finite logits during evaluation");
        Eigen::Index arg = 0;
        logits.maxCoeff(&arg);
        pred[i] = static_cast<int>(arg);
        probs.row(static_cast<Eigen::Index>(i)) = softmax(logits).transpose();
    });
    EvalOutcome out;
    out.metrics = classification_metrics(pred, y, c);
    try {
        out.roc_auc = roc_auc_ovr(probs, y, c);
    } catch (const UndefinedMetricError &) {
        out.roc_auc = 0;
        out.auc_defined = false;
    }
    return out;
}

std::vector<Eigen::VectorXd> promote_features(const FeatureBundle &b) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(b.size());
    for (const auto &r : b.records) out.push_back(r.features.cast<double>());
    return out;
}

std::vector<int> labels_of(const FeatureBundle &b) {
    std::vector<int> out;
    out.reserve(b.size());
    for (const auto &r : b.records) out.push_back(r.label);
    return out;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

bool close(double a, double b, double rel, double abs_floor) {
    return std::abs(a - b) <= std::max(rel * std::abs(b), abs_floor);
}

}  // namespace

double ExperimentConfig::effective_weight_decay() const {
    if (optimizer.weight_decay) return *optimizer.weight_decay;
    switch (head.family) {
    case Family::DQN:
    case Family::QPIE:
    case Family::EDQTL: return 1e-4;
    default: return 0.0;
    }
}

bool ExperimentConfig::effective_scheduler() const {
    if (optimizer.scheduler) return *optimizer.scheduler;
    return head.family == Family::DQN || head.family == Family::QPIE;
}

std::optional<DistillConfig> ExperimentConfig::effective_distill() const {
    if (head.family != Family::EDQTL) return std::nullopt;
    return distill.value_or(DistillConfig{});
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::string &base_dir) {
    ExperimentConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    auto resolve = [&](const std::string &p) {
        if (p.empty() || base_dir.empty() || std::filesystem::path(p).is_absolute()) return p;
        return (std::filesystem::path(base_dir) / p).string();
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));

        if (key == "data.train") cfg.train_path = resolve(value);
        else if (key == "data.eval") cfg.eval_path = resolve(value);
        else if (key == "head.family") cfg.head.family = parse_family(value);
        else if (key == "head.qubits") cfg.head.n_qubits = parse_number<int>(key, value);
        else if (key == "head.depth") cfg.head.depth = parse_number<int>(key, value);
        else if (key == "head.locality") cfg.head.locality = parse_number<int>(key, value);
        else if (key == "head.hidden") cfg.head.hidden_dim = parse_number<int>(key, value);
        else if (key == "head.classes") cfg.head.num_classes = parse_number<int>(key, value);
        else if (key == "head.feature_dim") cfg.head.feature_dim = parse_number<int>(key, value);
        else if (key == "optimizer.lr") cfg.optimizer.lr = parse_number<double>(key, value);
        else if (key == "optimizer.weight_decay")
            cfg.optimizer.weight_decay = parse_number<double>(key, value);
        else if (key == "optimizer.batch_size")
            cfg.optimizer.batch_size = parse_number<int>(key, value);
        else if (key == "optimizer.max_epochs")
            cfg.optimizer.max_epochs = parse_number<int>(key, value);
        else if (key == "optimizer.scheduler") cfg.optimizer.scheduler = parse_switch(key, value);
        else if (key == "optimizer.step_size")
            cfg.optimizer.step_size = parse_number<int>(key, value);
        else if (key == "optimizer.gamma") cfg.optimizer.gamma = parse_number<double>(key, value);
        else if (key == "distill.temperature") {
            if (!cfg.distill) cfg.distill.emplace();
            cfg.distill->temperature = parse_number<double>(key, value);
        } else if (key == "distill.alpha") {
            if (!cfg.distill) cfg.distill.emplace();
            cfg.distill->alpha = parse_number<double>(key, value);
        } else if (key == "run.seeds") cfg.seeds = parse_list<std::uint64_t>(key, value);
        else if (key == "run.subset_total")
            cfg.subset_total = parse_number<std::size_t>(key, value);
        else if (key == "run.patience") cfg.patience = parse_number<int>(key, value);
        else if (key == "run.output") cfg.output = resolve(value);
        else if (key == "sweep.qubits") cfg.sweep_qubits = parse_list<int>(key, value);
        else if (key == "sweep.depth") cfg.sweep_depths = parse_list<int>(key, value);
        else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (cfg.optimizer.batch_size < 1) throw ConfigError("optimizer.batch_size must be >= 1");
    if (cfg.optimizer.max_epochs < 0) throw ConfigError("optimizer.max_epochs must be >= 0");
    if (cfg.optimizer.step_size < 1) throw ConfigError("optimizer.step_size must be >= 1");
    if (!(cfg.optimizer.lr > 0)) throw ConfigError("optimizer.lr must be > 0");
    if (cfg.patience < 0) throw ConfigError("run.patience must be >= 0");
    if (cfg.distill && (!(cfg.distill->temperature > 0) || cfg.distill->alpha < 0 ||
                        cfg.distill->alpha > 1)) {
        throw ConfigError("distill needs temperature > 0 and alpha in [0, 1]");
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string &path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const DataError &e) {
        throw ConfigError(e.what());
    }
    return parse_experiment_config(text,
                                   std::filesystem::path(path).parent_path().string());
}

int thread_count_from_env() {
    if (const char *v = std::getenv("QTL_THREADS")) {
        try {
            return std::max(1, std::stoi(v));
        } catch (const std::exception &) {
            throw ConfigError(std::string("QTL_THREADS must be an integer, got '") + v + "'");
        }
    }
    return 1;
}

TrainingData load_training_data(const ExperimentConfig &config) {
    if (config.train_path.empty() || config.eval_path.empty()) {
        throw ConfigError("data.train and data.eval are required");
    }
    return {load_bundle(config.train_path), load_bundle(config.eval_path)};
}

RunReport run_experiment(const ExperimentConfig &config, std::uint64_t seed,
                         const TrainingData &data, const RunOptions &options) {
    data.train.validate();
    data.eval.validate();
    if (data.train.feature_dim != data.eval.feature_dim ||
        data.train.num_classes != data.eval.num_classes) {
        throw ConfigError("train and eval bundles disagree on D or C");
    }
    if (data.train.size() == 0 || data.eval.size() == 0) {
        throw ConfigError("train and eval bundles must be non-empty");
    }
    HeadConfig head = config.head;
    if (head.feature_dim == 0) head.feature_dim = data.train.feature_dim;
    if (head.num_classes == 0) head.num_classes = data.train.num_classes;
    if (head.feature_dim != data.train.feature_dim || head.num_classes != data.train.num_classes) {
        throw ConfigError("head expects D = " + std::to_string(head.feature_dim) + ", C = " +
                          std::to_string(head.num_classes) + " but bundle has D = " +
                          std::to_string(data.train.feature_dim) + ", C = " +
                          std::to_string(data.train.num_classes));
    }
    const auto distill = config.effective_distill();
    if (distill && !data.train.has_teacher_logits()) {
        throw ConfigError("EDQTL requires teacher logits in the training bundle");
    }
    head.seed = seed;
    HybridModel model = build_head(head);

    const FeatureBundle train = config.subset_total
                                    ? balanced_subset(data.train, *config.subset_total, seed)
                                    : data.train;
    const auto x_train = promote_features(train);
    const auto y_train = labels_of(train);
    std::vector<Eigen::VectorXd> teacher;
    if (distill) {
        for (const auto &r : train.records) teacher.push_back(r.teacher_logits->cast<double>());
    }
    const auto x_eval = promote_features(data.eval);
    const auto y_eval = labels_of(data.eval);

    const int threads = std::max(1, options.threads);
    const double base_lr = config.optimizer.lr;
    const bool scheduler = config.effective_scheduler();
    auto adam_c = AdamState<double>::for_size(model.classical_param_count(), base_lr,
                                              config.effective_weight_decay());
    auto adam_q = AdamState<double>::for_size(model.quantum_param_count(), base_lr, 0.0);
    std::mt19937_64 shuffle_rng(seed ^ 0xA5A5A5A5DEADBEEFull);

    EvalOutcome best = evaluate(model, x_eval, y_eval, threads);
    int best_epoch = 0;
    int stale = 0;
    int epochs_done = 0;
    StopReason stop = StopReason::Budget;
    std::vector<std::size_t> order(x_train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const auto t0 = std::chrono::steady_clock::now();
    for (int epoch = 0; epoch < config.optimizer.max_epochs; ++epoch) {
        const double lr = scheduler ? step_lr(base_lr, epoch, config.optimizer.step_size,
                                              config.optimizer.gamma)
                                    : base_lr;
        adam_c.lr = lr;
        adam_q.lr = lr;
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        const auto batch_size = static_cast<std::size_t>(config.optimizer.batch_size);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t b = std::min(batch_size, order.size() - start);
            std::vector<StepResult> steps(b);
            parallel_for(b, threads, [&](std::size_t i) {
                const std::size_t s = order[start + i];
                steps[i] = distill ? train_edqtl_step(model, x_train[s], y_train[s],
                                                      {teacher[s]}, *distill)
                                   : train_ce_step(model, x_train[s], y_train[s]);
            });
            Eigen::VectorXd g_c = Eigen::VectorXd::Zero(model.classical_param_count());
            Eigen::VectorXd g_q = Eigen::VectorXd::Zero(model.quantum_param_count());
            double loss = 0;
            for (const auto &st : steps) {
                loss += st.loss;
                g_c += st.grads.classical;
                g_q += st.grads.quantum;
            }
            if (!std::isfinite(loss)) {
                throw NumericFault("non-finite loss at epoch " + std::to_string(epoch + 1));
            }
            g_c /= static_cast<double>(b);
            g_q /= static_cast<double>(b);
            Eigen::VectorXd theta_c = model.classical_params();
            Eigen::VectorXd theta_q = model.quantum_params;
            adam_update(adam_c, theta_c, g_c);
            adam_update(adam_q, theta_q, g_q);
            model.set_classical_params(theta_c);
            model.set_quantum_params(theta_q);
        }
        epochs_done = epoch + 1;

        const EvalOutcome ev = evaluate(model, x_eval, y_eval, threads);
        if (options.on_epoch) options.on_epoch(epochs_done, lr, ev.metrics.accuracy);
        if (ev.metrics.accuracy > best.metrics.accuracy) {
            best = ev;
            best_epoch = epochs_done;
            stale = 0;
        } else {
            ++stale;
        }
        // Perfect accuracy cannot be strictly improved on, so the reported
        // checkpoint is final.
        if (best.metrics.accuracy >= 1.0) {
            stop = StopReason::Saturation;
            break;
        }
        if (config.patience > 0 && stale >= config.patience) {
            stop = StopReason::Saturation;
            break;
        }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const CostLedger cost = cost_ledger(model, seconds, epochs_done, stop);
    RunReport r;
    r.config_id = config_id(head);
    r.family = head.family;
    r.n_qubits = head.n_qubits;
    r.depth = head.depth;
    r.locality = is_pvcqtl(head.family) ? head.locality : 0;
    r.seed = seed;
    r.accuracy = best.metrics.accuracy;
    r.precision = best.metrics.precision;
    r.recall = best.metrics.recall;
    r.f1 = best.metrics.f1;
    r.roc_auc = best.roc_auc;
    r.total_params = cost.total_params;
    r.quantum_params = cost.quantum_params;
    r.circuit_width = cost.circuit_width;
    r.circuit_depth = cost.circuit_depth;
    r.train_time_s = cost.train_time_s;
    r.epochs_completed = cost.epochs_completed;
    r.best_epoch = best_epoch;
    r.stop_reason = cost.stop_reason;
    r.flags = cost.flags + ";best-checkpoint";
    if (!best.auc_defined) r.flags += ";auc-undefined";
    return r;
}

RunReport run_experiment(const ExperimentConfig &config, std::uint64_t seed,
                         const RunOptions &options) {
    return run_experiment(config, seed, load_training_data(config), options);
}

SweepResult run_sweep(const SweepSpec &spec, const TrainingData &data,
                      const RunOptions &options) {
    const std::vector<int> qubits =
        spec.qubits.empty() ? std::vector<int>{spec.base.head.n_qubits} : spec.qubits;
    const std::vector<int> depths =
        spec.depths.empty() ? std::vector<int>{spec.base.head.depth} : spec.depths;
    if (spec.base.seeds.empty()) throw ConfigError("sweep needs at least one seed");

    SweepResult out;
    for (int n : qubits) {
        for (int d : depths) {
            ExperimentConfig cfg = spec.base;
            cfg.head.n_qubits = n;
            cfg.head.depth = d;
            std::vector<RunReport> reports;
            std::vector<std::uint64_t> failed;
            HeadConfig resolved = cfg.head;
            if (resolved.feature_dim == 0) resolved.feature_dim = data.train.feature_dim;
            if (resolved.num_classes == 0) resolved.num_classes = data.train.num_classes;
            for (auto seed : cfg.seeds) {
                try {
                    reports.push_back(run_experiment(cfg, seed, data, options));
                } catch (const Error &e) {
                    failed.push_back(seed);
                    out.failures.push_back(config_id(resolved) + " seed " +
                                           std::to_string(seed) + ": " + e.what());
                }
            }
            AggregateReport row;
            if (!reports.empty()) {
                row = aggregate_runs(reports);
            } else {
                row.config_id = config_id(resolved);
                row.family = resolved.family;
                row.n_qubits = n;
                row.depth = d;
                row.locality = is_pvcqtl(resolved.family) ? resolved.locality : 0;
                row.failed = true;
                row.circuit_width = n;
                row.circuit_depth = d;
                try {
                    const HybridModel m = build_head(resolved);
                    row.total_params = static_cast<long>(m.total_param_count());
                    row.quantum_params = static_cast<long>(m.quantum_param_count());
                } catch (const Error &) {
                    row.flags = "invalid-config";
                }
            }
            row.failed_seeds = failed;
            out.rows.push_back(std::move(row));
            out.runs.insert(out.runs.end(), reports.begin(), reports.end());
        }
    }
    return out;
}

SweepResult run_sweep(const SweepSpec &spec, const RunOptions &options) {
    return run_sweep(spec, load_training_data(spec.base), options);
}

bool VerifySummary::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto &c) { return c.passed; });
}

VerifySummary self_verify(const GradientFn &gradient_fn) {
    const auto t0 = std::chrono::steady_clock::now();
    const GradientFn gradient =
        gradient_fn ? gradient_fn
                    : GradientFn([](const CircuitProgramD &p, const Eigen::VectorXd &th,
                                    const StateVectorD &in, const PauliString &obs) {
                          return Eigen::VectorXd(parameter_shift_gradient(p, th, in, obs));
                      });
    VerifySummary summary;
    std::mt19937_64 rng(20260415);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);

    auto random_params = [&](int count) {
        Eigen::VectorXd p(count);
        for (auto &v : p) v = angle(rng);
        return p;
    };
    auto random_observable = [&](int n) {
        std::uniform_int_distribution<std::uint64_t> mask(1, (std::uint64_t{1} << n) - 1);
        const auto m = mask(rng);
        std::vector<int> support;
        for (int q = 0; q < n; ++q)
            if (m & (std::uint64_t{1} << q)) support.push_back(q);
        return PauliString::z_on(n, support);
    };

    {
        VerifyCheck c{"simulator-dense-oracle", true, ""};
        double worst = 0;
        for (int trial = 0; trial < 25; ++trial) {
            const int n = 1 + trial % 4;
            const auto prog = oracle::random_program(n, 30, rng);
            const auto params = random_params(prog.param_count);
            const auto input = oracle::random_state(n, rng);
            const auto fast = run_program(prog, params, input);
            const Eigen::VectorXcd slow =
                oracle::program_unitary(prog, params) * input.amplitudes();
            worst = std::max(worst, (fast.amplitudes() - slow).cwiseAbs().maxCoeff());
        }
        const auto big = oracle::random_program(10, 200, rng);
        const auto out = run_program(big, random_params(big.param_count), init_zero<double>(10));
        const double drift = std::abs(out.squared_norm() - 1.0);
        c.passed = worst <= 1e-10 && drift <= 1e-10;
        c.detail = "max deviation " + sci(worst) + ", norm drift " + sci(drift);
        summary.checks.push_back(c);
    }
    {
        VerifyCheck c{"parameter-shift-vs-finite-difference", true, ""};
        int bad = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const auto prog = oracle::random_program(3, 20, rng, 0.7);
            if (prog.param_count == 0) continue;
            const auto params = random_params(prog.param_count);
            const auto input = init_zero<double>(3);
            const auto obs = random_observable(3);
            const Eigen::VectorXd ps = gradient(prog, params, input, obs);
            const Eigen::VectorXd fd =
                finite_difference_gradient(prog, params, input, obs, 1e-4);
            for (Eigen::Index k = 0; k < fd.size(); ++k) {
                if (ps.size() != fd.size() || !close(ps(k), fd(k), 1e-5, 1e-7)) {
                    ++bad;
                    break;
                }
            }
        }
        c.passed = bad == 0;
        c.detail = std::to_string(bad) + " of 20 programs disagree";
        summary.checks.push_back(c);
    }
    {
        VerifyCheck c{"parameter-counts", true, ""};
        struct Case {
            Family f;
            int n, d, expected;
        };
        const Case cases[] = {{Family::DQN, 4, 2, 24},    {Family::DQN, 6, 2, 36},
                              {Family::EDQTL, 4, 2, 24},  {Family::EDQTL, 6, 2, 36},
                              {Family::QPIE, 4, 2, 24},   {Family::QPIE, 6, 2, 36},
                              {Family::AECQTL, 9, 2, 81}, {Family::AECQTL, 9, 4, 135},
                              {Family::AECQTL, 9, 6, 189}, {Family::PVCQTL_V, 4, 1, 12},
                              {Family::PVCQTL_M, 4, 1, 0}};
        for (const auto &k : cases) {
            HeadConfig h{.family = k.f, .n_qubits = k.n, .depth = k.d, .locality = 2,
                         .num_classes = 2, .feature_dim = k.f == Family::AECQTL ? 512 : 8,
                         .hidden_dim = 4};
            const auto got = build_head(h).quantum_param_count();
            if (got != k.expected) {
                c.passed = false;
                c.detail += config_id(h) + " has " + std::to_string(got) + "; ";
            }
        }
        if (c.passed) c.detail = "11 configurations match";
        summary.checks.push_back(c);
    }
    {
        VerifyCheck c{"measurement-plan-cardinality", true, ""};
        for (int n = 2; n <= 9; ++n) {
            for (int k = 1; k <= std::min(3, n); ++k) {
                int enumerated = 0;
                for (std::uint64_t m = 1; m < (std::uint64_t{1} << n); ++m)
                    enumerated += std::popcount(m) <= k;
                const auto plan = z_strings_up_to_weight(n, k);
                HeadConfig h{.family = Family::PVCQTL_M, .n_qubits = n, .locality = k};
                if (static_cast<int>(plan.size()) != enumerated ||
                    analytic_measurement_count(h) != enumerated) {
                    c.passed = false;
                    c.detail += "n=" + std::to_string(n) + " k=" + std::to_string(k) + "; ";
                }
            }
        }
        if (c.passed) c.detail = "n in [2, 9], k in [1, 3] match subset enumeration";
        summary.checks.push_back(c);
    }
    {
        VerifyCheck c{"metric-oracles", true, ""};
        for (int trial = 0; trial < 100 && c.passed; ++trial) {
            const int classes = 2 + trial % 4;
            const int n = 10 + trial % 30;
            std::uniform_int_distribution<int> cls(0, classes - 1);
            std::vector<int> pred(n), lab(n);
            for (int i = 0; i < n; ++i) {
                pred[i] = cls(rng);
                lab[i] = i < classes ? i : cls(rng);
            }
            const auto fast = classification_metrics(pred, lab, classes);
            const auto slow = oracle::counted_metrics(pred, lab, classes);
            std::uniform_int_distribution<int> level(0, 4);
            Eigen::MatrixXd scores(n, classes);
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < classes; ++k) scores(i, k) = 1.0 + level(rng);
                scores.row(i) /= scores.row(i).sum();
            }
            const double auc = roc_auc_ovr(scores, lab, classes);
            const double auc_ref = oracle::all_pairs_auc_ovr(scores, lab, classes);
            if (fast.accuracy != slow.accuracy || fast.precision != slow.precision ||
                fast.recall != slow.recall || fast.f1 != slow.f1 ||
                std::abs(auc - auc_ref) > 1e-12) {
                c.passed = false;
                c.detail = "mismatch on trial " + std::to_string(trial);
            }
        }
        if (c.passed) c.detail = "100 random instances match";
        summary.checks.push_back(c);
    }
    {
        VerifyCheck c{"head-gradient-vs-finite-difference", true, ""};
        HeadConfig h{.family = Family::DQN, .n_qubits = 3, .depth = 1, .num_classes = 3,
                     .feature_dim = 6, .hidden_dim = 5, .seed = 7};
        const HybridModel model = build_head(h);
        Eigen::VectorXd x(6);
        std::normal_distribution<double> g(0.0, 1.0);
        for (auto &v : x) v = g(rng);
        const auto step = train_ce_step(model, x, 1);
        const auto fd = oracle::finite_difference_loss_gradient(model, x, 1, 1e-5);
        int bad = 0;
        for (Eigen::Index k = 0; k < fd.classical.size(); ++k)
            bad += !close(step.grads.classical(k), fd.classical(k), 1e-4, 1e-7);
        for (Eigen::Index k = 0; k < fd.quantum.size(); ++k)
            bad += !close(step.grads.quantum(k), fd.quantum(k), 1e-4, 1e-7);
        c.passed = bad == 0;
        c.detail = std::to_string(bad) + " coordinates outside tolerance";
        summary.checks.push_back(c);
    }
    summary.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

}  // namespace qtl
