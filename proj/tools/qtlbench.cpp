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

// qtlbench: train, sweep, and report on hybrid quantum heads over feature
// bundles. Exit codes: 0 success, 1 run failure, 2 configuration error.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qtl/byteio.hpp"
#include "qtl/datasets.hpp"
#include "qtl/errors.hpp"
#include "qtl/harness.hpp"
#include "qtl/metrics.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfig = 2;

void emit(const std::string &text, const std::string &path) {
    if (path.empty()) {
        std::cout << text;
    } else {
        qtl::io::write_file_atomic(path, text);
        std::cerr << "wrote " << path << "\n";
    }
}

qtl::RunOptions cli_run_options(bool verbose) {
    qtl::RunOptions opts;
    opts.threads = qtl::thread_count_from_env();
    if (verbose) {
        opts.on_epoch = [](int epoch, double lr, double acc) {
            std::fprintf(stderr, "  epoch %3d  lr %.3g  eval acc %.4f\n", epoch, lr, acc);
        };
    }
    return opts;
}

int cmd_run(const std::string &config_path, std::optional<std::uint64_t> seed, bool verbose) {
    const auto cfg = qtl::load_experiment_config(config_path);
    const auto data = qtl::load_training_data(cfg);
    const auto opts = cli_run_options(verbose);
    const std::vector<std::uint64_t> seeds = seed ? std::vector{*seed} : cfg.seeds;

    std::string csv = qtl::run_csv_header() + "\n";
    int status = kExitOk;
    for (auto s : seeds) {
        try {
            std::cerr << "seed " << s << "\n";
            const auto report = qtl::run_experiment(cfg, s, data, opts);
            csv += qtl::to_csv_row(report) + "\n";
        } catch (const qtl::ConfigError &) {
            throw;
        } catch (const qtl::Error &e) {
            std::cerr << "seed " << s << " failed: " << e.what() << "\n";
            status = kExitRunFailure;
        }
    }
    emit(csv, cfg.output);
    return status;
}

int cmd_sweep(const std::string &config_path, std::vector<int> qubits, std::vector<int> depths,
              bool verbose) {
    const auto cfg = qtl::load_experiment_config(config_path);
    qtl::SweepSpec spec{cfg, qubits.empty() ? cfg.sweep_qubits : qubits,
                        depths.empty() ? cfg.sweep_depths : depths};
    const auto result = qtl::run_sweep(spec, qtl::load_training_data(cfg),
                                       cli_run_options(verbose));
    for (const auto &f : result.failures) std::cerr << "failed: " << f << "\n";
    emit(qtl::format_aggregate_csv(result.rows), cfg.output);
    for (const auto &row : result.rows) {
        if (row.failed) return kExitRunFailure;
    }
    return kExitOk;
}

int cmd_synth(const std::string &out, const qtl::SynthOptions &opts,
              std::optional<std::uint64_t> sample_seed) {
    const auto bundle = qtl::synthesize_features(opts, sample_seed);
    qtl::save_bundle(bundle, out);
    std::cerr << "wrote " << bundle.size() << " records (D = " << bundle.feature_dim
              << ", C = " << bundle.num_classes << ") to " << out << "\n";
    return kExitOk;
}

int cmd_report(const std::vector<std::string> &paths, const std::string &format) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<qtl::RunReport>> groups;
    for (const auto &p : paths) {
        for (auto &r : qtl::parse_run_csv(qtl::io::read_file(p))) {
            if (!groups.count(r.config_id)) order.push_back(r.config_id);
            groups[r.config_id].push_back(std::move(r));
        }
    }
    std::vector<qtl::AggregateReport> rows;
    for (const auto &id : order) rows.push_back(qtl::aggregate_runs(groups[id]));
    std::cout << (format == "table" ? qtl::format_aggregate_table(rows)
                                    : qtl::format_aggregate_csv(rows));
    return kExitOk;
}

int cmd_verify() {
    const auto summary = qtl::self_verify();
    for (const auto &c : summary.checks) {
        std::printf("%-40s %s  %s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL",
                    c.detail.c_str());
    }
    std::printf("verify finished in %.2f s\n", summary.seconds);
    return summary.all_passed() ? kExitOk : kExitRunFailure;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qtlbench: hybrid quantum classifier heads on frozen features"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Per-epoch progress on stderr");

    std::string config_path;
    std::optional<std::uint64_t> seed;
    auto *run = app.add_subcommand("run", "Train one configuration for each seed");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--seed", seed, "Run only this seed");

    std::vector<int> qubits, depths;
    auto *sweep = app.add_subcommand("sweep", "Sweep qubit count and depth");
    sweep->add_option("config", config_path, "Config file")->required();
    sweep->add_option("--qubits", qubits, "Qubit counts")->delimiter(',');
    sweep->add_option("--depth", depths, "Circuit depths")->delimiter(',');

    std::string synth_out;
    qtl::SynthOptions synth_opts;
    std::optional<std::uint64_t> sample_seed;
    auto *synth = app.add_subcommand("synth", "Write a synthetic Gaussian-cluster bundle");
    synth->add_option("out", synth_out, "Output .qtlb path")->required();
    synth->add_option("--classes", synth_opts.num_classes)->check(CLI::Range(2, 1 << 20));
    synth->add_option("--dim", synth_opts.feature_dim)->check(CLI::PositiveNumber);
    synth->add_option("--per-class", synth_opts.per_class)->check(CLI::PositiveNumber);
    synth->add_option("--sep", synth_opts.class_separation);
    synth->add_option("--seed", synth_opts.seed, "Seed for class means (and noise)");
    synth->add_option("--sample-seed", sample_seed, "Separate noise seed for a fresh draw");
    synth->add_flag("--teacher", synth_opts.teacher_logits, "Attach teacher logits");

    std::vector<std::string> csv_paths;
    std::string format = "table";
    auto *report = app.add_subcommand("report", "Aggregate per-run CSV files");
    report->add_option("csv", csv_paths, "Run CSV files")->required();
    report->add_option("--format", format)->check(CLI::IsMember({"csv", "table"}));

    auto *verify = app.add_subcommand("verify", "Run the built-in oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path, seed, verbose);
        if (*sweep) return cmd_sweep(config_path, qubits, depths, verbose);
        if (*synth) return cmd_synth(synth_out, synth_opts, sample_seed);
        if (*report) return cmd_report(csv_paths, format);
        if (*verify) return cmd_verify();
    } catch (const qtl::ConfigError &e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const qtl::Error &e) {
        std::cerr << e.what() << "\n";
        return kExitRunFailure;
    }
    return kExitOk;
}
