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

#include <algorithm>
#include <bit>
#include <cctype>
#include <random>

#include "qtl/byteio.hpp"

namespace qtl {

namespace {

constexpr std::string_view kCheckpointMagic = "QTLC";

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto &c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

void add_rotation_layer(CircuitProgramD &c) {
    for (int q = 0; q < c.n_qubits; ++q) {
        c.add_parameterized(GateKind::RX, q);
        c.add_parameterized(GateKind::RY, q);
        c.add_parameterized(GateKind::RZ, q);
    }
}

void add_ring(CircuitProgramD &c, GateKind kind) {
    const int n = c.n_qubits;
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        c.add(kind == GateKind::CNOT ? GateOpD::cnot(i, j) : GateOpD::cz(i, j));
    }
}

/// Number of pre-net outputs, i.e. encoding angles.
int encoding_width(const HeadConfig &c) {
    switch (c.family) {
    case Family::QPIE: return 3 * c.n_qubits;
    case Family::AECQTL: return 0;
    default: return c.n_qubits;
    }
}

void append_layer(Eigen::VectorXd &flat, Eigen::Index &pos, const DenseLayer<double> &l) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c) flat(pos++) = l.weights(r, c);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat(pos++) = l.bias(r);
}

void read_layer(const Eigen::VectorXd &flat, Eigen::Index &pos, DenseLayer<double> &l) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = flat(pos++);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat(pos++);
}

void append_grads(Eigen::VectorXd &flat, Eigen::Index &pos, const DenseGrads<double> &g) {
    for (Eigen::Index r = 0; r < g.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < g.weights.cols(); ++c) flat(pos++) = g.weights(r, c);
    for (Eigen::Index r = 0; r < g.bias.size(); ++r) flat(pos++) = g.bias(r);
}

StateVectorD circuit_input(const HybridModel &model, const Eigen::VectorXd &features) {
    return model.config.family == Family::AECQTL ? amplitude_encode(features)
                                                 : init_zero<double>(model.config.n_qubits);
}

}  // namespace

std::string family_name(Family family) {
    switch (family) {
    case Family::DQN: return "DQN";
    case Family::QPIE: return "QPIE";
    case Family::AECQTL: return "AECQTL";
    case Family::PVCQTL_M: return "PVCQTL_M";
    case Family::PVCQTL_V: return "PVCQTL_V";
    case Family::EDQTL: return "EDQTL";
    }
    return "?";
}

Family parse_family(std::string_view name) {
    const std::string u = upper(name);
    if (u == "DQN" || u == "DQN-QTL") return Family::DQN;
    if (u == "QPIE" || u == "QPIE-QTL") return Family::QPIE;
    if (u == "AECQTL" || u == "AE-CQTL") return Family::AECQTL;
    if (u == "PVCQTL_M" || u == "PVCQTL-M") return Family::PVCQTL_M;
    if (u == "PVCQTL_V" || u == "PVCQTL-V") return Family::PVCQTL_V;
    if (u == "EDQTL" || u == "ED-QTL") return Family::EDQTL;
    throw ConfigError("unknown head family '" + std::string(name) + "'");
}

void HeadConfig::validate() const {
    if (n_qubits < 2 || n_qubits > kMaxQubits) {
        throw ConfigError("n_qubits " + std::to_string(n_qubits) + " outside [2, " +
                          std::to_string(kMaxQubits) + "]");
    }
    if (depth < 0) throw ConfigError("depth must be >= 0");
    if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
    if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
    if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
    if (family == Family::AECQTL &&
        (std::uint64_t{1} << n_qubits) != static_cast<std::uint64_t>(feature_dim)) {
        throw ConfigError("AECQTL requires 2^n_qubits == feature_dim (n_qubits " +
                          std::to_string(n_qubits) + ", feature_dim " +
                          std::to_string(feature_dim) + ")");
    }
    if (is_pvcqtl(family) && (locality < 1 || locality > n_qubits)) {
        throw ConfigError("PVCQTL locality " + std::to_string(locality) +
                          " outside [1, n_qubits]");
    }
}

int analytic_quantum_params(const HeadConfig &c) {
    switch (c.family) {
    case Family::DQN:
    case Family::QPIE:
    case Family::EDQTL: return 3 * c.n_qubits * c.depth;
    case Family::AECQTL: return 3 * c.n_qubits * (c.depth + 1);
    case Family::PVCQTL_M: return 0;
    case Family::PVCQTL_V: return 3 * c.n_qubits;
    }
    return 0;
}

int analytic_measurement_count(const HeadConfig &c) {
    if (!is_pvcqtl(c.family)) return c.n_qubits;
    // sum_{j=1}^{k} C(n, j)
    long total = 0;
    long binom = 1;
    for (int j = 1; j <= c.locality; ++j) {
        binom = binom * (c.n_qubits - j + 1) / j;
        total += binom;
    }
    return static_cast<int>(total);
}

std::vector<PauliString> z_strings_up_to_weight(int n_qubits, int max_weight) {
    std::vector<PauliString> out;
    for (int w = 1; w <= max_weight; ++w) {
        std::vector<int> subset(static_cast<std::size_t>(w));
        for (int i = 0; i < w; ++i) subset[static_cast<std::size_t>(i)] = i;
        while (true) {
            out.push_back(PauliString::z_on(n_qubits, subset));
            // Next combination in lexicographic order.
            int i = w - 1;
            while (i >= 0 && subset[static_cast<std::size_t>(i)] == n_qubits - w + i) --i;
            if (i < 0) break;
            ++subset[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < w; ++j)
                subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

Eigen::Index HybridModel::classical_param_count() const {
    Eigen::Index n = 0;
    for (const auto &l : pre_net) n += l.param_count();
    for (const auto &l : readout) n += l.param_count();
    return n;
}

Eigen::VectorXd HybridModel::classical_params() const {
    Eigen::VectorXd flat(classical_param_count());
    Eigen::Index pos = 0;
    for (const auto &l : pre_net) append_layer(flat, pos, l);
    for (const auto &l : readout) append_layer(flat, pos, l);
    return flat;
}

void HybridModel::set_classical_params(const Eigen::VectorXd &flat) {
    if (flat.size() != classical_param_count()) {
        throw ShapeError("set_classical_params: got " + std::to_string(flat.size()) +
                         ", expected " + std::to_string(classical_param_count()));
    }
    Eigen::Index pos = 0;
    for (auto &l : pre_net) read_layer(flat, pos, l);
    for (auto &l : readout) read_layer(flat, pos, l);
    ++revision;
}

void HybridModel::set_quantum_params(const Eigen::VectorXd &theta) {
    if (theta.size() != quantum_params.size()) {
        throw ShapeError("set_quantum_params: got " + std::to_string(theta.size()) +
                         ", expected " + std::to_string(quantum_params.size()));
    }
    quantum_params = theta;
    ++revision;
}

HybridModel build_head(const HeadConfig &config) {
    config.validate();
    HybridModel model;
    model.config = config;
    std::mt19937_64 rng(config.seed);
    const int n = config.n_qubits;

    const int enc = encoding_width(config);
    if (enc > 0) {
        model.pre_net.push_back(DenseLayer<double>::uniform_init(
            config.feature_dim, config.hidden_dim, Activation::Relu, rng));
        model.pre_net.push_back(DenseLayer<double>::uniform_init(
            config.hidden_dim, enc, Activation::Tanh, rng));
    }

    CircuitProgramD &c = model.circuit;
    c.n_qubits = n;
    switch (config.family) {
    case Family::DQN:
    case Family::EDQTL:
        for (int q = 0; q < n; ++q) c.add_parameterized(GateKind::RY, q);
        model.encoding_slots = c.param_count;
        for (int l = 0; l < config.depth; ++l) {
            add_rotation_layer(c);
            add_ring(c, GateKind::CNOT);
        }
        break;
    case Family::QPIE:
        for (int q = 0; q < n; ++q) {
            c.add_parameterized(GateKind::RX, q);
            c.add_parameterized(GateKind::RY, q);
            c.add_parameterized(GateKind::RZ, q);
        }
        model.encoding_slots = c.param_count;
        for (int l = 0; l < config.depth; ++l) {
            add_rotation_layer(c);
            add_ring(c, GateKind::CNOT);
        }
        break;
    case Family::AECQTL:
        model.encoding_slots = 0;
        for (int l = 0; l < config.depth; ++l) {
            for (int q = 0; q < n; ++q) c.add(GateOpD::h(q));
            add_rotation_layer(c);
            add_ring(c, GateKind::CNOT);
        }
        add_rotation_layer(c);
        break;
    case Family::PVCQTL_M:
    case Family::PVCQTL_V:
        for (int q = 0; q < n; ++q) c.add_parameterized(GateKind::RY, q);
        model.encoding_slots = c.param_count;
        add_ring(c, GateKind::CZ);
        if (config.family == Family::PVCQTL_V) {
            add_rotation_layer(c);
            add_ring(c, GateKind::CZ);
        }
        break;
    }
    c.validate();

    model.measurement_plan = is_pvcqtl(config.family)
                                 ? z_strings_up_to_weight(n, config.locality)
                                 : z_strings_up_to_weight(n, 1);
    const auto m = static_cast<Eigen::Index>(model.measurement_plan.size());
    model.readout.push_back(
        DenseLayer<double>::uniform_init(m, config.num_classes, Activation::None, rng));

    const int q_count = c.param_count - model.encoding_slots;
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    model.quantum_params.resize(q_count);
    for (int k = 0; k < q_count; ++k) model.quantum_params(k) = angle(rng);
    return model;
}

ForwardResult head_forward(const HybridModel &model, const Eigen::VectorXd &features) {
    if (features.size() != model.config.feature_dim) {
        throw ShapeError("head_forward: expected " +
                         std::to_string(model.config.feature_dim) + " features, got " +
                         std::to_string(features.size()));
    }
    ForwardResult out;
    HeadCache &cache = out.cache;
    cache.model = &model;
    cache.revision = model.revision;

    const Eigen::Index enc = model.encoding_slots;
    cache.circuit_params.resize(model.circuit.param_count);
    if (!model.pre_net.empty()) {
        Eigen::VectorXd x = features;
        for (const auto &layer : model.pre_net) {
            cache.pre_inputs.push_back(x);
            x = dense_forward(layer, x);
        }
        cache.pre_output = x;
        cache.circuit_params.head(enc) = kAngleScale * x;
    }
    cache.circuit_params.tail(model.quantum_params.size()) = model.quantum_params;

    cache.input_state = circuit_input(model, features);
    cache.final_state = run_program(model.circuit, cache.circuit_params, *cache.input_state);
    cache.z = expectations(*cache.final_state,
                           std::span<const PauliString>(model.measurement_plan));

    Eigen::VectorXd y = cache.z;
    for (const auto &layer : model.readout) {
        cache.readout_inputs.push_back(y);
        y = dense_forward(layer, y);
    }
    out.logits = std::move(y);
    return out;
}

Eigen::VectorXd head_measurements(const HybridModel &model,
                                  const Eigen::VectorXd &features) {
    return head_forward(model, features).cache.z;
}

HeadGradients head_backward(const HybridModel &model, const HeadCache &cache,
                            const Eigen::VectorXd &logit_grads) {
    if (cache.model != &model || cache.revision != model.revision ||
        !cache.input_state || !cache.final_state) {
        throw InvalidCacheError("head_backward: cache does not belong to the "
                                "current model parameters");
    }
    if (logit_grads.size() != model.config.num_classes) {
        throw ShapeError("head_backward: expected " +
                         std::to_string(model.config.num_classes) + " logit grads");
    }

    HeadGradients out;
    std::vector<DenseGrads<double>> readout_grads(model.readout.size());
    Eigen::VectorXd upstream = logit_grads;
    for (std::size_t i = model.readout.size(); i-- > 0;) {
        readout_grads[i] = dense_backward(model.readout[i], cache.readout_inputs[i], upstream);
        upstream = readout_grads[i].input;
    }
    const Eigen::VectorXd grad_z = upstream;

    out.tape.observable_jacobian = parameter_shift_jacobian(
        model.circuit, cache.circuit_params, *cache.input_state,
        std::span<const PauliString>(model.measurement_plan));
    out.tape.quantum_grads = out.tape.observable_jacobian.transpose() * grad_z;
    out.quantum = out.tape.quantum_grads.tail(model.quantum_params.size());

    std::vector<DenseGrads<double>> pre_grads(model.pre_net.size());
    if (!model.pre_net.empty()) {
        upstream = kAngleScale * out.tape.quantum_grads.head(model.encoding_slots);
        for (std::size_t i = model.pre_net.size(); i-- > 0;) {
            pre_grads[i] = dense_backward(model.pre_net[i], cache.pre_inputs[i], upstream);
            upstream = pre_grads[i].input;
        }
    }

    out.classical.resize(model.classical_param_count());
    Eigen::Index pos = 0;
    for (const auto &g : pre_grads) append_grads(out.classical, pos, g);
    for (const auto &g : readout_grads) append_grads(out.classical, pos, g);
    return out;
}

TeacherEnsembleOutput average_teachers(const std::vector<Eigen::VectorXd> &teachers) {
    if (teachers.empty()) throw DataError("average_teachers: no teacher logits");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(teachers.front().size());
    for (const auto &t : teachers) {
        if (t.size() != sum.size()) throw ShapeError("teacher logit lengths differ");
        sum += t;
    }
    return {sum / static_cast<double>(teachers.size())};
}

StepResult train_ce_step(const HybridModel &model, const Eigen::VectorXd &features,
                         int label) {
    auto fwd = head_forward(model, features);
    auto ce = cross_entropy_loss(fwd.logits, label);
    StepResult out;
    out.loss = ce.loss;
    out.grads = head_backward(model, fwd.cache, ce.grads);
    out.logits = std::move(fwd.logits);
    return out;
}

StepResult train_edqtl_step(const HybridModel &model, const Eigen::VectorXd &features,
                            int label, const TeacherEnsembleOutput &teacher,
                            const DistillConfig &cfg) {
    if (teacher.logits.size() == 0) {
        throw DataError("train_edqtl_step: missing teacher logits");
    }
    if (teacher.logits.size() != model.config.num_classes) {
        throw ShapeError("train_edqtl_step: teacher has " +
                         std::to_string(teacher.logits.size()) + " logits for " +
                         std::to_string(model.config.num_classes) + " classes");
    }
    auto fwd = head_forward(model, features);
    auto loss = distillation_loss(fwd.logits, teacher.logits, label, cfg);
    StepResult out;
    out.loss = loss.loss;
    out.grads = head_backward(model, fwd.cache, loss.grads);
    out.logits = std::move(fwd.logits);
    return out;
}

std::string encode_checkpoint(const HybridModel &model) {
    const auto &c = model.config;
    io::ByteWriter w;
    w.put_bytes(kCheckpointMagic);
    w.put_u16(kCheckpointVersion);
    w.put_u16(static_cast<std::uint16_t>(c.family));
    w.put_u32(static_cast<std::uint32_t>(c.n_qubits));
    w.put_u32(static_cast<std::uint32_t>(c.depth));
    w.put_u32(static_cast<std::uint32_t>(c.locality));
    w.put_u32(static_cast<std::uint32_t>(c.num_classes));
    w.put_u32(static_cast<std::uint32_t>(c.feature_dim));
    w.put_u32(static_cast<std::uint32_t>(c.hidden_dim));
    w.put_u64(c.seed);
    const Eigen::VectorXd theta_c = model.classical_params();
    w.put_u64(static_cast<std::uint64_t>(theta_c.size()));
    w.put_u64(static_cast<std::uint64_t>(model.quantum_params.size()));
    for (double v : theta_c) w.put_f64(v);
    for (double v : model.quantum_params) w.put_f64(v);
    return w.take();
}

HybridModel decode_checkpoint(std::string_view bytes) {
    io::ByteReader r(bytes);
    if (r.remaining() < kCheckpointMagic.size() ||
        r.get_bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
        throw FormatError("checkpoint: bad magic");
    }
    const auto version = r.get_u16();
    if (version != kCheckpointVersion) {
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto tag = r.get_u16();
    if (tag < 1 || tag > 6) throw FormatError("checkpoint: unknown family tag");
    HeadConfig c;
    c.family = static_cast<Family>(tag);
    c.n_qubits = static_cast<int>(r.get_u32());
    c.depth = static_cast<int>(r.get_u32());
    c.locality = static_cast<int>(r.get_u32());
    c.num_classes = static_cast<int>(r.get_u32());
    c.feature_dim = static_cast<int>(r.get_u32());
    c.hidden_dim = static_cast<int>(r.get_u32());
    c.seed = r.get_u64();
    HybridModel model = build_head(c);
    const auto n_c = r.get_u64();
    const auto n_q = r.get_u64();
    if (n_c != static_cast<std::uint64_t>(model.classical_param_count()) ||
        n_q != static_cast<std::uint64_t>(model.quantum_param_count())) {
        throw FormatError("checkpoint: parameter counts do not match the config");
    }
    Eigen::VectorXd theta_c(static_cast<Eigen::Index>(n_c));
    Eigen::VectorXd theta_q(static_cast<Eigen::Index>(n_q));
    for (auto &v : theta_c) v = r.get_f64();
    for (auto &v : theta_q) v = r.get_f64();
    if (r.remaining() != 0) throw CorruptionError("checkpoint: trailing bytes");
    model.set_classical_params(theta_c);
    model.set_quantum_params(theta_q);
    return model;
}

void save_checkpoint(const HybridModel &model, const std::string &path) {
    io::write_file_atomic(path, encode_checkpoint(model));
}

HybridModel load_checkpoint(const std::string &path) {
    return decode_checkpoint(io::read_file(path));
}

}  // namespace qtl
