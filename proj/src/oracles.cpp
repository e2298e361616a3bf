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

#include "qtl/oracles.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

namespace qtl::oracle {

namespace {

using C = std::complex<double>;

Eigen::Matrix2cd pauli(char p) {
    Eigen::Matrix2cd m;
    switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, C(0, -1), C(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m.setIdentity(); break;
    }
    return m;
}

/// exp(-i angle P / 2) = cos(angle/2) I - i sin(angle/2) P
Eigen::Matrix2cd single_qubit(GateKind kind, double angle) {
    if (kind == GateKind::H) {
        return (pauli('X') + pauli('Z')) / std::sqrt(2.0);
    }
    const char p = kind == GateKind::RX ? 'X' : kind == GateKind::RY ? 'Y' : 'Z';
    return std::cos(angle / 2) * Eigen::Matrix2cd::Identity() -
           C(0, 1) * std::sin(angle / 2) * pauli(p);
}

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Value of qubit q in basis index b; qubit 0 is the leftmost tensor factor.
int bit_of(Eigen::Index b, int q, int n) { return static_cast<int>((b >> (n - 1 - q)) & 1); }

}  // namespace

ComplexMatrix gate_unitary(int n_qubits, const GateOpD &gate, double angle) {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    if (gate_arity(gate.kind) == 1) {
        ComplexMatrix u = ComplexMatrix::Identity(1, 1);
        for (int q = 0; q < n_qubits; ++q) {
            const ComplexMatrix factor = q == gate.targets[0]
                                             ? ComplexMatrix(single_qubit(gate.kind, angle))
                                             : ComplexMatrix(ComplexMatrix::Identity(2, 2));
            u = kron(u, factor);
        }
        return u;
    }
    // Two-qubit gates as explicit maps on computational basis states.
    ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
    const int a = gate.targets[0];
    const int b = gate.targets[1];
    for (Eigen::Index in = 0; in < dim; ++in) {
        if (gate.kind == GateKind::CNOT) {
            Eigen::Index out = in;
            if (bit_of(in, a, n_qubits)) out ^= Eigen::Index{1} << (n_qubits - 1 - b);
            u(out, in) = 1;
        } else {
            u(in, in) = (bit_of(in, a, n_qubits) && bit_of(in, b, n_qubits)) ? -1.0 : 1.0;
        }
    }
    return u;
}

ComplexMatrix program_unitary(const CircuitProgramD &program, const Eigen::VectorXd &params) {
    const Eigen::Index dim = Eigen::Index{1} << program.n_qubits;
    ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
    for (const auto &op : program.ops) {
        const double angle = op.param_slot ? params(*op.param_slot) : op.angle.value_or(0.0);
        u = gate_unitary(program.n_qubits, op, angle) * u;
    }
    return u;
}

ComplexMatrix observable_matrix(const PauliString &observable) {
    ComplexMatrix m = ComplexMatrix::Identity(1, 1);
    for (auto l : observable.letters()) {
        m = kron(m, ComplexMatrix(pauli(l == PauliLetter::Z ? 'Z' : 'I')));
    }
    return m;
}

double quadratic_form(const Eigen::VectorXcd &psi, const ComplexMatrix &m) {
    return (psi.adjoint() * m * psi)(0).real();
}

CircuitProgramD random_program(int n_qubits, int n_gates, std::mt19937_64 &rng,
                               double param_fraction) {
    CircuitProgramD p;
    p.n_qubits = n_qubits;
    std::uniform_int_distribution<int> kind_dist(0, n_qubits >= 2 ? 5 : 3);
    std::uniform_int_distribution<int> qubit(0, n_qubits - 1);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int g = 0; g < n_gates; ++g) {
        const auto kind = static_cast<GateKind>(kind_dist(rng));
        if (gate_arity(kind) == 2) {
            const int a = qubit(rng);
            int b = qubit(rng);
            while (b == a) b = qubit(rng);
            p.add(kind == GateKind::CNOT ? GateOpD::cnot(a, b) : GateOpD::cz(a, b));
        } else if (kind == GateKind::H) {
            p.add(GateOpD::h(qubit(rng)));
        } else if (unit(rng) < param_fraction) {
            p.add_parameterized(kind, qubit(rng));
        } else {
            p.add(GateOpD::rotation(kind, qubit(rng), angle(rng)));
        }
    }
    return p;
}

StateVectorD random_state(int n_qubits, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd amps(Eigen::Index{1} << n_qubits);
    for (auto &a : amps) a = C(g(rng), g(rng));
    amps /= amps.norm();
    return StateVectorD(n_qubits, amps);
}

CountedMetrics counted_metrics(std::span<const int> predictions, std::span<const int> labels,
                               int num_classes) {
    Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(num_classes, num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) confusion(labels[i], predictions[i]) += 1;
    CountedMetrics m;
    m.accuracy = static_cast<double>(confusion.trace()) / static_cast<double>(labels.size());
    for (int k = 0; k < num_classes; ++k) {
        const int tp = confusion(k, k);
        const int predicted = confusion.col(k).sum();
        const int actual = confusion.row(k).sum();
        const double p = predicted == 0 ? 0.0 : double(tp) / predicted;
        const double r = actual == 0 ? 0.0 : double(tp) / actual;
        m.precision += p;
        m.recall += r;
        m.f1 += p + r == 0 ? 0.0 : 2 * p * r / (p + r);
    }
    m.precision /= num_classes;
    m.recall /= num_classes;
    m.f1 /= num_classes;
    return m;
}

double all_pairs_auc(std::span<const double> scores, std::span<const bool> positive) {
    double concordant = 0;
    double pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!positive[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (positive[j]) continue;
            pairs += 1;
            if (scores[i] > scores[j]) concordant += 1;
            else if (scores[i] == scores[j]) concordant += 0.5;
        }
    }
    return concordant / pairs;
}

double all_pairs_auc_ovr(const Eigen::MatrixXd &scores, std::span<const int> labels,
                         int num_classes) {
    const std::size_t n = labels.size();
    auto one = [&](int k) {
        std::vector<double> s(n);
        std::unique_ptr<bool[]> pos(new bool[n]);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = scores(static_cast<Eigen::Index>(i), k);
            pos[i] = labels[i] == k;
        }
        return all_pairs_auc(s, std::span<const bool>(pos.get(), n));
    };
    if (num_classes == 2) return one(1);
    double sum = 0;
    int used = 0;
    for (int k = 0; k < num_classes; ++k) {
        bool present = false;
        for (int y : labels) present |= y == k;
        if (!present) continue;
        sum += one(k);
        ++used;
    }
    return sum / used;
}

namespace {

double reference_loss(const HybridModel &model, const Eigen::VectorXd &features, int label,
                      const Eigen::VectorXd *teacher, const DistillConfig &cfg) {
    const Eigen::VectorXd logits = head_forward(model, features).logits;
    auto log_softmax_at = [](const Eigen::VectorXd &v, double t) {
        const Eigen::VectorXd s = v / t;
        const double mx = s.maxCoeff();
        double sum = 0;
        for (double x : s) sum += std::exp(x - mx);
        return Eigen::VectorXd((s.array() - mx - std::log(sum)).matrix());
    };
    const double ce = -log_softmax_at(logits, 1.0)(label);
    if (!teacher) return ce;
    const double t = cfg.temperature;
    const Eigen::VectorXd ls = log_softmax_at(logits, t);
    const Eigen::VectorXd lt = log_softmax_at(*teacher, t);
    double kl = 0;
    for (Eigen::Index k = 0; k < lt.size(); ++k) kl += std::exp(lt(k)) * (lt(k) - ls(k));
    return cfg.alpha * ce + (1 - cfg.alpha) * t * t * kl;
}

}  // namespace

LossGradient finite_difference_loss_gradient(const HybridModel &model,
                                             const Eigen::VectorXd &features, int label,
                                             double epsilon,
                                             const Eigen::VectorXd *teacher_logits,
                                             const DistillConfig &cfg) {
    HybridModel probe = model;
    LossGradient g;
    const Eigen::VectorXd theta_c = model.classical_params();
    g.classical.resize(theta_c.size());
    Eigen::VectorXd work = theta_c;
    for (Eigen::Index k = 0; k < theta_c.size(); ++k) {
        work(k) = theta_c(k) + epsilon;
        probe.set_classical_params(work);
        const double up = reference_loss(probe, features, label, teacher_logits, cfg);
        work(k) = theta_c(k) - epsilon;
        probe.set_classical_params(work);
        const double down = reference_loss(probe, features, label, teacher_logits, cfg);
        work(k) = theta_c(k);
        g.classical(k) = (up - down) / (2 * epsilon);
    }
    probe.set_classical_params(theta_c);

    const Eigen::VectorXd theta_q = model.quantum_params;
    g.quantum.resize(theta_q.size());
    Eigen::VectorXd wq = theta_q;
    for (Eigen::Index k = 0; k < theta_q.size(); ++k) {
        wq(k) = theta_q(k) + epsilon;
        probe.set_quantum_params(wq);
        const double up = reference_loss(probe, features, label, teacher_logits, cfg);
        wq(k) = theta_q(k) - epsilon;
        probe.set_quantum_params(wq);
        const double down = reference_loss(probe, features, label, teacher_logits, cfg);
        wq(k) = theta_q(k);
        g.quantum(k) = (up - down) / (2 * epsilon);
    }
    return g;
}

}  // namespace qtl::oracle
