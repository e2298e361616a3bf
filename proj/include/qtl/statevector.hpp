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
 * Dense statevector simulation of small qubit registers.
 *
 * Qubit ordering follows the big-endian wire convention: qubit 0 is the most
 * significant bit of the amplitude index, so for n = 2 the index of |q0 q1>
 * is 2*q0 + q1. Rotations use R_P(theta) = exp(-i theta P / 2).
 */

#pragma once

#include <Eigen/Core>

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qtl/errors.hpp"

namespace qtl {

/// Largest register the simulator accepts.
inline constexpr int kMaxQubits = 12;

enum class GateKind { RX, RY, RZ, H, CNOT, CZ };

constexpr bool is_rotation(GateKind kind) {
    return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

constexpr int gate_arity(GateKind kind) {
    return (kind == GateKind::CNOT || kind == GateKind::CZ) ? 2 : 1;
}

inline const char *gate_name(GateKind kind) {
    switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::H: return "H";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    }
    return "?";
}

template <typename Scalar = double>
class StateVector {
  public:
    using Complex = std::complex<Scalar>;
    using Amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
    using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    StateVector(int n_qubits, Amplitudes amplitudes)
        : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
        if (n_qubits_ < 1 || n_qubits_ > kMaxQubits) {
            throw CapacityError("register of " + std::to_string(n_qubits_) +
                                " qubits outside [1, " +
                                std::to_string(kMaxQubits) + "]");
        }
        if (amplitudes_.size() != (Eigen::Index{1} << n_qubits_)) {
            throw ShapeError("amplitude count " +
                             std::to_string(amplitudes_.size()) +
                             " does not equal 2^" + std::to_string(n_qubits_));
        }
    }

    [[nodiscard]] int n_qubits() const { return n_qubits_; }
    [[nodiscard]] Eigen::Index dim() const { return amplitudes_.size(); }
    [[nodiscard]] const Amplitudes &amplitudes() const { return amplitudes_; }
    Amplitudes &amplitudes() { return amplitudes_; }

    [[nodiscard]] Scalar squared_norm() const { return amplitudes_.squaredNorm(); }

    [[nodiscard]] RealVector probabilities() const {
        return amplitudes_.cwiseAbs2();
    }

  private:
    int n_qubits_;
    Amplitudes amplitudes_;
};

/// One elementary gate. Rotations carry either a fixed angle or a slot into
/// the parameter vector of the enclosing program.
template <typename Scalar = double>
struct GateOp {
    GateKind kind = GateKind::H;
    std::vector<int> targets;
    std::optional<Scalar> angle;
    std::optional<int> param_slot;

    static GateOp rotation(GateKind kind, int qubit, Scalar angle) {
        return {kind, {qubit}, angle, std::nullopt};
    }
    static GateOp rotation_slot(GateKind kind, int qubit, int slot) {
        return {kind, {qubit}, std::nullopt, slot};
    }
    static GateOp rx(int q, Scalar a) { return rotation(GateKind::RX, q, a); }
    static GateOp ry(int q, Scalar a) { return rotation(GateKind::RY, q, a); }
    static GateOp rz(int q, Scalar a) { return rotation(GateKind::RZ, q, a); }
    static GateOp h(int q) { return {GateKind::H, {q}, std::nullopt, std::nullopt}; }
    static GateOp cnot(int control, int target) {
        return {GateKind::CNOT, {control, target}, std::nullopt, std::nullopt};
    }
    static GateOp cz(int a, int b) {
        return {GateKind::CZ, {a, b}, std::nullopt, std::nullopt};
    }
};

/// Ordered gate list with a flat parameter vector of `param_count` slots.
template <typename Scalar = double>
struct CircuitProgram {
    int n_qubits = 1;
    std::vector<GateOp<Scalar>> ops;
    int param_count = 0;

    CircuitProgram &add(GateOp<Scalar> op) {
        ops.push_back(std::move(op));
        return *this;
    }

    /// Appends a rotation bound to a fresh slot and returns that slot.
    int add_parameterized(GateKind kind, int qubit) {
        const int slot = param_count++;
        ops.push_back(GateOp<Scalar>::rotation_slot(kind, qubit, slot));
        return slot;
    }

    /// Checks slot ranges and that every slot is referenced at least once.
    void validate() const {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw CapacityError("program width " + std::to_string(n_qubits));
        }
        if (param_count < 0) {
            throw ShapeError("negative param_count");
        }
        std::vector<bool> used(static_cast<std::size_t>(param_count), false);
        for (const auto &op : ops) {
            if (op.param_slot) {
                const int slot = *op.param_slot;
                if (slot < 0 || slot >= param_count) {
                    throw ShapeError("param_slot " + std::to_string(slot) +
                                     " outside [0, " +
                                     std::to_string(param_count) + ")");
                }
                used[static_cast<std::size_t>(slot)] = true;
            }
        }
        for (int k = 0; k < param_count; ++k) {
            if (!used[static_cast<std::size_t>(k)]) {
                throw ShapeError("param_slot " + std::to_string(k) +
                                 " is never referenced");
            }
        }
    }
};

enum class PauliLetter : std::uint8_t { I, Z };

/// Tensor product of per-qubit letters. Only I and Z are supported.
class PauliString {
  public:
    PauliString() = default;
    explicit PauliString(std::vector<PauliLetter> letters)
        : letters_(std::move(letters)) {}

    /// Z on each listed qubit, identity elsewhere.
    static PauliString z_on(int n_qubits, std::span<const int> qubits) {
        std::vector<PauliLetter> letters(static_cast<std::size_t>(n_qubits),
                                         PauliLetter::I);
        for (int q : qubits) {
            if (q < 0 || q >= n_qubits) {
                throw ShapeError("Pauli support qubit " + std::to_string(q) +
                                 " outside register of " +
                                 std::to_string(n_qubits));
            }
            letters[static_cast<std::size_t>(q)] = PauliLetter::Z;
        }
        return PauliString(std::move(letters));
    }
    static PauliString z_on(int n_qubits, std::initializer_list<int> qubits) {
        return z_on(n_qubits, std::span<const int>(qubits.begin(), qubits.size()));
    }

    [[nodiscard]] int n_qubits() const { return static_cast<int>(letters_.size()); }
    [[nodiscard]] const std::vector<PauliLetter> &letters() const { return letters_; }

    [[nodiscard]] std::vector<int> support() const {
        std::vector<int> out;
        for (std::size_t q = 0; q < letters_.size(); ++q) {
            if (letters_[q] != PauliLetter::I) {
                out.push_back(static_cast<int>(q));
            }
        }
        return out;
    }

    [[nodiscard]] int weight() const { return static_cast<int>(support().size()); }

    /// Bit mask over amplitude indices selecting the supported qubits.
    [[nodiscard]] std::uint64_t index_mask() const {
        std::uint64_t mask = 0;
        const int n = n_qubits();
        for (int q = 0; q < n; ++q) {
            if (letters_[static_cast<std::size_t>(q)] == PauliLetter::Z) {
                mask |= std::uint64_t{1} << (n - 1 - q);
            }
        }
        return mask;
    }

    [[nodiscard]] std::string to_string() const {
        std::string s;
        for (auto l : letters_) s.push_back(l == PauliLetter::Z ? 'Z' : 'I');
        return s;
    }

    friend bool operator==(const PauliString &, const PauliString &) = default;

  private:
    std::vector<PauliLetter> letters_;
};

// ---------------------------------------------------------------------------
// State preparation

template <typename Scalar = double>
StateVector<Scalar> init_zero(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw CapacityError("init_zero: " + std::to_string(n_qubits) +
                            " qubits outside [1, " + std::to_string(kMaxQubits) +
                            "]");
    }
    typename StateVector<Scalar>::Amplitudes amps =
        StateVector<Scalar>::Amplitudes::Zero(Eigen::Index{1} << n_qubits);
    amps(0) = 1;
    return StateVector<Scalar>(n_qubits, std::move(amps));
}

/// Loads v / ||v|| into the amplitudes of a log2(len)-qubit register.
/// Amplitudes are real; no phase is assigned.
template <typename Derived>
StateVector<typename Derived::Scalar>
amplitude_encode(const Eigen::MatrixBase<Derived> &v) {
    using Scalar = typename Derived::Scalar;
    const auto len = static_cast<std::uint64_t>(v.size());
    if (len < 2 || !std::has_single_bit(len)) {
        throw ShapeError("amplitude_encode: length " + std::to_string(len) +
                         " is not a power of two >= 2");
    }
    const int n = std::countr_zero(len);
    if (n > kMaxQubits) {
        throw CapacityError("amplitude_encode: needs " + std::to_string(n) +
                            " qubits");
    }
    const Scalar norm = v.norm();
    if (!(norm > 0) || !std::isfinite(norm)) {
        throw DegenerateInputError("amplitude_encode: vector norm is " +
                                   std::to_string(norm));
    }
    typename StateVector<Scalar>::Amplitudes amps =
        (v.derived() / norm).template cast<std::complex<Scalar>>();
    return StateVector<Scalar>(n, std::move(amps));
}

// ---------------------------------------------------------------------------
// Gate application

/// 2x2 matrix of a single-qubit gate.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 2, 2> gate_matrix(GateKind kind, Scalar angle) {
    using C = std::complex<Scalar>;
    Eigen::Matrix<C, 2, 2> m;
    const Scalar c = std::cos(angle / 2);
    const Scalar s = std::sin(angle / 2);
    switch (kind) {
    case GateKind::RX:
        m << C(c, 0), C(0, -s), C(0, -s), C(c, 0);
        break;
    case GateKind::RY:
        m << C(c, 0), C(-s, 0), C(s, 0), C(c, 0);
        break;
    case GateKind::RZ:
        m << C(c, -s), C(0, 0), C(0, 0), C(c, s);
        break;
    case GateKind::H: {
        const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
        m << C(r, 0), C(r, 0), C(r, 0), C(-r, 0);
        break;
    }
    default:
        throw MalformedGateError(std::string("gate_matrix: ") + gate_name(kind) +
                                 " is not a single-qubit gate");
    }
    return m;
}

/// Checks arity and target ranges. The angle rule is checked by callers since
/// it differs between a free-standing gate and a program op.
template <typename Scalar>
void validate_targets(const GateOp<Scalar> &gate, int n_qubits) {
    const int arity = gate_arity(gate.kind);
    if (static_cast<int>(gate.targets.size()) != arity) {
        throw ShapeError(std::string(gate_name(gate.kind)) + " expects " +
                         std::to_string(arity) + " target(s), got " +
                         std::to_string(gate.targets.size()));
    }
    for (int q : gate.targets) {
        if (q < 0 || q >= n_qubits) {
            throw ShapeError(std::string(gate_name(gate.kind)) + " target " +
                             std::to_string(q) + " outside register of " +
                             std::to_string(n_qubits));
        }
    }
    if (arity == 2 && gate.targets[0] == gate.targets[1]) {
        throw ShapeError(std::string(gate_name(gate.kind)) +
                         " with duplicate targets");
    }
}

/// Applies `gate` in place, with `angle` used for rotations.
template <typename Scalar>
void apply_gate_inplace(StateVector<Scalar> &state, GateKind kind,
                        std::span<const int> targets, Scalar angle) {
    using C = std::complex<Scalar>;
    auto &a = state.amplitudes();
    const int n = state.n_qubits();
    const Eigen::Index dim = state.dim();

    if (kind == GateKind::CNOT) {
        const Eigen::Index cbit = Eigen::Index{1} << (n - 1 - targets[0]);
        const Eigen::Index tbit = Eigen::Index{1} << (n - 1 - targets[1]);
        for (Eigen::Index i = 0; i < dim; ++i) {
            if ((i & cbit) && !(i & tbit)) std::swap(a(i), a(i | tbit));
        }
        return;
    }
    if (kind == GateKind::CZ) {
        const Eigen::Index mask = (Eigen::Index{1} << (n - 1 - targets[0])) |
                                  (Eigen::Index{1} << (n - 1 - targets[1]));
        for (Eigen::Index i = 0; i < dim; ++i) {
            if ((i & mask) == mask) a(i) = -a(i);
        }
        return;
    }

    // Single-qubit kernels in real arithmetic; std::complex products go
    // through the NaN-checking library routine without -ffast-math.
    const Eigen::Index stride = Eigen::Index{1} << (n - 1 - targets[0]);
    const Scalar c = std::cos(angle / 2);
    const Scalar s = std::sin(angle / 2);
    auto pairs = [&](auto &&update) {
        for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
            for (Eigen::Index i = base; i < base + stride; ++i) {
                update(a(i), a(i + stride));
            }
        }
    };
    switch (kind) {
    case GateKind::RZ:
        // diag(e^{-i angle/2}, e^{+i angle/2})
        pairs([&](C &x, C &y) {
            x = C(c * x.real() + s * x.imag(), c * x.imag() - s * x.real());
            y = C(c * y.real() - s * y.imag(), c * y.imag() + s * y.real());
        });
        return;
    case GateKind::RY:
        pairs([&](C &x, C &y) {
            const C x0 = x;
            x = C(c * x0.real() - s * y.real(), c * x0.imag() - s * y.imag());
            y = C(s * x0.real() + c * y.real(), s * x0.imag() + c * y.imag());
        });
        return;
    case GateKind::RX:
        // [[c, -i s], [-i s, c]]
        pairs([&](C &x, C &y) {
            const C x0 = x;
            x = C(c * x0.real() + s * y.imag(), c * x0.imag() - s * y.real());
            y = C(c * y.real() + s * x0.imag(), c * y.imag() - s * x0.real());
        });
        return;
    case GateKind::H: {
        const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
        pairs([&](C &x, C &y) {
            const C x0 = x;
            x = C(r * (x0.real() + y.real()), r * (x0.imag() + y.imag()));
            y = C(r * (x0.real() - y.real()), r * (x0.imag() - y.imag()));
        });
        return;
    }
    default: break;
    }
}

/// Applies a free-standing gate. Rotations must carry a fixed angle.
template <typename Scalar>
StateVector<Scalar> apply_gate(StateVector<Scalar> state,
                               const GateOp<Scalar> &gate) {
    validate_targets(gate, state.n_qubits());
    if (is_rotation(gate.kind) != gate.angle.has_value()) {
        throw MalformedGateError(std::string(gate_name(gate.kind)) +
                                 (gate.angle ? " must not carry an angle"
                                             : " requires an angle"));
    }
    apply_gate_inplace(state, gate.kind, gate.targets, gate.angle.value_or(0));
    return state;
}

/// Resolves the angle an op uses under `params`.
template <typename Scalar, typename ParamVec>
Scalar resolve_angle(const GateOp<Scalar> &op, const ParamVec &params) {
    if (op.param_slot) return static_cast<Scalar>(params[*op.param_slot]);
    return op.angle.value_or(Scalar(0));
}

template <typename Scalar>
void validate_program_ops(const CircuitProgram<Scalar> &program) {
    for (const auto &op : program.ops) {
        validate_targets(op, program.n_qubits);
        if (is_rotation(op.kind)) {
            if (!op.angle && !op.param_slot) {
                throw MalformedGateError(std::string(gate_name(op.kind)) +
                                         " has neither angle nor param_slot");
            }
        } else if (op.angle || op.param_slot) {
            throw MalformedGateError(std::string(gate_name(op.kind)) +
                                     " must not carry an angle or param_slot");
        }
    }
}

/// Applies ops [first, last) in place without validation.
template <typename Scalar, typename ParamVec>
void apply_ops_inplace(StateVector<Scalar> &state,
                       const CircuitProgram<Scalar> &program,
                       const ParamVec &params, std::size_t first,
                       std::size_t last) {
    for (std::size_t k = first; k < last; ++k) {
        const auto &op = program.ops[k];
        apply_gate_inplace(state, op.kind, std::span<const int>(op.targets),
                           resolve_angle(op, params));
    }
}

template <typename Scalar, typename ParamDerived>
void check_program_inputs(const CircuitProgram<Scalar> &program,
                          const Eigen::MatrixBase<ParamDerived> &params,
                          const StateVector<Scalar> &input) {
    program.validate();
    validate_program_ops(program);
    if (params.size() != program.param_count) {
        throw ShapeError("run_program: " + std::to_string(params.size()) +
                         " params for " + std::to_string(program.param_count) +
                         " slots");
    }
    if (input.n_qubits() != program.n_qubits) {
        throw ShapeError("run_program: input has " +
                         std::to_string(input.n_qubits()) + " qubits, program " +
                         std::to_string(program.n_qubits));
    }
}

/// Executes `program` on `input` with slot angles taken from `params`.
template <typename Scalar, typename ParamDerived>
StateVector<Scalar> run_program(const CircuitProgram<Scalar> &program,
                                const Eigen::MatrixBase<ParamDerived> &params,
                                StateVector<Scalar> input) {
    check_program_inputs(program, params, input);
    apply_ops_inplace(input, program, params.derived(), 0, program.ops.size());
    return input;
}

// ---------------------------------------------------------------------------
// Measurement

template <typename Scalar>
void check_observable(const StateVector<Scalar> &state,
                      const PauliString &observable) {
    if (observable.n_qubits() != state.n_qubits()) {
        throw ShapeError("observable on " + std::to_string(observable.n_qubits()) +
                         " qubits, state has " + std::to_string(state.n_qubits()));
    }
    if (observable.weight() < 1) {
        throw ShapeError("observable has empty support");
    }
}

template <typename ProbDerived>
typename ProbDerived::Scalar
z_expectation_from_probabilities(const Eigen::MatrixBase<ProbDerived> &probs,
                                 std::uint64_t mask) {
    using Scalar = typename ProbDerived::Scalar;
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const bool odd = std::popcount(static_cast<std::uint64_t>(i) & mask) & 1;
        acc += odd ? -probs(i) : probs(i);
    }
    return acc;
}

/// <psi|M|psi> for a Z-type Pauli string.
template <typename Scalar>
Scalar expectation(const StateVector<Scalar> &state, const PauliString &observable) {
    check_observable(state, observable);
    return z_expectation_from_probabilities(state.probabilities(),
                                            observable.index_mask());
}

/// Expectations of several observables sharing one probability sweep.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1>
expectations(const StateVector<Scalar> &state,
             std::span<const PauliString> observables) {
    for (const auto &obs : observables) check_observable(state, obs);
    const auto probs = state.probabilities();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(
        static_cast<Eigen::Index>(observables.size()));
    for (std::size_t j = 0; j < observables.size(); ++j) {
        out(static_cast<Eigen::Index>(j)) =
            z_expectation_from_probabilities(probs, observables[j].index_mask());
    }
    return out;
}

using StateVectorD = StateVector<double>;
using GateOpD = GateOp<double>;
using CircuitProgramD = CircuitProgram<double>;

}  // namespace qtl
