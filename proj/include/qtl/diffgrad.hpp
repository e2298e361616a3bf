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
 * Gradients of circuit expectation values with respect to rotation angles.
 *
 * The production path is the two-term parameter-shift rule
 *   dE/dtheta_k = 1/2 [E(theta + pi/2 e_k) - E(theta - pi/2 e_k)],
 * which is exact for generators with eigenvalues +-1/2. A slot that feeds
 * several gates receives the sum of the per-occurrence shift terms.
 * Central finite differences are provided as an independent check.
 */

#pragma once

#include <Eigen/Core>

#include <numbers>
#include <span>
#include <string>

#include "qtl/errors.hpp"
#include "qtl/statevector.hpp"

namespace qtl {

template <typename Scalar = double>
struct GradientTape {
    /// dE/dslot aligned with CircuitProgram::param_count.
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> quantum_grads;
    /// Row j holds d z_j / d slot.
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> observable_jacobian;

    [[nodiscard]] bool all_finite() const {
        return quantum_grads.allFinite() && observable_jacobian.allFinite();
    }
};

template <typename Scalar>
void check_shift_generators(const CircuitProgram<Scalar> &program) {
    for (const auto &op : program.ops) {
        if (op.param_slot && !is_rotation(op.kind)) {
            throw UnsupportedGeneratorError(
                std::string("param_slot on non-rotation gate ") +
                gate_name(op.kind));
        }
    }
}

/// Jacobian d z_j / d slot_k of every observable over every slot.
///
/// Each parameterized op is shifted once per sign; the suffix of the program
/// is replayed from a running prefix state, so the cost is one suffix replay
/// per shift rather than a full program.
template <typename Scalar, typename ParamDerived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>
parameter_shift_jacobian(const CircuitProgram<Scalar> &program,
                         const Eigen::MatrixBase<ParamDerived> &params,
                         const StateVector<Scalar> &input_state,
                         std::span<const PauliString> observables) {
    check_shift_generators(program);
    check_program_inputs(program, params, input_state);
    for (const auto &obs : observables) check_observable(input_state, obs);

    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const auto m = static_cast<Eigen::Index>(observables.size());
    Matrix jac = Matrix::Zero(m, program.param_count);
    if (program.param_count == 0 || m == 0) return jac;

    const Scalar shift = std::numbers::pi_v<Scalar> / 2;
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> theta = params.derived();
    const std::size_t n_ops = program.ops.size();

    StateVector<Scalar> prefix = input_state;
    for (std::size_t k = 0; k < n_ops; ++k) {
        const auto &op = program.ops[k];
        const Scalar angle = resolve_angle(op, theta);
        if (op.param_slot) {
            StateVector<Scalar> plus = prefix;
            apply_gate_inplace(plus, op.kind, std::span<const int>(op.targets),
                               angle + shift);
            apply_ops_inplace(plus, program, theta, k + 1, n_ops);

            StateVector<Scalar> minus = prefix;
            apply_gate_inplace(minus, op.kind, std::span<const int>(op.targets),
                               angle - shift);
            apply_ops_inplace(minus, program, theta, k + 1, n_ops);

            const auto e_plus = expectations(plus, observables);
            const auto e_minus = expectations(minus, observables);
            jac.col(*op.param_slot) += Scalar(0.5) * (e_plus - e_minus);
        }
        apply_gate_inplace(prefix, op.kind, std::span<const int>(op.targets), angle);
    }
    return jac;
}

template <typename Scalar, typename ParamDerived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1>
parameter_shift_gradient(const CircuitProgram<Scalar> &program,
                         const Eigen::MatrixBase<ParamDerived> &params,
                         const StateVector<Scalar> &input_state,
                         const PauliString &observable) {
    const auto jac = parameter_shift_jacobian(
        program, params, input_state, std::span<const PauliString>(&observable, 1));
    return jac.row(0).transpose();
}

/// Both the per-slot gradient of `observables[0]` and the full Jacobian.
template <typename Scalar, typename ParamDerived>
GradientTape<Scalar> gradient_tape(const CircuitProgram<Scalar> &program,
                                   const Eigen::MatrixBase<ParamDerived> &params,
                                   const StateVector<Scalar> &input_state,
                                   std::span<const PauliString> observables) {
    GradientTape<Scalar> tape;
    tape.observable_jacobian =
        parameter_shift_jacobian(program, params, input_state, observables);
    tape.quantum_grads = tape.observable_jacobian.rows() > 0
                             ? Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(
                                   tape.observable_jacobian.row(0).transpose())
                             : Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(
                                   program.param_count);
    return tape;
}

/// Central differences [E(theta + eps e_k) - E(theta - eps e_k)] / (2 eps).
template <typename Scalar, typename ParamDerived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1>
finite_difference_gradient(const CircuitProgram<Scalar> &program,
                           const Eigen::MatrixBase<ParamDerived> &params,
                           const StateVector<Scalar> &input_state,
                           const PauliString &observable, Scalar epsilon) {
    if (!(epsilon > 0)) {
        throw DegenerateInputError("finite_difference_gradient: epsilon must be > 0");
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> theta = params.derived();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad(program.param_count);
    check_program_inputs(program, theta, input_state);
    for (Eigen::Index k = 0; k < program.param_count; ++k) {
        const Scalar saved = theta(k);
        theta(k) = saved + epsilon;
        const Scalar up = expectation(run_program(program, theta, input_state), observable);
        theta(k) = saved - epsilon;
        const Scalar down =
            expectation(run_program(program, theta, input_state), observable);
        theta(k) = saved;
        grad(k) = (up - down) / (2 * epsilon);
    }
    return grad;
}

}  // namespace qtl
