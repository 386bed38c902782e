// Copyright 2025 The qscene developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Adjoint-mode differentiation of circuit expectation values.
 *
 * For U_k(t) = exp(-i t G_k / 2) and a Hermitian diagonal observable D,
 *
 *     d<D>/dt_k = Im( <lambda_k| G_k |psi_k> ),
 *
 * where |psi_k> is the state after gates 1..k and
 * |lambda_k> = U_{k+1}^dag ... U_L^dag D |psi_L>. One forward pass plus one
 * backward sweep per observable recovers every parameter derivative; no
 * gate is re-simulated per parameter. Working set: the forward state, one
 * adjoint vector, and the caller's copy, i.e. three statevectors.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "simulator.hpp"

namespace qscene {

namespace detail {

/// Im(<lambda| G |ket>) for the generator G of a parameterized gate kind.
inline double generator_overlap_im(const Statevector &lambda,
                                   const Statevector &ket, const Gate &gate) {
    const std::size_t dim = ket.dim();
    Complex acc{0.0, 0.0};
    switch (gate.kind) {
    case GateKind::RX: { // G = X
        const std::size_t s = ket.stride(gate.q0);
        for (std::size_t i = 0; i < dim; ++i) {
            acc += std::conj(lambda.amplitudes[i]) * ket.amplitudes[i ^ s];
        }
        break;
    }
    case GateKind::RY: { // G = Y
        const std::size_t s = ket.stride(gate.q0);
        const Complex mi{0.0, -1.0};
        const Complex pi{0.0, 1.0};
        for (std::size_t i = 0; i < dim; ++i) {
            const Complex factor = ((i & s) == 0) ? mi : pi;
            acc +=
                std::conj(lambda.amplitudes[i]) * factor * ket.amplitudes[i ^ s];
        }
        break;
    }
    case GateKind::RZ: { // G = Z
        const std::size_t s = ket.stride(gate.q0);
        for (std::size_t i = 0; i < dim; ++i) {
            const Complex term =
                std::conj(lambda.amplitudes[i]) * ket.amplitudes[i];
            acc += ((i & s) == 0) ? term : -term;
        }
        break;
    }
    case GateKind::RZZ: { // G = Z(x)Z
        const std::size_t sa = ket.stride(gate.q0);
        const std::size_t sb = ket.stride(gate.q1);
        for (std::size_t i = 0; i < dim; ++i) {
            const Complex term =
                std::conj(lambda.amplitudes[i]) * ket.amplitudes[i];
            acc += (((i & sa) != 0) == ((i & sb) != 0)) ? term : -term;
        }
        break;
    }
    default:
        throw UnsupportedError(
            std::string("no generator known for parameterized gate '") +
            gate_name(gate.kind) + "'");
    }
    return acc.imag();
}

} // namespace detail

/**
 * @brief Gradient of <psi| diag(d) |psi> with respect to every parameter
 * slot, via one backward sweep.
 *
 * @param program Circuit whose slot-driven gates are differentiated.
 * @param params Current parameter vector.
 * @param diag Real diagonal observable, length 2^n_qubits.
 * @param forward Optional precomputed run_circuit(program, params) state.
 */
inline std::vector<double>
adjoint_gradient_diagonal(const CircuitProgram &program,
                          const std::vector<double> &params,
                          const std::vector<double> &diag,
                          const Statevector *forward = nullptr) {
    QSCENE_REQUIRE(params.size() == static_cast<std::size_t>(program.n_params),
                   "parameter vector length mismatch");
    for (const Gate &g : program.gates) {
        if (g.param_slot >= 0 && !is_parameterized(g.kind)) {
            throw UnsupportedError(
                std::string("no generator known for parameterized gate '") +
                gate_name(g.kind) + "'");
        }
    }
    std::vector<double> grads(static_cast<std::size_t>(program.n_params), 0.0);
    if (program.n_params == 0) {
        return grads;
    }

    Statevector ket = forward != nullptr ? *forward
                                         : run_circuit(program, params);
    QSCENE_REQUIRE(diag.size() == ket.dim(),
                   "diagonal observable length mismatch");
    Statevector lambda = ket;
    for (std::size_t i = 0; i < lambda.dim(); ++i) {
        lambda.amplitudes[i] *= diag[i];
    }

    for (std::size_t k = program.gates.size(); k-- > 0;) {
        const Gate &g = program.gates[k];
        if (g.param_slot >= 0) {
            // ket currently holds |psi_k>; the -1/2 generator prefactor and
            // the conjugate term together reduce to a single Im(...).
            grads[static_cast<std::size_t>(g.param_slot)] +=
                detail::generator_overlap_im(lambda, ket, g);
        }
        const std::optional<double> angle =
            is_parameterized(g.kind)
                ? std::optional<double>{resolve_angle(g, params)}
                : std::nullopt;
        apply_gate_inverse(ket, g, angle);
        apply_gate_inverse(lambda, g, angle);
    }
    return grads;
}

/**
 * @brief d<Z_q>/d theta_k for every observed qubit q and parameter slot k.
 *
 * Returns a matrix of shape |observed_qubits| x n_params; one backward
 * sweep per observable.
 */
inline std::vector<std::vector<double>>
adjoint_gradients(const CircuitProgram &program,
                  const std::vector<double> &params,
                  const std::vector<int> &observed_qubits) {
    for (int q : observed_qubits) {
        QSCENE_REQUIRE(q >= 0 && q < program.n_qubits,
                       "observed qubit out of range");
    }
    const Statevector forward = run_circuit(program, params);
    std::vector<std::vector<double>> jacobian;
    jacobian.reserve(observed_qubits.size());
    for (int q : observed_qubits) {
        std::vector<double> diag(forward.dim());
        const std::size_t s = forward.stride(q);
        for (std::size_t i = 0; i < diag.size(); ++i) {
            diag[i] = ((i & s) == 0) ? 1.0 : -1.0;
        }
        jacobian.push_back(
            adjoint_gradient_diagonal(program, params, diag, &forward));
    }
    return jacobian;
}

} // namespace qscene
