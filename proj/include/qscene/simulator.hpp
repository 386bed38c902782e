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
 * Dense statevector simulation: gate application, exact Z expectations, and
 * seeded shot sampling.
 *
 * Basis-state indices put qubit 0 in the MOST significant bit, so for an
 * n-qubit register the bit of qubit q inside index i is (i >> (n-1-q)) & 1.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "util.hpp"

namespace qscene {

using Complex = std::complex<double>;

/// 2^n complex amplitudes describing an n-qubit pure state.
struct Statevector {
    int n_qubits = 0;
    std::vector<Complex> amplitudes;

    [[nodiscard]] std::size_t dim() const { return amplitudes.size(); }

    [[nodiscard]] double norm_sq() const {
        double s = 0.0;
        for (const Complex &a : amplitudes) {
            s += std::norm(a);
        }
        return s;
    }

    /// Stride of qubit q: its bit position within an index is n-1-q.
    [[nodiscard]] std::size_t stride(int qubit) const {
        return std::size_t{1} << (n_qubits - 1 - qubit);
    }
};

constexpr int kMaxQubits = 30;

/// Ground state |0...0> on n_qubits.
inline Statevector init_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw CapacityError("n_qubits must be in [1, " +
                            std::to_string(kMaxQubits) + "], got " +
                            std::to_string(n_qubits));
    }
    Statevector state;
    state.n_qubits = n_qubits;
    state.amplitudes.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    state.amplitudes[0] = Complex{1.0, 0.0};
    return state;
}

namespace detail {

/// Apply a dense 2x2 matrix {{u00, u01}, {u10, u11}} to one qubit.
inline void apply_1q_matrix(Statevector &state, int qubit, Complex u00,
                            Complex u01, Complex u10, Complex u11) {
    const std::size_t s = state.stride(qubit);
    const std::size_t dim = state.dim();
    for (std::size_t base = 0; base < dim; base += 2 * s) {
        for (std::size_t off = 0; off < s; ++off) {
            const std::size_t i0 = base + off;
            const std::size_t i1 = i0 + s;
            const Complex a0 = state.amplitudes[i0];
            const Complex a1 = state.amplitudes[i1];
            state.amplitudes[i0] = u00 * a0 + u01 * a1;
            state.amplitudes[i1] = u10 * a0 + u11 * a1;
        }
    }
}

inline void apply_rz(Statevector &state, int qubit, double theta) {
    const Complex p0 = std::polar(1.0, -theta / 2.0);
    const Complex p1 = std::polar(1.0, +theta / 2.0);
    const std::size_t s = state.stride(qubit);
    const std::size_t dim = state.dim();
    for (std::size_t base = 0; base < dim; base += 2 * s) {
        for (std::size_t off = 0; off < s; ++off) {
            state.amplitudes[base + off] *= p0;
            state.amplitudes[base + off + s] *= p1;
        }
    }
}

inline void apply_cx(Statevector &state, int control, int target) {
    const std::size_t sc = state.stride(control);
    const std::size_t st = state.stride(target);
    const std::size_t dim = state.dim();
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & sc) != 0 && (i & st) == 0) {
            std::swap(state.amplitudes[i], state.amplitudes[i | st]);
        }
    }
}

inline void apply_cz(Statevector &state, int qa, int qb) {
    const std::size_t sa = state.stride(qa);
    const std::size_t sb = state.stride(qb);
    const std::size_t dim = state.dim();
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & sa) != 0 && (i & sb) != 0) {
            state.amplitudes[i] = -state.amplitudes[i];
        }
    }
}

/// rzz(t) = exp(-i t ZZ / 2): phase -t/2 on aligned bits, +t/2 otherwise.
inline void apply_rzz(Statevector &state, int qa, int qb, double theta) {
    const Complex aligned = std::polar(1.0, -theta / 2.0);
    const Complex anti = std::polar(1.0, +theta / 2.0);
    const std::size_t sa = state.stride(qa);
    const std::size_t sb = state.stride(qb);
    const std::size_t dim = state.dim();
    for (std::size_t i = 0; i < dim; ++i) {
        const bool ba = (i & sa) != 0;
        const bool bb = (i & sb) != 0;
        state.amplitudes[i] *= (ba == bb) ? aligned : anti;
    }
}

} // namespace detail

/**
 * @brief Apply one gate; `angle` overrides the gate's bound angle.
 *
 * Parameterized kinds need an angle from either source; passing an angle to
 * a non-parameterized kind is a contract violation.
 */
inline void apply_gate(Statevector &state, const Gate &gate,
                       std::optional<double> angle = std::nullopt) {
    QSCENE_REQUIRE(gate.q0 >= 0 && gate.q0 < state.n_qubits,
                   "gate target out of range");
    if (is_two_qubit(gate.kind)) {
        QSCENE_REQUIRE(gate.q1 >= 0 && gate.q1 < state.n_qubits,
                       "gate target out of range");
        QSCENE_REQUIRE(gate.q0 != gate.q1,
                       "two-qubit gate requires distinct targets");
    }
    double theta = 0.0;
    if (is_parameterized(gate.kind)) {
        if (angle.has_value()) {
            theta = *angle;
        } else if (gate.has_angle) {
            theta = gate.angle;
        } else {
            throw ContractError(std::string("missing angle for ") +
                                gate_name(gate.kind));
        }
    } else {
        QSCENE_REQUIRE(!angle.has_value(),
                       std::string(gate_name(gate.kind)) + " takes no angle");
    }

    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    switch (gate.kind) {
    case GateKind::RX:
        detail::apply_1q_matrix(state, gate.q0, Complex{c, 0.0},
                                Complex{0.0, -s}, Complex{0.0, -s},
                                Complex{c, 0.0});
        break;
    case GateKind::RY:
        detail::apply_1q_matrix(state, gate.q0, Complex{c, 0.0},
                                Complex{-s, 0.0}, Complex{s, 0.0},
                                Complex{c, 0.0});
        break;
    case GateKind::RZ:
        detail::apply_rz(state, gate.q0, theta);
        break;
    case GateKind::RZZ:
        detail::apply_rzz(state, gate.q0, gate.q1, theta);
        break;
    case GateKind::CX:
        detail::apply_cx(state, gate.q0, gate.q1);
        break;
    case GateKind::CZ:
        detail::apply_cz(state, gate.q0, gate.q1);
        break;
    case GateKind::H: {
        const double r = 1.0 / std::sqrt(2.0);
        detail::apply_1q_matrix(state, gate.q0, Complex{r, 0.0},
                                Complex{r, 0.0}, Complex{r, 0.0},
                                Complex{-r, 0.0});
        break;
    }
    }
}

/// Apply the inverse of a gate (rotations with negated angle; the rest are
/// self-inverse).
inline void apply_gate_inverse(Statevector &state, const Gate &gate,
                               std::optional<double> angle = std::nullopt) {
    if (is_parameterized(gate.kind)) {
        double theta = angle.has_value() ? *angle : gate.angle;
        QSCENE_REQUIRE(angle.has_value() || gate.has_angle,
                       "missing angle for inverse gate");
        apply_gate(state, gate, -theta);
    } else {
        apply_gate(state, gate);
    }
}

/// Run every gate of `program` on |0...0>, reading slot angles from params.
inline Statevector run_circuit(const CircuitProgram &program,
                               const std::vector<double> &params) {
    QSCENE_REQUIRE(params.size() == static_cast<std::size_t>(program.n_params),
                   "parameter vector length mismatch: expected " +
                       std::to_string(program.n_params) + ", got " +
                       std::to_string(params.size()));
    Statevector state = init_state(program.n_qubits);
    for (const Gate &g : program.gates) {
        if (is_parameterized(g.kind)) {
            apply_gate(state, g, resolve_angle(g, params));
        } else {
            apply_gate(state, g);
        }
    }
    return state;
}

/// <Z_q> = sum |a_i|^2 * (+1 if bit q of i is 0 else -1) = 2 P(0) - 1.
inline double expectation_z(const Statevector &state, int qubit) {
    QSCENE_REQUIRE(qubit >= 0 && qubit < state.n_qubits,
                   "qubit out of range");
    const std::size_t s = state.stride(qubit);
    const std::size_t dim = state.dim();
    double e = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double p = std::norm(state.amplitudes[i]);
        e += ((i & s) == 0) ? p : -p;
    }
    return e;
}

/**
 * @brief Draw `shots` bitstrings from |amplitudes|^2 and count 0-outcomes
 * per requested qubit. Deterministic given the seed; P-hat_i = count_i/shots.
 */
inline std::vector<std::int64_t>
sample_shots(const Statevector &state, const std::vector<int> &qubits,
             std::int64_t shots, std::uint64_t seed) {
    QSCENE_REQUIRE(shots >= 1, "shots must be >= 1");
    for (int q : qubits) {
        QSCENE_REQUIRE(q >= 0 && q < state.n_qubits, "qubit out of range");
    }
    const std::size_t dim = state.dim();
    std::vector<double> cdf(dim);
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        acc += std::norm(state.amplitudes[i]);
        cdf[i] = acc;
    }
    // Guard the tail against rounding so every draw lands in range.
    cdf[dim - 1] = acc > 1.0 ? acc : 1.0;

    Rng rng(seed);
    std::vector<std::int64_t> zero_counts(qubits.size(), 0);
    for (std::int64_t shot = 0; shot < shots; ++shot) {
        const double u = rng.uniform() * acc;
        std::size_t lo = 0;
        std::size_t hi = dim - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cdf[mid] > u) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        for (std::size_t k = 0; k < qubits.size(); ++k) {
            if ((lo & state.stride(qubits[k])) == 0) {
                ++zero_counts[k];
            }
        }
    }
    return zero_counts;
}

/// |<a|b>|^2 for equally sized states.
inline double state_fidelity(const Statevector &a, const Statevector &b) {
    QSCENE_REQUIRE(a.dim() == b.dim(), "fidelity needs equal dimensions");
    Complex overlap{0.0, 0.0};
    for (std::size_t i = 0; i < a.dim(); ++i) {
        overlap += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    }
    return std::norm(overlap);
}

} // namespace qscene
