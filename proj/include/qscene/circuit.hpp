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
 * Gate and circuit program types.
 *
 * Conventions used throughout the library:
 *  - Qubit 0 is the MOST significant bit of a basis-state index.
 *  - rx/ry/rz(t) = exp(-i t P / 2) for P in {X, Y, Z}.
 *  - rzz(t) = exp(-i t Z(x)Z / 2).
 */
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"

namespace qscene {

enum class GateKind : int { RX, RY, RZ, RZZ, CX, CZ, H };

[[nodiscard]] inline bool is_parameterized(GateKind kind) {
    return kind == GateKind::RX || kind == GateKind::RY ||
           kind == GateKind::RZ || kind == GateKind::RZZ;
}

[[nodiscard]] inline bool is_two_qubit(GateKind kind) {
    return kind == GateKind::RZZ || kind == GateKind::CX ||
           kind == GateKind::CZ;
}

[[nodiscard]] inline const char *gate_name(GateKind kind) {
    switch (kind) {
    case GateKind::RX:
        return "rx";
    case GateKind::RY:
        return "ry";
    case GateKind::RZ:
        return "rz";
    case GateKind::RZZ:
        return "rzz";
    case GateKind::CX:
        return "cx";
    case GateKind::CZ:
        return "cz";
    case GateKind::H:
        return "h";
    }
    return "?";
}

/**
 * @brief One gate instance.
 *
 * Parameterized kinds carry exactly one of a parameter slot (angle is read
 * from the parameter vector at execution time) or a bound fixed angle. CX is
 * stored as (control, target) = (q0, q1).
 */
struct Gate {
    GateKind kind;
    int q0 = 0;
    int q1 = -1;          // -1 for single-qubit kinds
    int param_slot = -1;  // -1 when not slot-driven
    double angle = 0.0;   // bound angle, meaningful iff has_angle
    bool has_angle = false;

    static Gate rotation(GateKind kind, int qubit, int slot) {
        QSCENE_REQUIRE(is_parameterized(kind) && !is_two_qubit(kind),
                       "rotation() expects RX/RY/RZ");
        Gate g{kind, qubit, -1, slot, 0.0, false};
        return g;
    }
    static Gate rotation_fixed(GateKind kind, int qubit, double angle) {
        QSCENE_REQUIRE(is_parameterized(kind) && !is_two_qubit(kind),
                       "rotation_fixed() expects RX/RY/RZ");
        Gate g{kind, qubit, -1, -1, angle, true};
        return g;
    }
    static Gate rzz(int qa, int qb, int slot) {
        return Gate{GateKind::RZZ, qa, qb, slot, 0.0, false};
    }
    static Gate rzz_fixed(int qa, int qb, double angle) {
        return Gate{GateKind::RZZ, qa, qb, -1, angle, true};
    }
    static Gate cx(int control, int target) {
        return Gate{GateKind::CX, control, target, -1, 0.0, false};
    }
    static Gate cz(int qa, int qb) {
        return Gate{GateKind::CZ, qa, qb, -1, 0.0, false};
    }
    static Gate h(int qubit) {
        return Gate{GateKind::H, qubit, -1, -1, 0.0, false};
    }
};

/**
 * @brief Ordered gate list with a parameter vector size and a marker
 * separating the loading segment from the processing segment.
 */
struct CircuitProgram {
    int n_qubits = 0;
    std::vector<Gate> gates;
    int n_params = 0;
    std::size_t loading_boundary = 0;
};

/// Check every structural invariant; throws ContractError on violation.
inline void validate(const CircuitProgram &program) {
    QSCENE_REQUIRE(program.n_qubits >= 1, "program needs at least one qubit");
    QSCENE_REQUIRE(program.loading_boundary <= program.gates.size(),
                   "loading boundary exceeds gate count");
    for (const Gate &g : program.gates) {
        QSCENE_REQUIRE(g.q0 >= 0 && g.q0 < program.n_qubits,
                       "gate target out of range");
        if (is_two_qubit(g.kind)) {
            QSCENE_REQUIRE(g.q1 >= 0 && g.q1 < program.n_qubits,
                           "gate target out of range");
            QSCENE_REQUIRE(g.q0 != g.q1,
                           "two-qubit gate requires distinct targets");
        } else {
            QSCENE_REQUIRE(g.q1 == -1, "single-qubit gate with two targets");
        }
        if (is_parameterized(g.kind)) {
            QSCENE_REQUIRE((g.param_slot >= 0) != g.has_angle,
                           "parameterized gate needs exactly one of "
                           "param_slot / fixed angle");
            if (g.param_slot >= 0) {
                QSCENE_REQUIRE(g.param_slot < program.n_params,
                               "param_slot outside parameter vector");
            }
        } else {
            QSCENE_REQUIRE(g.param_slot < 0 && !g.has_angle,
                           std::string(gate_name(g.kind)) +
                               " takes no angle");
        }
    }
}

/// Resolve the execution angle of a parameterized gate.
inline double resolve_angle(const Gate &g, const std::vector<double> &params) {
    if (g.param_slot >= 0) {
        return params[static_cast<std::size_t>(g.param_slot)];
    }
    return g.angle;
}

/// Copy of `program` with every slot-driven angle bound to `params`.
inline CircuitProgram bind_parameters(const CircuitProgram &program,
                                      const std::vector<double> &params) {
    QSCENE_REQUIRE(params.size() == static_cast<std::size_t>(program.n_params),
                   "parameter vector length mismatch");
    CircuitProgram bound;
    bound.n_qubits = program.n_qubits;
    bound.n_params = 0;
    bound.loading_boundary = program.loading_boundary;
    bound.gates.reserve(program.gates.size());
    for (const Gate &g : program.gates) {
        Gate b = g;
        if (is_parameterized(g.kind)) {
            b.angle = resolve_angle(g, params);
            b.has_angle = true;
            b.param_slot = -1;
        }
        bound.gates.push_back(b);
    }
    return bound;
}

} // namespace qscene
