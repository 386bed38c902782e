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
#include <cmath>
#include <complex>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <qscene/simulator.hpp>

#include "oracles.hpp"

using namespace qscene;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("init_state prepares the ground state", "[simulator]") {
    const Statevector one = init_state(1);
    REQUIRE(one.dim() == 2);
    CHECK(one.amplitudes[0] == Complex{1.0, 0.0});
    CHECK(one.amplitudes[1] == Complex{0.0, 0.0});

    const Statevector two = init_state(2);
    REQUIRE(two.dim() == 4);
    CHECK(two.amplitudes[0] == Complex{1.0, 0.0});
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(two.amplitudes[i] == Complex{0.0, 0.0});
    }

    CHECK_THROWS_AS(init_state(31), CapacityError);
    CHECK_THROWS_AS(init_state(0), CapacityError);
}

TEST_CASE("apply_gate RY(pi) flips a qubit", "[simulator]") {
    Statevector state = init_state(1);
    apply_gate(state, Gate::rotation_fixed(GateKind::RY, 0, kPi));
    CHECK(std::abs(state.amplitudes[0]) < 1e-12);
    CHECK(std::abs(state.amplitudes[1] - Complex{1.0, 0.0}) < 1e-12);
}

TEST_CASE("apply_gate CX truth table", "[simulator]") {
    // |10> (qubit 0 set; qubit 0 is the most significant bit -> index 2)
    Statevector state = init_state(2);
    apply_gate(state, Gate::rotation_fixed(GateKind::RY, 0, kPi));
    REQUIRE(std::abs(state.amplitudes[2]) == Catch::Approx(1.0).margin(1e-12));

    apply_gate(state, Gate::cx(0, 1));
    CHECK(std::abs(state.amplitudes[3]) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::abs(state.amplitudes[2]) < 1e-12);
}

TEST_CASE("apply_gate RZZ phase matches the explicit 4x4 matrix",
          "[simulator]") {
    const double theta = 0.83;

    // |01> picks up e^{+i theta/2}
    Statevector state = init_state(2);
    apply_gate(state, Gate::rotation_fixed(GateKind::RY, 1, kPi));
    apply_gate(state, Gate::rzz_fixed(0, 1, theta));
    const Complex expected = std::polar(1.0, theta / 2.0);
    CHECK(std::abs(state.amplitudes[1] - expected) < 1e-12);

    // random 2-qubit state: library kernel vs dense oracle matrix
    CircuitProgram prep;
    prep.n_qubits = 2;
    prep.gates = {Gate::rotation_fixed(GateKind::RY, 0, 0.7),
                  Gate::rotation_fixed(GateKind::RX, 1, -1.1),
                  Gate::h(0)};
    Statevector psi = run_circuit(prep, {});
    std::vector<Complex> ref(psi.amplitudes.begin(), psi.amplitudes.end());
    ref = oracles::mat_vec(
        oracles::embed_gate(Gate::rzz_fixed(0, 1, theta), 2, theta), ref);
    apply_gate(psi, Gate::rzz_fixed(0, 1, theta));
    CHECK(oracles::l2_distance(
              ref, {psi.amplitudes.begin(), psi.amplitudes.end()}) < 1e-12);
}

TEST_CASE("apply_gate angle contract", "[simulator]") {
    Statevector state = init_state(2);
    Gate unbound = Gate::rotation(GateKind::RY, 0, 3); // slot-driven
    CHECK_THROWS_AS(apply_gate(state, unbound), ContractError);
    CHECK_THROWS_AS(apply_gate(state, Gate::h(0), 0.4), ContractError);
    Gate dup = Gate::cx(1, 1);
    CHECK_THROWS_AS(apply_gate(state, dup), ContractError);
    Gate off = Gate::cx(0, 2);
    CHECK_THROWS_AS(apply_gate(state, off), ContractError);
}

TEST_CASE("validate rejects malformed programs", "[simulator]") {
    CircuitProgram ok;
    ok.n_qubits = 2;
    ok.n_params = 1;
    ok.gates = {Gate::rotation(GateKind::RX, 0, 0), Gate::cx(0, 1)};
    CHECK_NOTHROW(validate(ok));

    CircuitProgram slot_out = ok;
    slot_out.gates[0].param_slot = 5;
    CHECK_THROWS_AS(validate(slot_out), ContractError);

    CircuitProgram target_out = ok;
    target_out.gates[1].q1 = 7;
    CHECK_THROWS_AS(validate(target_out), ContractError);

    CircuitProgram both_sources = ok;
    both_sources.gates[0].has_angle = true;
    CHECK_THROWS_AS(validate(both_sources), ContractError);

    CircuitProgram angled_h = ok;
    angled_h.gates[0] = Gate::h(0);
    angled_h.gates[0].has_angle = true;
    CHECK_THROWS_AS(validate(angled_h), ContractError);
}

TEST_CASE("run_circuit basics", "[simulator]") {
    CircuitProgram empty;
    empty.n_qubits = 3;
    const Statevector ground = run_circuit(empty, {});
    CHECK(std::abs(ground.amplitudes[0] - Complex{1.0, 0.0}) < 1e-15);
    CHECK(ground.norm_sq() == Catch::Approx(1.0).margin(1e-15));

    CircuitProgram prog;
    prog.n_qubits = 1;
    prog.n_params = 1;
    prog.gates = {Gate::rotation(GateKind::RY, 0, 0)};
    const Statevector plus = run_circuit(prog, {kPi / 2.0});
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(plus.amplitudes[0] - Complex{r, 0.0}) < 1e-12);
    CHECK(std::abs(plus.amplitudes[1] - Complex{r, 0.0}) < 1e-12);

    CHECK_THROWS_AS(run_circuit(prog, {}), ContractError);
    CHECK_THROWS_AS(run_circuit(prog, {0.1, 0.2}), ContractError);
}

TEST_CASE("run_circuit matches the dense matrix-chain oracle", "[simulator]") {
    Rng rng(20250811);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(5)); // 2..6 qubits
        CircuitProgram program = oracles::random_program(rng, n, 20, 12);
        const std::vector<double> params =
            oracles::random_params(rng, program.n_params);
        const Statevector got = run_circuit(program, params);
        const std::vector<Complex> want =
            oracles::matrix_chain_state(program, params);
        CHECK(oracles::l2_distance(
                  want, {got.amplitudes.begin(), got.amplitudes.end()}) <
              1e-10);
    }
}

TEST_CASE("expectation_z closed forms", "[simulator]") {
    Statevector zero = init_state(1);
    CHECK(expectation_z(zero, 0) == Catch::Approx(1.0).margin(1e-15));

    Statevector one = init_state(1);
    apply_gate(one, Gate::rotation_fixed(GateKind::RY, 0, kPi));
    CHECK(expectation_z(one, 0) == Catch::Approx(-1.0).margin(1e-12));

    for (double theta : {0.3, 1.2, 2.9}) {
        Statevector s = init_state(1);
        apply_gate(s, Gate::rotation_fixed(GateKind::RY, 0, theta));
        CHECK(expectation_z(s, 0) ==
              Catch::Approx(std::cos(theta)).margin(1e-12));
    }

    CHECK_THROWS_AS(expectation_z(zero, 1), ContractError);
}

TEST_CASE("sample_shots counts and determinism", "[simulator]") {
    Statevector zero = init_state(1);
    const auto counts = sample_shots(zero, {0}, 400, 99);
    REQUIRE(counts.size() == 1);
    CHECK(counts[0] == 400);

    Statevector plus = init_state(1);
    apply_gate(plus, Gate::h(0));
    const auto big = sample_shots(plus, {0}, 1000000, 4242);
    const double p_hat = static_cast<double>(big[0]) / 1e6;
    CHECK(std::abs(p_hat - 0.5) < 0.01);

    const auto again = sample_shots(plus, {0}, 1000000, 4242);
    CHECK(big == again);

    CHECK_THROWS_AS(sample_shots(zero, {0}, 0, 1), ContractError);
    CHECK_THROWS_AS(sample_shots(zero, {2}, 10, 1), ContractError);
}

TEST_CASE("norm is preserved by random gate sequences", "[simulator]") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(6));
        CircuitProgram program = oracles::random_program(rng, n, 30, 16);
        const Statevector s =
            run_circuit(program, oracles::random_params(rng, program.n_params));
        CHECK(std::abs(s.norm_sq() - 1.0) < 1e-10);
    }
}

TEST_CASE("gate followed by its inverse restores the state", "[simulator]") {
    Rng rng(13);
    CircuitProgram prep = oracles::random_program(rng, 4, 25, 10);
    const std::vector<double> params =
        oracles::random_params(rng, prep.n_params);
    const Statevector before = run_circuit(prep, params);

    for (int trial = 0; trial < 30; ++trial) {
        CircuitProgram one = oracles::random_program(rng, 4, 1, 1);
        const std::vector<double> angle =
            oracles::random_params(rng, one.n_params);
        Statevector s = before;
        const Gate &g = one.gates[0];
        const std::optional<double> theta =
            is_parameterized(g.kind)
                ? std::optional<double>{resolve_angle(g, angle)}
                : std::nullopt;
        apply_gate(s, g, theta);
        apply_gate_inverse(s, g, theta);
        CHECK(oracles::l2_distance(
                  {before.amplitudes.begin(), before.amplitudes.end()},
                  {s.amplitudes.begin(), s.amplitudes.end()}) < 1e-10);
    }
}

TEST_CASE("gates on disjoint qubits commute", "[simulator]") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        CircuitProgram prep = oracles::random_program(rng, 5, 15, 8);
        const std::vector<double> params =
            oracles::random_params(rng, prep.n_params);
        const Statevector base = run_circuit(prep, params);

        // one gate on {0,1}, one on {3,4}
        const Gate a = Gate::rzz_fixed(0, 1, rng.uniform(-3.0, 3.0));
        const Gate b = (trial % 2 == 0)
                           ? Gate::cx(3, 4)
                           : Gate::rotation_fixed(GateKind::RX, 3,
                                                  rng.uniform(-3.0, 3.0));
        Statevector ab = base;
        apply_gate(ab, a);
        apply_gate(ab, b);
        Statevector ba = base;
        apply_gate(ba, b);
        apply_gate(ba, a);
        CHECK(oracles::l2_distance(
                  {ab.amplitudes.begin(), ab.amplitudes.end()},
                  {ba.amplitudes.begin(), ba.amplitudes.end()}) < 1e-12);
    }
}

TEST_CASE("shot estimator spread follows binomial scaling", "[simulator]") {
    // P(0) = cos^2(0.4) on a rotated single qubit
    Statevector s = init_state(1);
    apply_gate(s, Gate::rotation_fixed(GateKind::RY, 0, 0.8));
    const double p = std::cos(0.4) * std::cos(0.4);

    const int n_seeds = 200;
    for (std::int64_t shots : {100LL, 400LL, 1600LL}) {
        double mean = 0.0;
        double sq = 0.0;
        for (int seed = 0; seed < n_seeds; ++seed) {
            const auto counts =
                sample_shots(s, {0}, shots, 1000 + static_cast<unsigned>(seed));
            const double p_hat =
                static_cast<double>(counts[0]) / static_cast<double>(shots);
            mean += p_hat;
            sq += p_hat * p_hat;
        }
        mean /= n_seeds;
        const double var = sq / n_seeds - mean * mean;
        const double expected_sd =
            std::sqrt(p * (1.0 - p) / static_cast<double>(shots));
        const double sd = std::sqrt(var);
        CHECK(sd < 1.5 * expected_sd);
        CHECK(sd > expected_sd / 1.5);
    }
}
