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
 * Deployment-side tooling: gate/depth accounting, shot-based inference with
 * sim-vs-sampled deviation metrics, and the random-classifier baseline
 * quantile.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "model.hpp"
#include "simulator.hpp"
#include "util.hpp"

namespace qscene {

struct GateStats {
    long n_1q = 0;
    long n_2q = 0;
    long depth = 0; // greedy layering on disjoint qubits
    std::map<GateKind, long> per_kind;

    [[nodiscard]] long total() const { return n_1q + n_2q; }
};

/// Count gates by arity and kind; depth packs gates greedily onto qubit
/// timelines (logical depth, not transpiled hardware depth).
inline GateStats gate_stats(const CircuitProgram &program) {
    GateStats stats;
    std::vector<long> timeline(static_cast<std::size_t>(program.n_qubits), 0);
    for (const Gate &g : program.gates) {
        ++stats.per_kind[g.kind];
        long slot;
        if (is_two_qubit(g.kind)) {
            ++stats.n_2q;
            slot = std::max(timeline[static_cast<std::size_t>(g.q0)],
                            timeline[static_cast<std::size_t>(g.q1)]) +
                   1;
            timeline[static_cast<std::size_t>(g.q0)] = slot;
            timeline[static_cast<std::size_t>(g.q1)] = slot;
        } else {
            ++stats.n_1q;
            slot = timeline[static_cast<std::size_t>(g.q0)] + 1;
            timeline[static_cast<std::size_t>(g.q0)] = slot;
        }
        stats.depth = std::max(stats.depth, slot);
    }
    return stats;
}

/// Exact vs shot-estimated P(0) per measured qubit; l1 = sum |sim - expt|.
struct DeviationReport {
    std::vector<int> qubits; // global measured-qubit indices
    std::vector<double> p_sim;
    std::vector<double> p_expt;
    double l1 = 0.0;
    std::int64_t shots = 0;
};

struct ShotInference {
    DeviationReport report;
    int predicted_class = -1;
    std::vector<double> probs_expt; // readout on sampled expectations
};

/**
 * @brief Run one image with finite shots: exact P_i from the statevector,
 * estimated P-hat_i from seeded sampling (each unit draws its own stream),
 * and the class prediction computed from the sampled expectations.
 */
inline ShotInference shot_inference(const ModelSpec &model,
                                    const TrainableParams &params,
                                    const ImageTensor &image,
                                    std::int64_t shots, std::uint64_t seed) {
    QSCENE_REQUIRE(shots >= 1, "shots must be >= 1");
    const int q = model.unit_qubits();
    ShotInference out;
    out.report.shots = shots;
    out.report.qubits = model.measured_qubits;
    out.report.p_sim.resize(model.measured_qubits.size());
    out.report.p_expt.resize(model.measured_qubits.size());

    Rng seeder(seed);
    std::vector<Statevector> states;
    for (int unit = 0; unit < model.n_units(); ++unit) {
        states.push_back(run_circuit(unit_program(model, image, unit),
                                     unit_params(model, params, unit)));
    }
    for (int unit = 0; unit < model.n_units(); ++unit) {
        std::vector<int> locals;
        std::vector<std::size_t> rows;
        for (std::size_t m = 0; m < model.measured_qubits.size(); ++m) {
            if (model.measured_qubits[m] / q == unit) {
                locals.push_back(model.measured_qubits[m] % q);
                rows.push_back(m);
            }
        }
        const std::uint64_t unit_seed = seeder.fork(unit).next_u64();
        if (locals.empty()) {
            continue;
        }
        const auto counts =
            sample_shots(states[static_cast<std::size_t>(unit)], locals, shots,
                         unit_seed);
        for (std::size_t k = 0; k < locals.size(); ++k) {
            out.report.p_sim[rows[k]] =
                (expectation_z(states[static_cast<std::size_t>(unit)],
                               locals[k]) +
                 1.0) /
                2.0;
            out.report.p_expt[rows[k]] =
                static_cast<double>(counts[k]) / static_cast<double>(shots);
        }
    }
    out.report.l1 = 0.0;
    for (std::size_t m = 0; m < out.report.p_sim.size(); ++m) {
        out.report.l1 += std::abs(out.report.p_sim[m] - out.report.p_expt[m]);
    }

    // readout on sampled expectations e = 2 P-hat - 1
    std::vector<double> logits(static_cast<std::size_t>(model.n_classes));
    for (int c = 0; c < model.n_classes; ++c) {
        double acc = params.bias[static_cast<std::size_t>(c)];
        for (std::size_t m = 0; m < out.report.p_expt.size(); ++m) {
            acc += params.weights[static_cast<std::size_t>(c)][m] *
                   (2.0 * out.report.p_expt[m] - 1.0);
        }
        logits[static_cast<std::size_t>(c)] = acc;
    }
    out.probs_expt = softmax(logits);
    out.predicted_class = static_cast<int>(
        std::max_element(out.probs_expt.begin(), out.probs_expt.end()) -
        out.probs_expt.begin());
    return out;
}

/// qubit,p_sim,p_expt rows.
inline void write_deviation_csv(const std::string &path,
                                const DeviationReport &report) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "qubit,p_sim,p_expt\n";
    for (std::size_t m = 0; m < report.qubits.size(); ++m) {
        out << report.qubits[m] << "," << format_double(report.p_sim[m]) << ","
            << format_double(report.p_expt[m]) << "\n";
    }
}

struct BaselineQuantile {
    double monte_carlo = 0.0; // accuracy at the requested quantile
    double exact = 0.0;       // binomial CDF inversion
};

/**
 * @brief Accuracy threshold a label-guessing classifier reaches with
 * probability `quantile`: the quantile of Binomial(n_images, p_success) /
 * n_images, estimated by Monte Carlo and cross-checked by exact CDF
 * inversion.
 */
inline BaselineQuantile random_baseline_quantile(int n_images,
                                                 double p_success,
                                                 double quantile,
                                                 long trials = 200000,
                                                 std::uint64_t seed = 0) {
    QSCENE_REQUIRE(n_images >= 1, "n_images must be >= 1");
    QSCENE_REQUIRE(p_success > 0.0 && p_success < 1.0,
                   "p_success must lie in (0, 1)");
    QSCENE_REQUIRE(quantile > 0.0 && quantile < 1.0,
                   "quantile must lie in (0, 1)");
    QSCENE_REQUIRE(trials >= 1, "trials must be >= 1");

    BaselineQuantile out;

    // exact: smallest k with CDF(k) >= quantile, pmf in log space
    {
        double cdf = 0.0;
        int k_exact = n_images;
        for (int k = 0; k <= n_images; ++k) {
            const double log_pmf =
                std::lgamma(n_images + 1.0) - std::lgamma(k + 1.0) -
                std::lgamma(n_images - k + 1.0) + k * std::log(p_success) +
                (n_images - k) * std::log1p(-p_success);
            cdf += std::exp(log_pmf);
            if (cdf >= quantile) {
                k_exact = k;
                break;
            }
        }
        out.exact = static_cast<double>(k_exact) /
                    static_cast<double>(n_images);
    }

    // Monte Carlo histogram of successes
    {
        Rng rng(seed);
        std::vector<long> histogram(static_cast<std::size_t>(n_images) + 1, 0);
        for (long t = 0; t < trials; ++t) {
            int successes = 0;
            for (int i = 0; i < n_images; ++i) {
                if (rng.uniform() < p_success) {
                    ++successes;
                }
            }
            ++histogram[static_cast<std::size_t>(successes)];
        }
        const auto want = static_cast<long>(
            std::ceil(quantile * static_cast<double>(trials)));
        long cumulative = 0;
        int k_mc = n_images;
        for (int k = 0; k <= n_images; ++k) {
            cumulative += histogram[static_cast<std::size_t>(k)];
            if (cumulative >= want) {
                k_mc = k;
                break;
            }
        }
        out.monte_carlo =
            static_cast<double>(k_mc) / static_cast<double>(n_images);
    }
    return out;
}

} // namespace qscene
