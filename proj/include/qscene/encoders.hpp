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
 * Data-loading schemes.
 *
 * AAE trains a shallow RY+entangler circuit so its amplitudes approximate a
 * normalized image, staged over the most significant qubits first. BAE does
 * the same per image block on an independent register. PAE binds pixels as
 * rotation angles across uploading layers; no training is involved.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adjoint.hpp"
#include "circuit.hpp"
#include "data.hpp"
#include "error.hpp"
#include "optimize.hpp"
#include "simulator.hpp"
#include "util.hpp"

namespace qscene {

/// Prepared-probability floor used inside the KL loss.
constexpr double kKlEpsilon = 1e-12;

/// Nonnegative unit-norm amplitude target of length 2^n.
struct TargetAmplitudes {
    std::vector<double> values;
    int n_qubits = 0;
    int source_height = 0;
    int source_width = 0;
};

/// Pad with zeros to the next power of two, then divide by the L2 norm.
inline TargetAmplitudes normalize_vector(std::vector<double> v) {
    QSCENE_REQUIRE(!v.empty(), "cannot normalize an empty vector");
    double norm_sq = 0.0;
    for (double x : v) {
        QSCENE_REQUIRE(x >= 0.0, "amplitude targets must be nonnegative");
        norm_sq += x * x;
    }
    if (norm_sq <= 0.0) {
        throw DegenerateInputError("all-zero vector has no direction");
    }
    int n_qubits = 0;
    while ((std::size_t{1} << n_qubits) < v.size()) {
        ++n_qubits;
    }
    v.resize(std::size_t{1} << n_qubits, 0.0);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double &x : v) {
        x *= inv;
    }
    TargetAmplitudes target;
    target.values = std::move(v);
    target.n_qubits = n_qubits;
    return target;
}

/// Row-major flatten + normalize; qubits = ceil(log2(pixel_count)).
inline TargetAmplitudes image_to_target(const ImageTensor &image) {
    QSCENE_REQUIRE(image.pixel_count() >= 1, "empty image");
    QSCENE_REQUIRE(image.pixel_count() <= (std::size_t{1} << 30),
                   "image exceeds the 2^30 amplitude capacity");
    TargetAmplitudes target = normalize_vector(image.pixels);
    target.source_height = image.height;
    target.source_width = image.width;
    return target;
}

/// q x b block layout: a (rows x cols) grid of 2^q-pixel blocks.
struct BlockPartition {
    int grid_rows = 1;
    int grid_cols = 1;
    int qubits_per_block = 0;
    int n_blocks = 1;
    int block_height = 0;
    int block_width = 0;

    [[nodiscard]] int total_qubits() const {
        return qubits_per_block * n_blocks;
    }
};

struct BlockTargets {
    BlockPartition partition;
    std::vector<TargetAmplitudes> blocks; // row-major over the grid
};

/**
 * @brief Cut the image into a grid of blocks and normalize each block
 * independently; the global state is the product of the block states.
 */
inline BlockTargets partition_blocks(const ImageTensor &image, int grid_rows,
                                     int grid_cols) {
    QSCENE_REQUIRE(grid_rows >= 1 && grid_cols >= 1, "grid dims must be >= 1");
    QSCENE_REQUIRE(image.height % grid_rows == 0 &&
                       image.width % grid_cols == 0,
                   "image dimensions must divide the block grid");
    const int bh = image.height / grid_rows;
    const int bw = image.width / grid_cols;
    const std::size_t block_pixels =
        static_cast<std::size_t>(bh) * static_cast<std::size_t>(bw);
    QSCENE_REQUIRE((block_pixels & (block_pixels - 1)) == 0,
                   "block pixel count must be a power of two");

    BlockTargets out;
    out.partition.grid_rows = grid_rows;
    out.partition.grid_cols = grid_cols;
    out.partition.n_blocks = grid_rows * grid_cols;
    out.partition.block_height = bh;
    out.partition.block_width = bw;
    int q = 0;
    while ((std::size_t{1} << q) < block_pixels) {
        ++q;
    }
    out.partition.qubits_per_block = q;

    for (int gr = 0; gr < grid_rows; ++gr) {
        for (int gc = 0; gc < grid_cols; ++gc) {
            std::vector<double> block(block_pixels);
            for (int r = 0; r < bh; ++r) {
                for (int c = 0; c < bw; ++c) {
                    block[static_cast<std::size_t>(r) * bw + c] =
                        image.at(gr * bh + r, gc * bw + c);
                }
            }
            try {
                TargetAmplitudes t = normalize_vector(std::move(block));
                t.source_height = bh;
                t.source_width = bw;
                out.blocks.push_back(std::move(t));
            } catch (const DegenerateInputError &) {
                throw DegenerateInputError(
                    "all-zero block (" + std::to_string(gr) + "," +
                    std::to_string(gc) + ") in " + image.source_id);
            }
        }
    }
    return out;
}

/// Staged activation plan: (active most-significant qubits, steps) pairs.
struct HierarchicalSchedule {
    std::vector<std::pair<int, int>> stages;
};

/// Stage k of s activates the ceil(k*n/s) most significant qubits.
inline HierarchicalSchedule build_hierarchical_schedule(int n_qubits,
                                                        int n_stages,
                                                        int steps_per_stage) {
    QSCENE_REQUIRE(n_qubits >= 1, "n_qubits must be >= 1");
    QSCENE_REQUIRE(n_stages >= 1 && n_stages <= n_qubits,
                   "n_stages must lie in [1, n_qubits]");
    QSCENE_REQUIRE(steps_per_stage >= 1, "steps_per_stage must be >= 1");
    HierarchicalSchedule schedule;
    for (int k = 1; k <= n_stages; ++k) {
        const int active = static_cast<int>(
            (static_cast<long>(k) * n_qubits + n_stages - 1) / n_stages);
        schedule.stages.emplace_back(active, steps_per_stage);
    }
    return schedule;
}

/// Default staging: ceil(n/4) stages with equal step counts.
inline HierarchicalSchedule default_hierarchical_schedule(int n_qubits,
                                                          int steps_per_stage) {
    return build_hierarchical_schedule(n_qubits, (n_qubits + 3) / 4,
                                       steps_per_stage);
}

/**
 * @brief RY + entangler loader ansatz on line connectivity.
 *
 * Rotation layers bracket the entangling chains: RY_0 [chain RY_k] x layers,
 * so the circuit ends on rotations and the all-zero parameter vector is the
 * identity on |0...0>. One slot per rotation; n_params = n * (layers + 1).
 */
inline CircuitProgram build_loader_ansatz(int n_qubits, int layers,
                                          GateKind entangler = GateKind::CX) {
    QSCENE_REQUIRE(n_qubits >= 1 && layers >= 1, "bad loader ansatz shape");
    QSCENE_REQUIRE(entangler == GateKind::CX || entangler == GateKind::CZ ||
                       entangler == GateKind::RZZ,
                   "loader entangler must be CX, CZ, or RZZ");
    CircuitProgram program;
    program.n_qubits = n_qubits;
    int slot = 0;
    auto rotation_layer = [&] {
        for (int q = 0; q < n_qubits; ++q) {
            program.gates.push_back(Gate::rotation(GateKind::RY, q, slot++));
        }
    };
    rotation_layer();
    for (int layer = 0; layer < layers; ++layer) {
        for (int q = 0; q + 1 < n_qubits; ++q) {
            switch (entangler) {
            case GateKind::CX:
                program.gates.push_back(Gate::cx(q, q + 1));
                break;
            case GateKind::CZ:
                program.gates.push_back(Gate::cz(q, q + 1));
                break;
            default:
                program.gates.push_back(Gate::rzz(q, q + 1, slot++));
                break;
            }
        }
        rotation_layer();
    }
    program.n_params = slot;
    program.loading_boundary = program.gates.size();
    return program;
}

/**
 * @brief Product-state warm start: every slot zero except the trailing
 * rotation layer, whose angle on qubit q reproduces the target's marginal
 * P(bit_q = 0). The initial state is then the positive product approximation
 * of the target, which keeps KL descent in the positive-amplitude branch.
 */
inline std::vector<double>
marginal_product_init(const TargetAmplitudes &target,
                      const CircuitProgram &ansatz) {
    std::vector<double> params(static_cast<std::size_t>(ansatz.n_params), 0.0);
    const int n = ansatz.n_qubits;
    // trailing rotation layer owns the last n slots
    QSCENE_REQUIRE(ansatz.n_params >= n, "ansatz too small for warm start");
    for (int q = 0; q < n; ++q) {
        const std::size_t stride = std::size_t{1} << (n - 1 - q);
        double p0 = 0.0;
        for (std::size_t i = 0; i < target.values.size(); ++i) {
            if ((i & stride) == 0) {
                p0 += target.values[i] * target.values[i];
            }
        }
        p0 = std::min(1.0, std::max(0.0, p0));
        const double theta = 2.0 * std::acos(std::sqrt(p0));
        params[static_cast<std::size_t>(ansatz.n_params - n + q)] = theta;
    }
    return params;
}

namespace detail {

/// Restrict a program to gates acting entirely on qubits [0, active).
/// Parameter slots keep their full-vector indices.
inline CircuitProgram prefix_subprogram(const CircuitProgram &program,
                                        int active_qubits) {
    CircuitProgram sub;
    sub.n_qubits = active_qubits;
    sub.n_params = program.n_params;
    for (const Gate &g : program.gates) {
        const int hi = is_two_qubit(g.kind) ? std::max(g.q0, g.q1) : g.q0;
        if (hi < active_qubits) {
            sub.gates.push_back(g);
        }
    }
    sub.loading_boundary = sub.gates.size();
    return sub;
}

/// Marginal probabilities of the top `active` qubits of the target.
inline std::vector<double> marginal_probs(const TargetAmplitudes &target,
                                          int active_qubits) {
    const std::size_t groups = std::size_t{1} << active_qubits;
    const std::size_t group_size =
        target.values.size() >> active_qubits;
    std::vector<double> probs(groups, 0.0);
    for (std::size_t j = 0; j < groups; ++j) {
        double acc = 0.0;
        for (std::size_t r = 0; r < group_size; ++r) {
            const double t = target.values[j * group_size + r];
            acc += t * t;
        }
        probs[j] = acc;
    }
    return probs;
}

inline double kl_divergence(const std::vector<double> &target_probs,
                            const Statevector &state) {
    double loss = 0.0;
    for (std::size_t i = 0; i < target_probs.size(); ++i) {
        const double q = target_probs[i];
        if (q <= 0.0) {
            continue; // 0 * log 0 convention
        }
        const double p = std::max(std::norm(state.amplitudes[i]), kKlEpsilon);
        loss += q * std::log(q / p);
    }
    // epsilon clamping can push an exact match a few ulps below zero
    return std::max(loss, 0.0);
}

} // namespace detail

enum class LoaderInit : int { MarginalProduct, Random };

struct LoaderOptConfig {
    AdamConfig adam{0.05, 0.9, 0.999, 1e-8};
    LoaderInit init = LoaderInit::MarginalProduct;
    double init_scale = 0.1; // uniform(-s, s) when init == Random
    std::uint64_t seed = 0;
    std::optional<std::vector<double>> initial_params;
};

struct LoaderResult {
    std::vector<double> params;      // best final-stage parameters
    std::vector<double> loss_history; // KL per step, stages concatenated
    std::vector<std::size_t> stage_offsets;
    std::vector<std::vector<double>> stage_params; // snapshot after each stage
    double best_loss = 0.0;
    double final_fidelity = 0.0;
};

/// |<target|psi(params)>|^2 with the target held as nonnegative reals.
inline double loader_fidelity(const TargetAmplitudes &target,
                              const CircuitProgram &ansatz,
                              const std::vector<double> &params) {
    const Statevector psi = run_circuit(ansatz, params);
    Complex overlap{0.0, 0.0};
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        overlap += target.values[i] * psi.amplitudes[i];
    }
    return std::norm(overlap);
}

/**
 * @brief Train the loader so its squared amplitudes approximate the target
 * probabilities, minimizing KL(target || prepared) with Adam.
 *
 * Stages run on the prefix register of the most significant qubits: gates
 * touching inactive qubits are left at identity, their parameters receive
 * exactly zero gradient and keep their values. The returned parameters are
 * the best (lowest final-stage KL) seen.
 */
inline LoaderResult train_loader(const TargetAmplitudes &target,
                                 const CircuitProgram &ansatz,
                                 const HierarchicalSchedule &schedule,
                                 const LoaderOptConfig &config = {}) {
    QSCENE_REQUIRE(target.n_qubits == ansatz.n_qubits,
                   "ansatz qubit count does not match target");
    QSCENE_REQUIRE(!schedule.stages.empty(), "schedule has no stages");
    QSCENE_REQUIRE(schedule.stages.back().first == ansatz.n_qubits,
                   "final stage must activate all qubits");

    std::vector<double> params;
    if (config.initial_params.has_value()) {
        QSCENE_REQUIRE(config.initial_params->size() ==
                           static_cast<std::size_t>(ansatz.n_params),
                       "initial parameter vector length mismatch");
        params = *config.initial_params;
    } else if (config.init == LoaderInit::MarginalProduct) {
        params = marginal_product_init(target, ansatz);
    } else {
        Rng rng(config.seed);
        params.resize(static_cast<std::size_t>(ansatz.n_params));
        for (double &p : params) {
            p = rng.uniform(-config.init_scale, config.init_scale);
        }
    }

    LoaderResult result;
    result.params = params;
    result.best_loss = std::numeric_limits<double>::infinity();

    int prev_active = 0;
    for (const auto &[active, steps] : schedule.stages) {
        QSCENE_REQUIRE(active > prev_active && active <= ansatz.n_qubits,
                       "stage qubit counts must increase to n_qubits");
        prev_active = active;
        result.stage_offsets.push_back(result.loss_history.size());

        const CircuitProgram sub = detail::prefix_subprogram(ansatz, active);
        const std::vector<double> stage_probs =
            detail::marginal_probs(target, active);
        const bool final_stage = active == ansatz.n_qubits;

        std::vector<int> active_slots;
        {
            std::vector<bool> seen(static_cast<std::size_t>(ansatz.n_params),
                                   false);
            for (const Gate &g : sub.gates) {
                if (g.param_slot >= 0 &&
                    !seen[static_cast<std::size_t>(g.param_slot)]) {
                    seen[static_cast<std::size_t>(g.param_slot)] = true;
                    active_slots.push_back(g.param_slot);
                }
            }
            std::sort(active_slots.begin(), active_slots.end());
        }

        AdamState adam = make_adam(active_slots.size(), config.adam);
        std::vector<double> sub_params(active_slots.size());
        std::vector<double> sub_grads(active_slots.size());

        for (int step = 0; step < steps; ++step) {
            const Statevector psi = run_circuit(sub, params);
            const double loss = detail::kl_divergence(stage_probs, psi);
            if (!std::isfinite(loss)) {
                throw NumericalError(
                    "non-finite loader loss at step " +
                    std::to_string(result.loss_history.size()));
            }
            result.loss_history.push_back(loss);
            if (final_stage && loss < result.best_loss) {
                result.best_loss = loss;
                result.params = params;
            }

            // d KL / d p_i = -q_i / max(p_i, eps)
            std::vector<double> diag(psi.dim(), 0.0);
            for (std::size_t i = 0; i < diag.size(); ++i) {
                const double q = stage_probs[i];
                if (q > 0.0) {
                    diag[i] = -q / std::max(std::norm(psi.amplitudes[i]),
                                            kKlEpsilon);
                }
            }
            const std::vector<double> grads =
                adjoint_gradient_diagonal(sub, params, diag, &psi);
            for (std::size_t k = 0; k < active_slots.size(); ++k) {
                sub_params[k] =
                    params[static_cast<std::size_t>(active_slots[k])];
                sub_grads[k] =
                    grads[static_cast<std::size_t>(active_slots[k])];
            }
            adam_step(adam, sub_params, sub_grads);
            for (std::size_t k = 0; k < active_slots.size(); ++k) {
                params[static_cast<std::size_t>(active_slots[k])] =
                    sub_params[k];
            }
        }

        if (final_stage) {
            const Statevector psi = run_circuit(sub, params);
            const double loss = detail::kl_divergence(stage_probs, psi);
            result.loss_history.push_back(loss);
            if (loss < result.best_loss) {
                result.best_loss = loss;
                result.params = params;
            }
        }
        result.stage_params.push_back(params);
    }

    result.final_fidelity = loader_fidelity(target, ansatz, result.params);
    return result;
}

/// Pixel-to-rotation assignment for piecewise angle encoding.
struct PaePlan {
    int n_qubits = 0;
    int n_upload_layers = 0;
    int pixel_count = 0;
    double angle_scale = 3.14159265358979323846;
};

struct PaeSlot {
    int layer = 0;
    int qubit = 0;
    int position = 0; // 0 = RY1, 1 = RZ, 2 = RY2
};

/// ceil(pixel_count / (3 n_qubits)) uploading layers.
inline PaePlan pae_plan(int pixel_count, int n_qubits) {
    QSCENE_REQUIRE(pixel_count >= 1, "pixel_count must be >= 1");
    QSCENE_REQUIRE(n_qubits >= 1, "n_qubits must be >= 1");
    PaePlan plan;
    plan.n_qubits = n_qubits;
    plan.pixel_count = pixel_count;
    plan.n_upload_layers =
        (pixel_count + 3 * n_qubits - 1) / (3 * n_qubits);
    return plan;
}

/// Row-major pixels fill layer by layer, qubit by qubit, RY1 -> RZ -> RY2.
inline PaeSlot pae_assignment(const PaePlan &plan, int pixel_index) {
    QSCENE_REQUIRE(pixel_index >= 0 && pixel_index < plan.pixel_count,
                   "pixel index out of range");
    const int per_layer = 3 * plan.n_qubits;
    PaeSlot slot;
    slot.layer = pixel_index / per_layer;
    const int rem = pixel_index % per_layer;
    slot.qubit = rem / 3;
    slot.position = rem % 3;
    return slot;
}

/**
 * @brief Bound upload angles for one image: angle_scale times the pixel
 * value (already in [0, 1]), laid out layer-major as (layer, qubit,
 * RY1/RZ/RY2), with unfilled tail positions bound to zero.
 */
inline std::vector<double> pae_upload_angles(const PaePlan &plan,
                                             const ImageTensor &image) {
    QSCENE_REQUIRE(static_cast<int>(image.pixel_count()) == plan.pixel_count,
                   "image pixel count does not match the plan");
    std::vector<double> angles(
        static_cast<std::size_t>(plan.n_upload_layers) * plan.n_qubits * 3,
        0.0);
    for (int p = 0; p < plan.pixel_count; ++p) {
        const PaeSlot slot = pae_assignment(plan, p);
        const double value = image.pixels[static_cast<std::size_t>(p)];
        QSCENE_REQUIRE(value >= 0.0 && value <= 1.0,
                       "pixel values must lie in [0, 1]");
        const std::size_t flat =
            (static_cast<std::size_t>(slot.layer) * plan.n_qubits +
             slot.qubit) *
                3 +
            static_cast<std::size_t>(slot.position);
        angles[flat] = plan.angle_scale * value;
    }
    return angles;
}

} // namespace qscene
