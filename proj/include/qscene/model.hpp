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
 * Classifier models: hardware-efficient processing circuits matched to a
 * connectivity, assembly of the three loading schemes into runnable models,
 * and the classical readout head (linear layer + softmax + cross-entropy)
 * with analytic gradients.
 *
 * A model is a set of independent circuit "units": one register for AAE and
 * PAE, one per block for BAE. Each unit owns a processing-parameter slice;
 * loading angles are fixed (trained loader parameters or data angles) and
 * never receive gradients.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "adjoint.hpp"
#include "circuit.hpp"
#include "data.hpp"
#include "encoders.hpp"
#include "error.hpp"
#include "simulator.hpp"
#include "util.hpp"

namespace qscene {

enum class Scheme : int { AAE, BAE, PAE };

[[nodiscard]] inline const char *scheme_name(Scheme scheme) {
    switch (scheme) {
    case Scheme::AAE:
        return "aae";
    case Scheme::BAE:
        return "bae";
    case Scheme::PAE:
        return "pae";
    }
    return "?";
}

inline Scheme scheme_from_name(const std::string &name) {
    if (name == "aae") {
        return Scheme::AAE;
    }
    if (name == "bae") {
        return Scheme::BAE;
    }
    if (name == "pae") {
        return Scheme::PAE;
    }
    throw ContractError("unknown scheme '" + name + "'");
}

enum class Connectivity : int { AllToAll, Ring, Line };

[[nodiscard]] inline const char *connectivity_name(Connectivity c) {
    switch (c) {
    case Connectivity::AllToAll:
        return "all";
    case Connectivity::Ring:
        return "ring";
    case Connectivity::Line:
        return "line";
    }
    return "?";
}

inline Connectivity connectivity_from_name(const std::string &name) {
    if (name == "all") {
        return Connectivity::AllToAll;
    }
    if (name == "ring") {
        return Connectivity::Ring;
    }
    if (name == "line") {
        return Connectivity::Line;
    }
    throw ContractError("unknown connectivity '" + name + "'");
}

/// Ordered edge list; rings require at least three qubits.
inline std::vector<std::pair<int, int>> connectivity_edges(Connectivity kind,
                                                           int n_qubits) {
    QSCENE_REQUIRE(n_qubits >= 1, "n_qubits must be >= 1");
    std::vector<std::pair<int, int>> edges;
    switch (kind) {
    case Connectivity::Line:
        for (int i = 0; i + 1 < n_qubits; ++i) {
            edges.emplace_back(i, i + 1);
        }
        break;
    case Connectivity::Ring:
        QSCENE_REQUIRE(n_qubits >= 3, "ring connectivity needs >= 3 qubits");
        for (int i = 0; i < n_qubits; ++i) {
            edges.emplace_back(i, (i + 1) % n_qubits);
        }
        break;
    case Connectivity::AllToAll:
        for (int i = 0; i < n_qubits; ++i) {
            for (int j = i + 1; j < n_qubits; ++j) {
                edges.emplace_back(i, j);
            }
        }
        break;
    }
    return edges;
}

struct HeaConfig {
    int layers = 3;
    Connectivity connectivity = Connectivity::Ring;
    GateKind entangler = GateKind::CX;
    bool brickwork = false;
};

namespace detail {

inline void append_hea_layer(CircuitProgram &program, int n_qubits,
                             int layer_index, const HeaConfig &config,
                             int &slot) {
    for (int q = 0; q < n_qubits; ++q) {
        program.gates.push_back(Gate::rotation(GateKind::RY, q, slot++));
        program.gates.push_back(Gate::rotation(GateKind::RZ, q, slot++));
    }
    for (const auto &[a, b] :
         connectivity_edges(config.connectivity, n_qubits)) {
        if (config.brickwork && (a % 2) != (layer_index % 2)) {
            continue; // alternating even/odd sublayers across layers
        }
        switch (config.entangler) {
        case GateKind::CX:
            program.gates.push_back(Gate::cx(a, b));
            break;
        case GateKind::CZ:
            program.gates.push_back(Gate::cz(a, b));
            break;
        case GateKind::RZZ:
            program.gates.push_back(Gate::rzz(a, b, slot++));
            break;
        default:
            throw ContractError("entangler must be CX, CZ, or RZZ");
        }
    }
}

} // namespace detail

/**
 * @brief Hardware-efficient ansatz: per layer, RY+RZ on every qubit followed
 * by entanglers on the connectivity edges. With brickwork, layers alternate
 * between even-origin and odd-origin edges. RZZ entanglers are trainable and
 * take their own slots; parameter count is 2*n*layers otherwise.
 */
inline CircuitProgram build_hea(int n_qubits, int layers,
                                Connectivity connectivity,
                                GateKind entangler = GateKind::CX,
                                bool brickwork = false) {
    QSCENE_REQUIRE(layers >= 1, "layers must be >= 1");
    HeaConfig config{layers, connectivity, entangler, brickwork};
    CircuitProgram program;
    program.n_qubits = n_qubits;
    int slot = 0;
    for (int layer = 0; layer < layers; ++layer) {
        detail::append_hea_layer(program, n_qubits, layer, config, slot);
    }
    program.n_params = slot;
    program.loading_boundary = 0;
    return program;
}

/// Trained loader parameters per image: source_id -> one vector per block.
struct LoaderStore {
    std::map<std::string, std::vector<std::vector<double>>> entries;

    [[nodiscard]] bool has(const std::string &source_id) const {
        return entries.count(source_id) != 0;
    }
    [[nodiscard]] const std::vector<std::vector<double>> &
    at(const std::string &source_id) const {
        const auto it = entries.find(source_id);
        if (it == entries.end()) {
            throw ContractError("no trained loader parameters for image '" +
                                source_id + "'");
        }
        return it->second;
    }
};

/**
 * @brief Full classifier description. Immutable during training and
 * inference; the loader store is filled once by the loader stage.
 */
struct ModelSpec {
    Scheme scheme = Scheme::PAE;
    int n_classes = 2;
    int image_height = 0;
    int image_width = 0;

    // AAE/BAE loading
    BlockPartition partition;
    int loader_layers = 6;
    GateKind loader_entangler = GateKind::CX;
    LoaderStore loaders;

    // PAE loading
    PaePlan plan;

    HeaConfig processing;
    int proc_params_per_unit = 0;
    std::vector<int> measured_qubits; // global indices

    [[nodiscard]] int n_units() const {
        return scheme == Scheme::BAE ? partition.n_blocks : 1;
    }
    [[nodiscard]] int unit_qubits() const {
        return scheme == Scheme::PAE ? plan.n_qubits
                                     : partition.qubits_per_block;
    }
    [[nodiscard]] int total_qubits() const {
        return unit_qubits() * n_units();
    }
    [[nodiscard]] int n_measured() const {
        return static_cast<int>(measured_qubits.size());
    }
    [[nodiscard]] CircuitProgram loader_ansatz() const {
        QSCENE_REQUIRE(scheme != Scheme::PAE, "PAE has no trained loader");
        return build_loader_ansatz(partition.qubits_per_block, loader_layers,
                                   loader_entangler);
    }
};

/// Processing angles (all units concatenated) plus the readout head.
struct TrainableParams {
    std::vector<double> quantum;
    std::vector<std::vector<double>> weights; // n_classes x n_measured
    std::vector<double> bias;                 // n_classes

    [[nodiscard]] std::size_t total_size() const {
        std::size_t n = quantum.size() + bias.size();
        for (const auto &row : weights) {
            n += row.size();
        }
        return n;
    }
};

/// Assemble an AAE (1x1 grid) or BAE classifier over a block partition.
inline ModelSpec assemble_amplitude_model(Scheme scheme, int image_height,
                                          int image_width, int grid_rows,
                                          int grid_cols, int loader_layers,
                                          const HeaConfig &processing,
                                          int n_classes) {
    QSCENE_REQUIRE(scheme == Scheme::AAE || scheme == Scheme::BAE,
                   "amplitude assembly expects AAE or BAE");
    QSCENE_REQUIRE(n_classes >= 2, "need at least two classes");
    if (scheme == Scheme::AAE) {
        QSCENE_REQUIRE(grid_rows == 1 && grid_cols == 1,
                       "AAE uses a single 1x1 block");
    } else {
        QSCENE_REQUIRE(grid_rows * grid_cols >= 2,
                       "BAE needs at least two blocks");
    }
    QSCENE_REQUIRE(image_height % grid_rows == 0 &&
                       image_width % grid_cols == 0,
                   "image dimensions must divide the block grid");
    const std::size_t block_pixels =
        (static_cast<std::size_t>(image_height) / grid_rows) *
        (static_cast<std::size_t>(image_width) / grid_cols);
    QSCENE_REQUIRE((block_pixels & (block_pixels - 1)) == 0,
                   "block pixel count must be a power of two");

    ModelSpec model;
    model.scheme = scheme;
    model.n_classes = n_classes;
    model.image_height = image_height;
    model.image_width = image_width;
    model.partition.grid_rows = grid_rows;
    model.partition.grid_cols = grid_cols;
    model.partition.n_blocks = grid_rows * grid_cols;
    model.partition.block_height = image_height / grid_rows;
    model.partition.block_width = image_width / grid_cols;
    int q = 0;
    while ((std::size_t{1} << q) < block_pixels) {
        ++q;
    }
    model.partition.qubits_per_block = q;
    model.loader_layers = loader_layers;
    model.processing = processing;
    model.proc_params_per_unit =
        build_hea(q, processing.layers, processing.connectivity,
                  processing.entangler, processing.brickwork)
            .n_params;

    if (scheme == Scheme::AAE) {
        // first two qubit registers are measured
        model.measured_qubits = q >= 2 ? std::vector<int>{0, 1}
                                       : std::vector<int>{0};
    } else {
        // most significant qubit of each block
        for (int b = 0; b < model.partition.n_blocks; ++b) {
            model.measured_qubits.push_back(b * q);
        }
    }
    return model;
}

/// Assemble a PAE classifier; processing layers interleave with uploading
/// layers one-to-one and must not be fewer.
inline ModelSpec assemble_pae_model(int image_height, int image_width,
                                    int n_qubits, const HeaConfig &processing,
                                    int n_classes) {
    QSCENE_REQUIRE(n_classes >= 2, "need at least two classes");
    ModelSpec model;
    model.scheme = Scheme::PAE;
    model.n_classes = n_classes;
    model.image_height = image_height;
    model.image_width = image_width;
    model.plan = pae_plan(image_height * image_width, n_qubits);
    if (processing.layers < model.plan.n_upload_layers) {
        throw ContractError(
            "PAE needs at least " + std::to_string(model.plan.n_upload_layers) +
            " processing layers (uploading lower bound), got " +
            std::to_string(processing.layers));
    }
    model.partition.qubits_per_block = n_qubits; // single unit
    model.processing = processing;
    model.proc_params_per_unit =
        build_hea(n_qubits, processing.layers, processing.connectivity,
                  processing.entangler, processing.brickwork)
            .n_params;
    model.measured_qubits =
        n_qubits >= 2 ? std::vector<int>{0, 1} : std::vector<int>{0};
    return model;
}

/// Seeded parameter initialization: quantum angles uniform(-0.1, 0.1),
/// readout weights uniform(-0.5, 0.5), bias zero.
inline TrainableParams init_trainable(const ModelSpec &model,
                                      std::uint64_t seed) {
    Rng rng(seed);
    TrainableParams params;
    params.quantum.resize(static_cast<std::size_t>(model.n_units()) *
                          model.proc_params_per_unit);
    for (double &p : params.quantum) {
        p = rng.uniform(-0.1, 0.1);
    }
    params.weights.assign(static_cast<std::size_t>(model.n_classes),
                          std::vector<double>(model.n_measured(), 0.0));
    for (auto &row : params.weights) {
        for (double &w : row) {
            w = rng.uniform(-0.5, 0.5);
        }
    }
    params.bias.assign(static_cast<std::size_t>(model.n_classes), 0.0);
    return params;
}

inline std::vector<double> softmax(const std::vector<double> &logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - peak);
        sum += probs[i];
    }
    for (double &p : probs) {
        p /= sum;
    }
    return probs;
}

constexpr double kProbabilityFloor = 1e-15;

inline double cross_entropy(const std::vector<double> &probs, int label) {
    QSCENE_REQUIRE(label >= 0 && label < static_cast<int>(probs.size()),
                   "label out of range");
    const double p = probs[static_cast<std::size_t>(label)];
    if (!std::isfinite(p) || p <= 0.0) {
        const double clamped = std::max(p, kProbabilityFloor);
        if (!(clamped > 0.0) || !std::isfinite(clamped)) {
            throw NumericalError("class probability vanished under the floor");
        }
        return -std::log(clamped);
    }
    return -std::log(std::max(p, kProbabilityFloor));
}

namespace detail {

/// Loading gates for one unit: trained loader rotations (AAE/BAE) bound
/// from the store, or nothing for PAE (handled inline as upload layers).
inline void append_amplitude_loading(const ModelSpec &model,
                                     const ImageTensor &image, int unit,
                                     CircuitProgram &program) {
    const CircuitProgram ansatz = model.loader_ansatz();
    const auto &per_block = model.loaders.at(image.source_id);
    QSCENE_REQUIRE(static_cast<int>(per_block.size()) == model.n_units(),
                   "loader store entry has wrong block count");
    const std::vector<double> &angles =
        per_block[static_cast<std::size_t>(unit)];
    QSCENE_REQUIRE(angles.size() ==
                       static_cast<std::size_t>(ansatz.n_params),
                   "loader parameter vector has wrong length");
    const CircuitProgram bound = bind_parameters(ansatz, angles);
    program.gates.insert(program.gates.end(), bound.gates.begin(),
                         bound.gates.end());
}

inline void append_pae_upload_layer(const std::vector<double> &angles,
                                    int n_qubits, int layer,
                                    CircuitProgram &program) {
    for (int q = 0; q < n_qubits; ++q) {
        const std::size_t base =
            (static_cast<std::size_t>(layer) * n_qubits + q) * 3;
        program.gates.push_back(
            Gate::rotation_fixed(GateKind::RY, q, angles[base]));
        program.gates.push_back(
            Gate::rotation_fixed(GateKind::RZ, q, angles[base + 1]));
        program.gates.push_back(
            Gate::rotation_fixed(GateKind::RY, q, angles[base + 2]));
    }
}

} // namespace detail

/**
 * @brief Build the executable circuit of one unit for one image.
 *
 * Loading angles are bound (fixed); processing rotations carry local slots
 * [0, proc_params_per_unit). For PAE the uploading layers interleave with
 * the processing layers one-to-one, extra processing layers follow.
 */
inline CircuitProgram unit_program(const ModelSpec &model,
                                   const ImageTensor &image, int unit) {
    QSCENE_REQUIRE(unit >= 0 && unit < model.n_units(), "unit out of range");
    QSCENE_REQUIRE(image.height == model.image_height &&
                       image.width == model.image_width,
                   "image shape does not match the model (" +
                       std::to_string(image.height) + "x" +
                       std::to_string(image.width) + " vs " +
                       std::to_string(model.image_height) + "x" +
                       std::to_string(model.image_width) + ")");
    CircuitProgram program;
    program.n_qubits = model.unit_qubits();
    program.n_params = model.proc_params_per_unit;
    int slot = 0;
    if (model.scheme == Scheme::PAE) {
        const std::vector<double> angles = pae_upload_angles(model.plan, image);
        for (int layer = 0; layer < model.processing.layers; ++layer) {
            if (layer < model.plan.n_upload_layers) {
                detail::append_pae_upload_layer(angles, program.n_qubits,
                                                layer, program);
            }
            detail::append_hea_layer(program, program.n_qubits, layer,
                                     model.processing, slot);
        }
        program.loading_boundary = 0; // interleaved; fixed angles mark loading
    } else {
        detail::append_amplitude_loading(model, image, unit, program);
        program.loading_boundary = program.gates.size();
        for (int layer = 0; layer < model.processing.layers; ++layer) {
            detail::append_hea_layer(program, program.n_qubits, layer,
                                     model.processing, slot);
        }
    }
    return program;
}

/// Per-unit slice of the flattened quantum parameter vector.
inline std::vector<double> unit_params(const ModelSpec &model,
                                       const TrainableParams &params,
                                       int unit) {
    const std::size_t per_unit =
        static_cast<std::size_t>(model.proc_params_per_unit);
    QSCENE_REQUIRE(params.quantum.size() ==
                       per_unit * static_cast<std::size_t>(model.n_units()),
                   "quantum parameter vector has wrong length");
    const auto begin =
        params.quantum.begin() + static_cast<std::ptrdiff_t>(per_unit * unit);
    return {begin, begin + static_cast<std::ptrdiff_t>(per_unit)};
}

/// Fully bound single-register circuit over all units (blocks offset by
/// unit * q); loading gates first, processing gates after.
inline CircuitProgram joint_bound_program(const ModelSpec &model,
                                          const ImageTensor &image,
                                          const TrainableParams &params) {
    CircuitProgram joint;
    joint.n_qubits = model.total_qubits();
    joint.n_params = 0;
    const int q = model.unit_qubits();
    std::vector<CircuitProgram> bound;
    for (int unit = 0; unit < model.n_units(); ++unit) {
        bound.push_back(bind_parameters(unit_program(model, image, unit),
                                        unit_params(model, params, unit)));
    }
    auto append_range = [&](const CircuitProgram &src, int unit, bool loading) {
        const std::size_t lo = loading ? 0 : src.loading_boundary;
        const std::size_t hi = loading ? src.loading_boundary
                                       : src.gates.size();
        for (std::size_t i = lo; i < hi; ++i) {
            Gate g = src.gates[i];
            g.q0 += unit * q;
            if (g.q1 >= 0) {
                g.q1 += unit * q;
            }
            joint.gates.push_back(g);
        }
    };
    for (int unit = 0; unit < model.n_units(); ++unit) {
        append_range(bound[static_cast<std::size_t>(unit)], unit, true);
    }
    joint.loading_boundary = joint.gates.size();
    for (int unit = 0; unit < model.n_units(); ++unit) {
        append_range(bound[static_cast<std::size_t>(unit)], unit, false);
    }
    return joint;
}

/// Everything a backward pass needs from one forward evaluation.
struct ForwardTrace {
    std::vector<CircuitProgram> unit_programs;
    std::vector<std::vector<double>> unit_param_slices;
    std::vector<Statevector> unit_states;
    std::vector<double> expectations; // aligned with measured_qubits
    std::vector<double> logits;
    std::vector<double> probs;
};

inline ForwardTrace forward_trace(const ModelSpec &model,
                                  const ImageTensor &image,
                                  const TrainableParams &params) {
    QSCENE_REQUIRE(static_cast<int>(params.weights.size()) == model.n_classes,
                   "readout weight rows must match n_classes");
    for (const auto &row : params.weights) {
        QSCENE_REQUIRE(static_cast<int>(row.size()) == model.n_measured(),
                       "readout weight columns must match measured qubits");
    }
    ForwardTrace trace;
    const int q = model.unit_qubits();
    for (int unit = 0; unit < model.n_units(); ++unit) {
        trace.unit_programs.push_back(unit_program(model, image, unit));
        trace.unit_param_slices.push_back(unit_params(model, params, unit));
        trace.unit_states.push_back(run_circuit(trace.unit_programs.back(),
                                                trace.unit_param_slices.back()));
    }
    trace.expectations.resize(model.measured_qubits.size());
    for (std::size_t m = 0; m < model.measured_qubits.size(); ++m) {
        const int global = model.measured_qubits[m];
        const int unit = global / q;
        const int local = global % q;
        trace.expectations[m] =
            expectation_z(trace.unit_states[static_cast<std::size_t>(unit)],
                          local);
    }
    trace.logits.resize(static_cast<std::size_t>(model.n_classes));
    for (int c = 0; c < model.n_classes; ++c) {
        double acc = params.bias[static_cast<std::size_t>(c)];
        for (std::size_t m = 0; m < trace.expectations.size(); ++m) {
            acc += params.weights[static_cast<std::size_t>(c)][m] *
                   trace.expectations[m];
        }
        trace.logits[static_cast<std::size_t>(c)] = acc;
    }
    trace.probs = softmax(trace.logits);
    return trace;
}

/// Class probabilities for one image.
inline std::vector<double> forward(const ModelSpec &model,
                                   const ImageTensor &image,
                                   const TrainableParams &params) {
    return forward_trace(model, image, params).probs;
}

/// Argmax with ties broken toward the lowest class index.
inline int predict(const ModelSpec &model, const ImageTensor &image,
                   const TrainableParams &params) {
    const std::vector<double> probs = forward(model, image, params);
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                            probs.begin());
}

struct LossAndGradients {
    double loss = 0.0;
    TrainableParams gradients;
    std::vector<double> probs;
};

/**
 * @brief Cross-entropy loss and its gradient for one sample.
 *
 * Classical gradients are the analytic softmax/linear backprop; quantum
 * gradients chain d(loss)/d<Z> into one adjoint sweep per unit over the
 * weighted diagonal observable sum_m w_m Z_m. Loading angles are fixed and
 * receive no gradient.
 */
inline LossAndGradients loss_and_gradients(const ModelSpec &model,
                                           const ImageTensor &image,
                                           int label,
                                           const TrainableParams &params) {
    QSCENE_REQUIRE(label >= 0 && label < model.n_classes,
                   "label out of range");
    const ForwardTrace trace = forward_trace(model, image, params);

    LossAndGradients out;
    out.probs = trace.probs;
    out.loss = cross_entropy(trace.probs, label);

    const int n_classes = model.n_classes;
    const std::size_t n_measured = trace.expectations.size();
    std::vector<double> dlogits(trace.probs);
    dlogits[static_cast<std::size_t>(label)] -= 1.0;

    out.gradients.bias = dlogits;
    out.gradients.weights.assign(static_cast<std::size_t>(n_classes),
                                 std::vector<double>(n_measured, 0.0));
    std::vector<double> dexp(n_measured, 0.0);
    for (int c = 0; c < n_classes; ++c) {
        for (std::size_t m = 0; m < n_measured; ++m) {
            out.gradients.weights[static_cast<std::size_t>(c)][m] =
                dlogits[static_cast<std::size_t>(c)] * trace.expectations[m];
            dexp[m] += params.weights[static_cast<std::size_t>(c)][m] *
                       dlogits[static_cast<std::size_t>(c)];
        }
    }

    const int q = model.unit_qubits();
    out.gradients.quantum.assign(params.quantum.size(), 0.0);
    for (int unit = 0; unit < model.n_units(); ++unit) {
        // weighted diagonal observable sum_m dexp[m] * Z_(local m)
        const Statevector &state =
            trace.unit_states[static_cast<std::size_t>(unit)];
        std::vector<double> diag(state.dim(), 0.0);
        bool any = false;
        for (std::size_t m = 0; m < n_measured; ++m) {
            const int global = model.measured_qubits[m];
            if (global / q != unit) {
                continue;
            }
            if (dexp[m] == 0.0) {
                continue;
            }
            any = true;
            const std::size_t stride = state.stride(global % q);
            for (std::size_t i = 0; i < diag.size(); ++i) {
                diag[i] += ((i & stride) == 0) ? dexp[m] : -dexp[m];
            }
        }
        if (!any) {
            continue;
        }
        const std::vector<double> unit_grad = adjoint_gradient_diagonal(
            trace.unit_programs[static_cast<std::size_t>(unit)],
            trace.unit_param_slices[static_cast<std::size_t>(unit)], diag,
            &state);
        std::copy(unit_grad.begin(), unit_grad.end(),
                  out.gradients.quantum.begin() +
                      static_cast<std::ptrdiff_t>(
                          static_cast<std::size_t>(unit) *
                          model.proc_params_per_unit));
    }
    return out;
}

} // namespace qscene
