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
 * Two-stage training (loader fitting, then classifier optimization with
 * frozen loaders), batched Adam, and evaluation metrics.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "data.hpp"
#include "encoders.hpp"
#include "error.hpp"
#include "model.hpp"
#include "optimize.hpp"
#include "util.hpp"

namespace qscene {

enum class TrainStage : int { Loader, Classifier };

struct TrainConfig {
    int epochs = 30;
    int batch_size = 16; // full batch below 16 samples
    double lr = 0.01;
    std::uint64_t seed = 0;
    TrainStage stage = TrainStage::Classifier;
    double val_fraction = 0.2;
    unsigned threads = 0; // 0 = hardware concurrency

    // loader-stage knobs
    double loader_lr = 0.05;
    int loader_steps = 250; // Adam steps per hierarchical stage
    int loader_stages = 0;  // 0 = default ceil(q/4)
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct Metrics {
    double accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    std::vector<long> class_counts;
    std::vector<std::vector<long>> confusion; // [true][predicted]
    std::vector<double> loss_history;
    std::vector<EpochRecord> history;
};

struct FitResult {
    TrainableParams params;
    Metrics metrics;
    double best_val_loss = 0.0;
};

/// Exact-expectation predictions over a dataset.
inline Metrics evaluate(const ModelSpec &model, const TrainableParams &params,
                        const Dataset &dataset, unsigned threads = 0) {
    QSCENE_REQUIRE(!dataset.samples.empty(), "cannot evaluate an empty dataset");
    for (const ImageTensor &s : dataset.samples) {
        QSCENE_REQUIRE(s.label >= 0 && s.label < model.n_classes,
                       "dataset label " + std::to_string(s.label) +
                           " outside the model's class set");
    }
    const std::size_t n = dataset.samples.size();
    std::vector<int> predictions(n, -1);
    parallel_for(n, threads, [&](std::size_t i) {
        predictions[i] = predict(model, dataset.samples[i], params);
    });

    Metrics metrics;
    metrics.class_counts.assign(static_cast<std::size_t>(model.n_classes), 0);
    metrics.confusion.assign(
        static_cast<std::size_t>(model.n_classes),
        std::vector<long>(static_cast<std::size_t>(model.n_classes), 0));
    long correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto label = static_cast<std::size_t>(dataset.samples[i].label);
        const auto pred = static_cast<std::size_t>(predictions[i]);
        ++metrics.class_counts[label];
        ++metrics.confusion[label][pred];
        if (label == pred) {
            ++correct;
        }
    }
    metrics.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    metrics.per_class_accuracy.assign(
        static_cast<std::size_t>(model.n_classes), 0.0);
    for (int c = 0; c < model.n_classes; ++c) {
        const auto idx = static_cast<std::size_t>(c);
        if (metrics.class_counts[idx] > 0) {
            metrics.per_class_accuracy[idx] =
                static_cast<double>(metrics.confusion[idx][idx]) /
                static_cast<double>(metrics.class_counts[idx]);
        }
    }
    return metrics;
}

namespace detail {

inline std::vector<double> flatten_params(const TrainableParams &params) {
    std::vector<double> flat;
    flat.reserve(params.total_size());
    flat.insert(flat.end(), params.quantum.begin(), params.quantum.end());
    for (const auto &row : params.weights) {
        flat.insert(flat.end(), row.begin(), row.end());
    }
    flat.insert(flat.end(), params.bias.begin(), params.bias.end());
    return flat;
}

inline void unflatten_params(const std::vector<double> &flat,
                             TrainableParams &params) {
    std::size_t cursor = 0;
    for (double &p : params.quantum) {
        p = flat[cursor++];
    }
    for (auto &row : params.weights) {
        for (double &w : row) {
            w = flat[cursor++];
        }
    }
    for (double &b : params.bias) {
        b = flat[cursor++];
    }
}

/// Per-class stratified holdout for validation; falls back to the training
/// set itself when a split would leave validation empty.
inline std::pair<Dataset, Dataset> carve_validation(const Dataset &data,
                                                    double fraction,
                                                    std::uint64_t seed) {
    Dataset train;
    Dataset val;
    train.class_names = data.class_names;
    train.split_tag = SplitTag::Train;
    val.class_names = data.class_names;
    val.split_tag = SplitTag::Val;

    std::vector<std::vector<std::size_t>> per_class(data.class_names.size());
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        per_class[static_cast<std::size_t>(data.samples[i].label)].push_back(i);
    }
    Rng rng(seed);
    for (std::size_t cls = 0; cls < per_class.size(); ++cls) {
        auto &indices = per_class[cls];
        Rng stream = rng.fork(cls);
        stream.shuffle(indices);
        const auto n_val = static_cast<std::size_t>(
            std::floor(fraction * static_cast<double>(indices.size()) + 1e-9));
        for (std::size_t k = 0; k < indices.size(); ++k) {
            (k < n_val ? val : train).samples.push_back(
                data.samples[indices[k]]);
        }
    }
    if (val.samples.empty() || train.samples.empty()) {
        train.samples = data.samples;
        val.samples = data.samples;
    }
    return {train, val};
}

} // namespace detail

/**
 * @brief Loader stage: train one amplitude loader per image (per block for
 * BAE) and record the parameters in the model's loader store.
 *
 * Images train independently and in parallel; each draws a seed from
 * (config.seed, image index) so results do not depend on scheduling.
 * Metrics.loss_history holds the best KL per image in dataset order.
 */
inline Metrics fit_loaders(ModelSpec &model, const Dataset &dataset,
                           const TrainConfig &config) {
    QSCENE_REQUIRE(model.scheme != Scheme::PAE,
                   "PAE binds angles directly; there is no loader stage");
    QSCENE_REQUIRE(!dataset.samples.empty(), "cannot fit an empty dataset");
    const int q = model.partition.qubits_per_block;
    const CircuitProgram ansatz = model.loader_ansatz();
    const HierarchicalSchedule schedule = build_hierarchical_schedule(
        q, config.loader_stages > 0 ? config.loader_stages : (q + 3) / 4,
        config.loader_steps);

    const std::size_t n = dataset.samples.size();
    std::vector<std::vector<std::vector<double>>> trained(n);
    std::vector<double> final_losses(n, 0.0);
    std::vector<std::string> failures(n);

    parallel_for(n, config.threads, [&](std::size_t i) {
        try {
            const ImageTensor &image = dataset.samples[i];
            const BlockTargets targets =
                model.scheme == Scheme::AAE
                    ? BlockTargets{model.partition,
                                   {image_to_target(image)}}
                    : partition_blocks(image, model.partition.grid_rows,
                                       model.partition.grid_cols);
            QSCENE_REQUIRE(image.height == model.image_height &&
                               image.width == model.image_width,
                           "image shape does not match the model");
            double loss_acc = 0.0;
            for (std::size_t b = 0; b < targets.blocks.size(); ++b) {
                LoaderOptConfig opt;
                opt.adam.lr = config.loader_lr;
                opt.seed = Rng(config.seed).fork(i * 1000 + b).next_u64();
                const LoaderResult result =
                    train_loader(targets.blocks[b], ansatz, schedule, opt);
                trained[i].push_back(result.params);
                loss_acc += result.best_loss;
            }
            final_losses[i] =
                loss_acc / static_cast<double>(targets.blocks.size());
        } catch (const Error &e) {
            failures[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (!failures[i].empty()) {
            throw ContractError("loader training failed for '" +
                                dataset.samples[i].source_id +
                                "': " + failures[i]);
        }
        model.loaders.entries[dataset.samples[i].source_id] = trained[i];
    }

    Metrics metrics;
    metrics.loss_history = final_losses;
    return metrics;
}

/**
 * @brief Classifier stage: seeded mini-batch Adam over processing angles
 * and the readout head. Returns the parameters with the best validation
 * loss; loader parameters are never touched.
 */
inline FitResult fit_classifier(const ModelSpec &model, const Dataset &dataset,
                                const TrainConfig &config) {
    QSCENE_REQUIRE(!dataset.samples.empty(), "cannot fit an empty dataset");
    QSCENE_REQUIRE(config.epochs >= 1, "epochs must be >= 1");
    QSCENE_REQUIRE(config.batch_size >= 1, "batch_size must be >= 1");

    auto [train_set, val_set] =
        detail::carve_validation(dataset, config.val_fraction,
                                 Rng(config.seed).fork(1).next_u64());
    const std::size_t n_train = train_set.samples.size();
    const int batch_size =
        n_train < 16 ? static_cast<int>(n_train)
                     : std::min<int>(config.batch_size,
                                     static_cast<int>(n_train));

    TrainableParams params = init_trainable(model, config.seed);
    std::vector<double> flat = detail::flatten_params(params);
    AdamState adam = make_adam(flat.size(), AdamConfig{config.lr, 0.9, 0.999,
                                                       1e-8});

    FitResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    result.params = params;

    Rng shuffle_rng = Rng(config.seed).fork(2);
    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
        order[i] = i;
    }

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t cursor = 0;
        while (cursor < n_train) {
            const std::size_t batch_end =
                std::min(cursor + static_cast<std::size_t>(batch_size),
                         n_train);
            const std::size_t batch_n = batch_end - cursor;
            std::vector<double> batch_losses(batch_n, 0.0);
            std::vector<std::vector<double>> batch_grads(batch_n);
            std::vector<std::string> failures(batch_n);

            parallel_for(batch_n, config.threads, [&](std::size_t k) {
                try {
                    const ImageTensor &sample =
                        train_set.samples[order[cursor + k]];
                    const LossAndGradients lg =
                        loss_and_gradients(model, sample, sample.label,
                                           params);
                    batch_losses[k] = lg.loss;
                    batch_grads[k] = detail::flatten_params(lg.gradients);
                } catch (const Error &e) {
                    failures[k] = e.what();
                }
            });
            for (const std::string &f : failures) {
                if (!f.empty()) {
                    throw ContractError("gradient evaluation failed: " + f);
                }
            }

            std::vector<double> mean_grad(flat.size(), 0.0);
            for (std::size_t k = 0; k < batch_n; ++k) {
                epoch_loss += batch_losses[k];
                for (std::size_t j = 0; j < flat.size(); ++j) {
                    mean_grad[j] += batch_grads[k][j];
                }
            }
            for (double &g : mean_grad) {
                g /= static_cast<double>(batch_n);
            }
            adam_step(adam, flat, mean_grad);
            detail::unflatten_params(flat, params);
            cursor = batch_end;
        }
        epoch_loss /= static_cast<double>(n_train);

        // validation pass with exact expectations
        double val_loss = 0.0;
        std::vector<double> sample_losses(val_set.samples.size(), 0.0);
        std::vector<int> val_correct(val_set.samples.size(), 0);
        parallel_for(val_set.samples.size(), config.threads,
                     [&](std::size_t i) {
                         const ImageTensor &sample = val_set.samples[i];
                         const std::vector<double> probs =
                             forward(model, sample, params);
                         sample_losses[i] = cross_entropy(probs, sample.label);
                         const int pred = static_cast<int>(
                             std::max_element(probs.begin(), probs.end()) -
                             probs.begin());
                         val_correct[i] = pred == sample.label ? 1 : 0;
                     });
        long correct = 0;
        for (std::size_t i = 0; i < val_set.samples.size(); ++i) {
            val_loss += sample_losses[i];
            correct += val_correct[i];
        }
        val_loss /= static_cast<double>(val_set.samples.size());
        const double val_acc = static_cast<double>(correct) /
                               static_cast<double>(val_set.samples.size());

        result.metrics.history.push_back(
            EpochRecord{epoch, epoch_loss, val_loss, val_acc});
        result.metrics.loss_history.push_back(epoch_loss);
        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.params = params;
        }
        log_info("epoch " + std::to_string(epoch) + ": train_loss=" +
                 std::to_string(epoch_loss) + " val_loss=" +
                 std::to_string(val_loss) + " val_acc=" +
                 std::to_string(val_acc));
    }
    return result;
}

/// Dispatch on config.stage; the loader stage mutates the model's store.
inline FitResult fit(ModelSpec &model, const Dataset &dataset,
                     const TrainConfig &config) {
    FitResult result;
    if (config.stage == TrainStage::Loader) {
        result.metrics = fit_loaders(model, dataset, config);
        return result;
    }
    return fit_classifier(model, dataset, config);
}

/// epoch,train_loss,val_loss,val_acc rows.
inline void write_history_csv(const std::string &path,
                              const std::vector<EpochRecord> &history) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "epoch,train_loss,val_loss,val_acc\n";
    for (const EpochRecord &row : history) {
        out << row.epoch << "," << format_double(row.train_loss) << ","
            << format_double(row.val_loss) << "," << format_double(row.val_acc)
            << "\n";
    }
}

} // namespace qscene
