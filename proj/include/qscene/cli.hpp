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
 * Command-line pipeline: synthetic data generation, loader training,
 * classifier training, evaluation, shot-based inference, QASM export, the
 * random baseline, and CSV -> SVG report generation.
 *
 * Every option can come from a flat key=value config file (--config);
 * command-line flags override file values. Subcommand keys use the dotted
 * form, e.g. `train.scheme = pae`.
 */
#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "data.hpp"
#include "error.hpp"
#include "hwio.hpp"
#include "model.hpp"
#include "model_io.hpp"
#include "qasm.hpp"
#include "report.hpp"
#include "train.hpp"
#include "util.hpp"

namespace qscene {

namespace cli_detail {

struct Common {
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out = ".";
};

inline void add_common(CLI::App *cmd, Common &common) {
    cmd->add_option("--seed", common.seed, "RNG seed (default 0)");
    cmd->add_option("--threads", common.threads,
                    "worker cap (0 = hardware concurrency)");
    cmd->add_option("--out", common.out, "output directory or file");
}

inline std::pair<int, int> parse_shape(const std::string &text) {
    const std::size_t x = text.find('x');
    QSCENE_REQUIRE(x != std::string::npos && x > 0 && x + 1 < text.size(),
                   "shape must look like HxW, got '" + text + "'");
    try {
        return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
    } catch (const std::exception &) {
        throw ContractError("shape must look like HxW, got '" + text + "'");
    }
}

inline void ensure_dir(const std::string &path) {
    std::filesystem::create_directories(path);
}

inline GateKind entangler_from_name(const std::string &name) {
    if (name == "cx") {
        return GateKind::CX;
    }
    if (name == "cz") {
        return GateKind::CZ;
    }
    if (name == "rzz") {
        return GateKind::RZZ;
    }
    throw ContractError("entangler must be cx, cz, or rzz; got '" + name +
                        "'");
}

inline Dataset preprocess_dataset(const Dataset &raw, int h, int w) {
    Dataset out;
    out.class_names = raw.class_names;
    out.split_tag = raw.split_tag;
    out.samples.reserve(raw.samples.size());
    for (const ImageTensor &sample : raw.samples) {
        out.samples.push_back(preprocess(sample, h, w));
    }
    return out;
}

/// Dump preprocessed tensors as .qst files (ids sanitized for filenames).
inline void dump_tensor_cache(const std::string &dir, const Dataset &dataset) {
    ensure_dir(dir);
    for (const ImageTensor &sample : dataset.samples) {
        std::string name = sample.source_id;
        for (char &c : name) {
            if (c == '/' || c == '\\' || c == ' ') {
                c = '_';
            }
        }
        write_tensor_cache(dir + "/" + name + ".qst", sample);
    }
}

/// Processing circuits of every unit, parameters bound, blocks offset.
inline CircuitProgram processing_only_program(const ModelSpec &model,
                                              const TrainableParams &params) {
    CircuitProgram joint;
    joint.n_qubits = model.total_qubits();
    const int q = model.unit_qubits();
    for (int unit = 0; unit < model.n_units(); ++unit) {
        const CircuitProgram hea =
            build_hea(q, model.processing.layers, model.processing.connectivity,
                      model.processing.entangler, model.processing.brickwork);
        const CircuitProgram bound =
            bind_parameters(hea, unit_params(model, params, unit));
        for (Gate g : bound.gates) {
            g.q0 += unit * q;
            if (g.q1 >= 0) {
                g.q1 += unit * q;
            }
            joint.gates.push_back(g);
        }
    }
    joint.loading_boundary = 0;
    return joint;
}

inline void write_metrics_csv(const std::string &path,
                              const std::vector<std::string> &labels,
                              const std::vector<std::string> &splits,
                              const std::vector<GateStats> &stats,
                              const std::vector<Metrics> &metrics) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "label,split,depth,n_1q,n_2q,samples,accuracy\n";
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        long samples = 0;
        for (long c : metrics[i].class_counts) {
            samples += c;
        }
        out << labels[i] << "," << splits[i] << "," << stats[i].depth << ","
            << stats[i].n_1q << "," << stats[i].n_2q << "," << samples << ","
            << format_double(metrics[i].accuracy) << "\n";
    }
}

inline void write_confusion_csv(const std::string &path,
                                const std::vector<std::string> &class_names,
                                const Metrics &metrics) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "true_class,predicted_class,count\n";
    for (std::size_t t = 0; t < metrics.confusion.size(); ++t) {
        for (std::size_t p = 0; p < metrics.confusion[t].size(); ++p) {
            out << class_names[t] << "," << class_names[p] << ","
                << metrics.confusion[t][p] << "\n";
        }
    }
}

/// Image whose loader lookups work: id is "<parent-dir>/<filename>" when a
/// parent directory exists, else the bare filename.
inline ImageTensor load_single_image(const std::string &path) {
    const RasterImage raster = read_raster(path);
    ImageTensor img;
    img.height = raster.height;
    img.width = raster.width;
    img.pixels = raster.gray;
    const std::filesystem::path p(path);
    img.source_id = p.has_parent_path() && p.parent_path().has_filename()
                        ? p.parent_path().filename().string() + "/" +
                              p.filename().string()
                        : p.filename().string();
    return img;
}

// ---- subcommand option bundles -----------------------------------------

struct SynthOpts {
    Common common;
    std::string kind = "bright_vs_dark";
    int n_per_class = 50;
    std::string shape = "16x16";
    double noise = 0.1;
};

struct TrainLoaderOpts {
    Common common;
    std::string scheme;
    std::string data;
    int qubits = 8;        // AAE register size
    std::string grid = "2x2"; // BAE block grid
    int block_qubits = 6;  // BAE qubits per block
    int loader_layers = 6;
    int loader_steps = 250;
    int loader_stages = 0;
    double loader_lr = 0.05;
    std::string loader_entangler = "cx";
    int proc_layers = 3;
    std::string connectivity = "ring";
    std::string entangler = "cx";
    bool brickwork = false;
};

struct TrainOpts {
    Common common;
    std::string scheme;
    std::string data;
    std::string model; // AAE/BAE: artifact from train-loader
    int qubits = 10;   // PAE register size
    std::string image_shape = "16x16";
    int proc_layers = 0; // 0 = minimum (= uploading layers) for PAE
    std::string connectivity = "ring";
    std::string entangler = "cx";
    bool brickwork = false;
    std::string split = "0.6,0.2,0.2";
    int epochs = 30;
    int batch_size = 16;
    double lr = 0.01;
    double val_fraction = 0.2;
    std::string cache; // optional preprocessed-tensor dump directory
};

struct EvalOpts {
    Common common;
    std::string model;
    std::string data;
    std::string cache; // optional preprocessed-tensor dump directory
};

struct InferOpts {
    Common common;
    std::string model;
    std::string image;
    std::int64_t shots = 400;
};

struct ExportOpts {
    Common common;
    std::string model;
    std::string image;
};

struct BaselineOpts {
    Common common;
    int n_images = 100;
    double p_success = 0.5;
    double quantile = 0.99;
    long trials = 200000;
};

struct ReportOpts {
    Common common;
    std::string in;
};

// ---- subcommand bodies ---------------------------------------------------

inline int cmd_synth_data(const SynthOpts &opts) {
    const auto [h, w] = parse_shape(opts.shape);
    SyntheticKind kind;
    if (opts.kind == "bright_vs_dark") {
        kind = SyntheticKind::BrightVsDark;
    } else if (opts.kind == "gradient_4class") {
        kind = SyntheticKind::Gradient4Class;
    } else {
        throw ContractError(
            "kind must be bright_vs_dark or gradient_4class; got '" +
            opts.kind + "'");
    }
    const Dataset dataset = make_synthetic(kind, opts.n_per_class, h, w,
                                           opts.noise, opts.common.seed);
    std::vector<int> counters(dataset.class_names.size(), 0);
    for (const std::string &name : dataset.class_names) {
        ensure_dir(opts.common.out + "/" + name);
    }
    for (const ImageTensor &img : dataset.samples) {
        char name[32];
        std::snprintf(name, sizeof(name), "img%04d.pgm",
                      counters[static_cast<std::size_t>(img.label)]++);
        write_pgm(opts.common.out + "/" +
                      dataset.class_names[static_cast<std::size_t>(img.label)] +
                      "/" + name,
                  img.height, img.width, img.pixels);
    }
    std::printf("wrote %zu images (%zu classes, %dx%d) under %s\n",
                dataset.samples.size(), dataset.class_names.size(), h, w,
                opts.common.out.c_str());
    return 0;
}

inline int cmd_train_loader(const TrainLoaderOpts &opts) {
    const Scheme scheme = scheme_from_name(opts.scheme);
    QSCENE_REQUIRE(scheme != Scheme::PAE,
                   "train-loader applies to aae/bae; pae binds angles "
                   "directly in train");
    std::vector<std::string> file_errors;
    const Dataset raw = ingest_directory(opts.data, {}, &file_errors);
    for (const std::string &err : file_errors) {
        std::fprintf(stderr, "warning: %s\n", err.c_str());
    }

    int grid_rows = 1;
    int grid_cols = 1;
    int block_qubits = opts.qubits;
    if (scheme == Scheme::BAE) {
        std::tie(grid_rows, grid_cols) = parse_shape(opts.grid);
        block_qubits = opts.block_qubits;
    }
    const auto [bh, bw] = downsample_shape_for_qubits(block_qubits);
    const int image_h = bh * grid_rows;
    const int image_w = bw * grid_cols;
    const Dataset dataset = preprocess_dataset(raw, image_h, image_w);

    HeaConfig processing{opts.proc_layers,
                         connectivity_from_name(opts.connectivity),
                         entangler_from_name(opts.entangler), opts.brickwork};
    ModelSpec model = assemble_amplitude_model(
        scheme, image_h, image_w, grid_rows, grid_cols, opts.loader_layers,
        processing, dataset.n_classes());
    model.loader_entangler = entangler_from_name(opts.loader_entangler);

    TrainConfig config;
    config.stage = TrainStage::Loader;
    config.seed = opts.common.seed;
    config.threads = opts.common.threads;
    config.loader_steps = opts.loader_steps;
    config.loader_stages = opts.loader_stages;
    config.loader_lr = opts.loader_lr;
    const FitResult result = fit(model, dataset, config);

    ensure_dir(opts.common.out);
    const std::string artifact = opts.common.out + "/model.qmod";
    save_model(artifact, model, init_trainable(model, opts.common.seed),
               opts.common.seed);
    {
        std::ofstream csv(opts.common.out + "/loader_losses.csv");
        csv << "image,kl\n";
        for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
            csv << dataset.samples[i].source_id << ","
                << format_double(result.metrics.loss_history[i]) << "\n";
        }
    }
    double mean_kl = 0.0;
    for (double l : result.metrics.loss_history) {
        mean_kl += l;
    }
    mean_kl /= static_cast<double>(result.metrics.loss_history.size());
    std::printf("trained %zu loaders (%d qubits x %d blocks), mean KL %.6f\n",
                dataset.samples.size(), block_qubits, grid_rows * grid_cols,
                mean_kl);
    std::printf("model artifact: %s\n", artifact.c_str());
    return 0;
}

inline int cmd_train(const TrainOpts &opts) {
    const Scheme scheme = scheme_from_name(opts.scheme);
    std::vector<std::string> file_errors;
    const Dataset raw = ingest_directory(opts.data, {}, &file_errors);
    for (const std::string &err : file_errors) {
        std::fprintf(stderr, "warning: %s\n", err.c_str());
    }

    ModelSpec model;
    if (scheme == Scheme::PAE) {
        const auto [h, w] = parse_shape(opts.image_shape);
        const PaePlan plan = pae_plan(h * w, opts.qubits);
        const int layers = opts.proc_layers > 0 ? opts.proc_layers
                                                : plan.n_upload_layers;
        HeaConfig processing{layers, connectivity_from_name(opts.connectivity),
                             entangler_from_name(opts.entangler),
                             opts.brickwork};
        model = assemble_pae_model(h, w, opts.qubits, processing,
                                   raw.n_classes());
    } else {
        QSCENE_REQUIRE(!opts.model.empty(),
                       "aae/bae training needs --model (the train-loader "
                       "artifact with fitted loaders)");
        ModelArtifact artifact = load_model(opts.model, scheme);
        model = std::move(artifact.model);
        QSCENE_REQUIRE(model.n_classes == raw.n_classes(),
                       "artifact was assembled for " +
                           std::to_string(model.n_classes) +
                           " classes but the dataset has " +
                           std::to_string(raw.n_classes()));
    }
    const Dataset dataset =
        preprocess_dataset(raw, model.image_height, model.image_width);
    if (!opts.cache.empty()) {
        dump_tensor_cache(opts.cache, dataset);
    }

    // three-way stratified split; fit carves its own validation from train
    std::array<double, 3> fractions{};
    {
        std::istringstream in(opts.split);
        std::string cell;
        for (double &f : fractions) {
            QSCENE_REQUIRE(std::getline(in, cell, ','),
                           "split must be three comma-separated fractions");
            f = std::stod(cell);
        }
    }
    const auto parts = split(dataset, fractions, opts.common.seed);

    TrainConfig config;
    config.epochs = opts.epochs;
    config.batch_size = opts.batch_size;
    config.lr = opts.lr;
    config.seed = opts.common.seed;
    config.threads = opts.common.threads;
    config.val_fraction = opts.val_fraction;
    const FitResult result = fit(model, parts[0], config);

    ensure_dir(opts.common.out);
    const std::string artifact_path = opts.common.out + "/model.qmod";
    save_model(artifact_path, model, result.params, opts.common.seed);
    write_history_csv(opts.common.out + "/history.csv",
                      result.metrics.history);

    const GateStats stats =
        gate_stats(joint_bound_program(model, parts[2].samples.empty()
                                                  ? parts[0].samples[0]
                                                  : parts[2].samples[0],
                                       result.params));
    std::vector<std::string> labels;
    std::vector<std::string> split_names;
    std::vector<GateStats> stat_rows;
    std::vector<Metrics> metric_rows;
    const char *names[3] = {"train", "val", "test"};
    for (int s = 0; s < 3; ++s) {
        if (parts[static_cast<std::size_t>(s)].samples.empty()) {
            continue;
        }
        labels.push_back("model.qmod");
        split_names.push_back(names[s]);
        stat_rows.push_back(stats);
        metric_rows.push_back(evaluate(model, result.params,
                                       parts[static_cast<std::size_t>(s)],
                                       opts.common.threads));
    }
    write_metrics_csv(opts.common.out + "/metrics.csv", labels, split_names,
                      stat_rows, metric_rows);
    write_confusion_csv(opts.common.out + "/confusion.csv",
                        dataset.class_names, metric_rows.back());

    for (std::size_t i = 0; i < metric_rows.size(); ++i) {
        std::printf("%s accuracy: %.4f (%zu samples)\n",
                    split_names[i].c_str(), metric_rows[i].accuracy,
                    parts[i].samples.size());
    }
    std::printf("circuit: %ld 1q gates, %ld 2q gates, depth %ld\n",
                stats.n_1q, stats.n_2q, stats.depth);
    std::printf("model artifact: %s\n", artifact_path.c_str());
    return 0;
}

inline int cmd_eval(const EvalOpts &opts) {
    const ModelArtifact artifact = load_model(opts.model);
    std::vector<std::string> file_errors;
    const Dataset raw = ingest_directory(opts.data, {}, &file_errors);
    for (const std::string &err : file_errors) {
        std::fprintf(stderr, "warning: %s\n", err.c_str());
    }
    const Dataset dataset = preprocess_dataset(raw, artifact.model.image_height,
                                               artifact.model.image_width);
    if (!opts.cache.empty()) {
        dump_tensor_cache(opts.cache, dataset);
    }
    const Metrics metrics = evaluate(artifact.model, artifact.params, dataset,
                                     opts.common.threads);

    ensure_dir(opts.common.out);
    const GateStats stats = gate_stats(joint_bound_program(
        artifact.model, dataset.samples[0], artifact.params));
    write_metrics_csv(opts.common.out + "/metrics.csv", {opts.model}, {"eval"},
                      {stats}, {metrics});
    write_confusion_csv(opts.common.out + "/confusion.csv",
                        dataset.class_names, metrics);

    std::printf("accuracy: %.4f over %zu samples\n", metrics.accuracy,
                dataset.samples.size());
    for (std::size_t c = 0; c < metrics.per_class_accuracy.size(); ++c) {
        std::printf("  %s: %.4f (%ld samples)\n",
                    dataset.class_names[c].c_str(),
                    metrics.per_class_accuracy[c], metrics.class_counts[c]);
    }
    return 0;
}

inline int cmd_infer(const InferOpts &opts) {
    const ModelArtifact artifact = load_model(opts.model);
    ImageTensor image = load_single_image(opts.image);
    image = preprocess(image, artifact.model.image_height,
                       artifact.model.image_width);
    const ShotInference inference =
        shot_inference(artifact.model, artifact.params, image, opts.shots,
                       opts.common.seed);

    ensure_dir(opts.common.out);
    write_deviation_csv(opts.common.out + "/deviation.csv", inference.report);

    std::printf("predicted class: %d\n", inference.predicted_class);
    std::printf("probabilities (from %lld shots):",
                static_cast<long long>(opts.shots));
    for (double p : inference.probs_expt) {
        std::printf(" %.4f", p);
    }
    std::printf("\nl1 deviation (sim vs sampled): %.6f\n",
                inference.report.l1);
    return 0;
}

inline int cmd_export(const ExportOpts &opts) {
    const ModelArtifact artifact = load_model(opts.model);
    CircuitProgram program;
    if (opts.image.empty()) {
        program = processing_only_program(artifact.model, artifact.params);
    } else {
        ImageTensor image = load_single_image(opts.image);
        image = preprocess(image, artifact.model.image_height,
                           artifact.model.image_width);
        program = joint_bound_program(artifact.model, image, artifact.params);
    }
    const std::string text = export_qasm(program, {});
    std::ofstream out(opts.common.out);
    if (!out) {
        throw IoError("cannot write " + opts.common.out);
    }
    out << text;
    const GateStats stats = gate_stats(program);
    std::printf("exported %d-qubit circuit: %ld 1q gates, %ld 2q gates, "
                "depth %ld -> %s\n",
                program.n_qubits, stats.n_1q, stats.n_2q, stats.depth,
                opts.common.out.c_str());
    return 0;
}

inline int cmd_baseline(const BaselineOpts &opts) {
    const BaselineQuantile result = random_baseline_quantile(
        opts.n_images, opts.p_success, opts.quantile, opts.trials,
        opts.common.seed);
    std::printf("random-classifier accuracy threshold at quantile %.4g "
                "(n=%d, p=%.4g):\n",
                opts.quantile, opts.n_images, opts.p_success);
    std::printf("  exact binomial CDF inversion: %.4f\n", result.exact);
    std::printf("  monte carlo (%ld trials):     %.4f\n", opts.trials,
                result.monte_carlo);
    return 0;
}

inline int cmd_report(const ReportOpts &opts) {
    namespace fs = std::filesystem;
    ensure_dir(opts.common.out);
    int written = 0;

    const std::string history_path = opts.in + "/history.csv";
    if (fs::exists(history_path)) {
        const CsvTable table = read_csv(history_path);
        const std::vector<double> epoch = table.column("epoch");
        write_svg_plot(opts.common.out + "/loss_curves.svg", "training loss",
                       "epoch", "cross-entropy",
                       {{"train", epoch, table.column("train_loss")},
                        {"val", epoch, table.column("val_loss")}});
        write_svg_plot(opts.common.out + "/val_accuracy.svg",
                       "validation accuracy", "epoch", "accuracy",
                       {{"val", epoch, table.column("val_acc")}});
        written += 2;
    }
    const std::string loader_path = opts.in + "/loader_losses.csv";
    if (fs::exists(loader_path)) {
        const CsvTable table = read_csv(loader_path);
        const std::vector<double> kl = table.column("kl");
        std::vector<double> index(kl.size());
        for (std::size_t i = 0; i < kl.size(); ++i) {
            index[i] = static_cast<double>(i);
        }
        write_svg_plot(opts.common.out + "/loader_kl.svg",
                       "loader KL by image", "image index", "best KL",
                       {{"kl", index, kl}});
        ++written;
    }
    const std::string metrics_path = opts.in + "/metrics.csv";
    if (fs::exists(metrics_path)) {
        const CsvTable table = read_csv(metrics_path);
        if (table.column_index("depth") >= 0 &&
            table.column_index("accuracy") >= 0 && table.rows.size() >= 2) {
            write_svg_plot(opts.common.out + "/accuracy_vs_depth.svg",
                           "accuracy vs circuit depth", "depth", "accuracy",
                           {{"models", table.column("depth"),
                             table.column("accuracy")}});
            ++written;
        }
    }
    const std::string deviation_path = opts.in + "/deviation.csv";
    if (fs::exists(deviation_path)) {
        const CsvTable table = read_csv(deviation_path);
        write_svg_plot(opts.common.out + "/deviation.svg",
                       "exact vs sampled P(0)", "measured qubit", "P(0)",
                       {{"sim", table.column("qubit"), table.column("p_sim")},
                        {"sampled", table.column("qubit"),
                         table.column("p_expt")}});
        ++written;
    }
    QSCENE_REQUIRE(written > 0,
                   "no known CSV artifacts (history.csv, loader_losses.csv, "
                   "metrics.csv, deviation.csv) found under " +
                       opts.in);
    std::printf("wrote %d SVG plot(s) under %s\n", written,
                opts.common.out.c_str());
    return 0;
}

} // namespace cli_detail

/// Entry point shared by the binary and the tests.
inline int run_cli(std::vector<std::string> args) {
    using namespace cli_detail;
    CLI::App app{"qscene: variational quantum image-classification toolkit"};
    app.set_config("--config", "",
                   "flat key=value config file (dotted keys reach "
                   "subcommands, e.g. train.scheme=pae); flags override");
    app.require_subcommand(1);
    app.fallthrough();

    SynthOpts synth;
    CLI::App *synth_cmd = app.add_subcommand(
        "synth-data", "generate a deterministic synthetic dataset");
    add_common(synth_cmd, synth.common);
    synth_cmd->add_option("--kind", synth.kind,
                          "bright_vs_dark or gradient_4class");
    synth_cmd->add_option("--n", synth.n_per_class, "images per class");
    synth_cmd->add_option("--shape", synth.shape, "image shape HxW");
    synth_cmd->add_option("--noise", synth.noise, "uniform noise amplitude");

    TrainLoaderOpts loader;
    CLI::App *loader_cmd = app.add_subcommand(
        "train-loader", "fit amplitude loaders for every image (aae/bae)");
    add_common(loader_cmd, loader.common);
    loader_cmd->add_option("--scheme", loader.scheme, "aae or bae")
        ->required();
    loader_cmd->add_option("--data", loader.data, "dataset root directory")
        ->required();
    loader_cmd->add_option("--qubits", loader.qubits, "aae register size");
    loader_cmd->add_option("--grid", loader.grid, "bae block grid RxC");
    loader_cmd->add_option("--block-qubits", loader.block_qubits,
                           "bae qubits per block");
    loader_cmd->add_option("--loader-layers", loader.loader_layers,
                           "entangling layers in the loader ansatz");
    loader_cmd->add_option("--loader-steps", loader.loader_steps,
                           "Adam steps per hierarchical stage");
    loader_cmd->add_option("--loader-stages", loader.loader_stages,
                           "hierarchical stages (0 = ceil(q/4))");
    loader_cmd->add_option("--loader-lr", loader.loader_lr,
                           "loader Adam learning rate");
    loader_cmd->add_option("--loader-entangler", loader.loader_entangler,
                           "cx, cz, or rzz");
    loader_cmd->add_option("--layers", loader.proc_layers,
                           "processing layers recorded for later training");
    loader_cmd->add_option("--connectivity", loader.connectivity,
                           "all, ring, or line");
    loader_cmd->add_option("--entangler", loader.entangler, "cx, cz, or rzz");
    loader_cmd->add_flag("--brickwork", loader.brickwork,
                         "alternate even/odd entangler sublayers");

    TrainOpts train;
    CLI::App *train_cmd =
        app.add_subcommand("train", "train the classifier stage");
    add_common(train_cmd, train.common);
    train_cmd->add_option("--scheme", train.scheme, "aae, bae, or pae")
        ->required();
    train_cmd->add_option("--data", train.data, "dataset root directory")
        ->required();
    train_cmd->add_option("--model", train.model,
                          "train-loader artifact (aae/bae)");
    train_cmd->add_option("--qubits", train.qubits, "pae register size");
    train_cmd->add_option("--image-shape", train.image_shape,
                          "pae downsampled image shape HxW");
    train_cmd->add_option("--layers", train.proc_layers,
                          "processing layers (0 = uploading minimum)");
    train_cmd->add_option("--connectivity", train.connectivity,
                          "all, ring, or line");
    train_cmd->add_option("--entangler", train.entangler, "cx, cz, or rzz");
    train_cmd->add_flag("--brickwork", train.brickwork,
                        "alternate even/odd entangler sublayers");
    train_cmd->add_option("--split", train.split,
                          "train,val,test fractions");
    train_cmd->add_option("--epochs", train.epochs, "training epochs");
    train_cmd->add_option("--batch", train.batch_size, "mini-batch size");
    train_cmd->add_option("--lr", train.lr, "Adam learning rate");
    train_cmd->add_option("--val-fraction", train.val_fraction,
                          "validation share carved from the train split");
    train_cmd->add_option("--cache", train.cache,
                          "write preprocessed tensors (.qst) here");

    EvalOpts eval_opts;
    CLI::App *eval_cmd =
        app.add_subcommand("eval", "evaluate a trained model on a dataset");
    add_common(eval_cmd, eval_opts.common);
    eval_cmd->add_option("--model", eval_opts.model, "model artifact")
        ->required();
    eval_cmd->add_option("--data", eval_opts.data, "dataset root directory")
        ->required();
    eval_cmd->add_option("--cache", eval_opts.cache,
                         "write preprocessed tensors (.qst) here");

    InferOpts infer;
    CLI::App *infer_cmd = app.add_subcommand(
        "infer", "shot-based inference on one image with deviation metrics");
    add_common(infer_cmd, infer.common);
    infer_cmd->add_option("--model", infer.model, "model artifact")
        ->required();
    infer_cmd->add_option("--image", infer.image, "image file")->required();
    infer_cmd->add_option("--shots", infer.shots, "measurement shots");

    ExportOpts export_opts;
    CLI::App *export_cmd = app.add_subcommand(
        "export", "export a bound circuit as OpenQASM 2.0");
    add_common(export_cmd, export_opts.common);
    export_cmd->add_option("--model", export_opts.model, "model artifact")
        ->required();
    export_cmd->add_option("--image", export_opts.image,
                           "bind this image's loading segment too");

    BaselineOpts baseline;
    CLI::App *baseline_cmd = app.add_subcommand(
        "baseline", "random-classifier accuracy quantile (exact + MC)");
    add_common(baseline_cmd, baseline.common);
    baseline_cmd->add_option("--n", baseline.n_images, "number of images");
    baseline_cmd->add_option("--p", baseline.p_success,
                             "per-image success probability");
    baseline_cmd->add_option("--q", baseline.quantile, "quantile in (0,1)");
    baseline_cmd->add_option("--trials", baseline.trials,
                             "Monte Carlo trials");

    ReportOpts report;
    CLI::App *report_cmd = app.add_subcommand(
        "report", "render SVG plots from previously written CSV artifacts");
    add_common(report_cmd, report.common);
    report_cmd->add_option("--in", report.in, "directory with CSV artifacts")
        ->required();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "%s\n", app.help().c_str());
        return 2;
    }

    try {
        if (synth_cmd->parsed()) {
            return cmd_synth_data(synth);
        }
        if (loader_cmd->parsed()) {
            return cmd_train_loader(loader);
        }
        if (train_cmd->parsed()) {
            return cmd_train(train);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_opts);
        }
        if (infer_cmd->parsed()) {
            return cmd_infer(infer);
        }
        if (export_cmd->parsed()) {
            return cmd_export(export_opts);
        }
        if (baseline_cmd->parsed()) {
            return cmd_baseline(baseline);
        }
        if (report_cmd->parsed()) {
            return cmd_report(report);
        }
    } catch (const Error &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

inline int run_cli(int argc, const char *const *argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run_cli(std::move(args));
}

} // namespace qscene
