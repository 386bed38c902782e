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
 * Image tensors, dataset ingestion and preprocessing, synthetic dataset
 * generators, and stratified splits.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "codecs.hpp"
#include "error.hpp"
#include "util.hpp"

namespace qscene {

/// Grayscale pixel grid in [0, 1] with a class label.
struct ImageTensor {
    int height = 0;
    int width = 0;
    std::vector<double> pixels; // row-major
    int label = -1;
    std::string source_id;

    [[nodiscard]] double at(int r, int c) const {
        return pixels[static_cast<std::size_t>(r) * width + c];
    }
    double &at(int r, int c) {
        return pixels[static_cast<std::size_t>(r) * width + c];
    }
    [[nodiscard]] std::size_t pixel_count() const { return pixels.size(); }
};

enum class SplitTag : int { Train, Val, Test };

struct Dataset {
    std::vector<ImageTensor> samples;
    std::vector<std::string> class_names;
    SplitTag split_tag = SplitTag::Train;

    [[nodiscard]] std::size_t size() const { return samples.size(); }
    [[nodiscard]] int n_classes() const {
        return static_cast<int>(class_names.size());
    }
};

inline ImageTensor read_tensor_cache(const std::string &path);

/**
 * @brief Load root/<class>/<image> trees.
 *
 * Classes are the (lexicographically sorted) subdirectory names unless an
 * explicit list is given; labels follow that order. Raster formats and
 * `.qst` tensor caches are both accepted. Unreadable files are reported
 * through `file_errors` and skipped; an empty class is a contract
 * violation.
 */
inline Dataset ingest_directory(const std::string &root,
                                std::vector<std::string> class_subdirs = {},
                                std::vector<std::string> *file_errors = nullptr) {
    namespace fs = std::filesystem;
    QSCENE_REQUIRE(fs::is_directory(root),
                   "dataset root does not exist: " + root);
    if (class_subdirs.empty()) {
        for (const auto &entry : fs::directory_iterator(root)) {
            if (entry.is_directory()) {
                class_subdirs.push_back(entry.path().filename().string());
            }
        }
        std::sort(class_subdirs.begin(), class_subdirs.end());
    }
    QSCENE_REQUIRE(class_subdirs.size() >= 2,
                   "need at least two class subdirectories under " + root);

    Dataset dataset;
    dataset.class_names = class_subdirs;
    for (std::size_t label = 0; label < class_subdirs.size(); ++label) {
        const fs::path dir = fs::path(root) / class_subdirs[label];
        QSCENE_REQUIRE(fs::is_directory(dir),
                       "missing class subdirectory: " + dir.string());
        std::vector<std::string> files;
        for (const auto &entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file()) {
                files.push_back(entry.path().filename().string());
            }
        }
        std::sort(files.begin(), files.end());
        std::size_t loaded = 0;
        for (const std::string &name : files) {
            const std::string path = (dir / name).string();
            try {
                ImageTensor img;
                if (detail::lower_ext(path) == "qst") {
                    img = read_tensor_cache(path);
                } else {
                    RasterImage raster = read_raster(path);
                    img.height = raster.height;
                    img.width = raster.width;
                    img.pixels = std::move(raster.gray);
                }
                img.label = static_cast<int>(label);
                img.source_id = class_subdirs[label] + "/" + name;
                dataset.samples.push_back(std::move(img));
                ++loaded;
            } catch (const Error &e) {
                if (file_errors != nullptr) {
                    file_errors->push_back(path + ": " + e.what());
                }
                log_info(std::string("skipping ") + path + ": " + e.what());
            }
        }
        QSCENE_REQUIRE(loaded > 0,
                       "class '" + class_subdirs[label] +
                           "' contributed no readable images");
    }
    return dataset;
}

/**
 * @brief Downsample to target (h, w) by average pooling; output rescaled to
 * [0, 1] by its global maximum.
 *
 * When the target does not divide the source, the largest divisible region
 * is center-cropped first. Upscaling is a contract violation; an all-zero
 * result is degenerate.
 */
inline ImageTensor preprocess(const ImageTensor &image, int target_h,
                              int target_w) {
    QSCENE_REQUIRE(target_h >= 1 && target_w >= 1, "target dims must be >= 1");
    QSCENE_REQUIRE(target_h <= image.height && target_w <= image.width,
                   "preprocess cannot upscale (target exceeds source)");

    const int crop_h = (image.height / target_h) * target_h;
    const int crop_w = (image.width / target_w) * target_w;
    const int off_r = (image.height - crop_h) / 2;
    const int off_c = (image.width - crop_w) / 2;
    const int cell_h = crop_h / target_h;
    const int cell_w = crop_w / target_w;

    ImageTensor out;
    out.height = target_h;
    out.width = target_w;
    out.label = image.label;
    out.source_id = image.source_id;
    out.pixels.assign(static_cast<std::size_t>(target_h) * target_w, 0.0);

    double max_value = 0.0;
    for (int r = 0; r < target_h; ++r) {
        for (int c = 0; c < target_w; ++c) {
            double acc = 0.0;
            for (int dr = 0; dr < cell_h; ++dr) {
                for (int dc = 0; dc < cell_w; ++dc) {
                    acc += image.at(off_r + r * cell_h + dr,
                                    off_c + c * cell_w + dc);
                }
            }
            const double mean = acc / (static_cast<double>(cell_h) * cell_w);
            out.at(r, c) = mean;
            max_value = std::max(max_value, mean);
        }
    }
    if (max_value <= 0.0) {
        throw DegenerateInputError("image is all zeros after pooling: " +
                                   image.source_id);
    }
    for (double &p : out.pixels) {
        p /= max_value;
    }
    return out;
}

/// Target raster shape for an N-qubit amplitude register: 2^floor(N/2) rows
/// by 2^ceil(N/2) columns, so the pixel count is exactly 2^N.
inline std::pair<int, int> downsample_shape_for_qubits(int n_qubits) {
    QSCENE_REQUIRE(n_qubits >= 1 && n_qubits <= 30, "n_qubits out of range");
    const int h = 1 << (n_qubits / 2);
    const int w = 1 << (n_qubits - n_qubits / 2);
    return {h, w};
}

// Cached-tensor container: "QSCT" magic, u32 version, u32 height, u32
// width, i32 label, u32 id length, id bytes, then height*width float64
// pixels row-major. All integers and doubles little-endian.
namespace detail {

constexpr char kTensorMagic[4] = {'Q', 'S', 'C', 'T'};
constexpr std::uint32_t kTensorVersion = 1;

inline void put_u32(std::ostream &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

inline std::uint32_t get_u32(std::istream &in, const std::string &path) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        const int c = in.get();
        if (c == EOF) {
            throw CorruptionError("truncated tensor cache " + path);
        }
        v |= static_cast<std::uint32_t>(c & 0xFF) << (8 * i);
    }
    return v;
}

inline void put_f64(std::ostream &out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
        out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
}

inline double get_f64(std::istream &in, const std::string &path) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        const int c = in.get();
        if (c == EOF) {
            throw CorruptionError("truncated tensor cache " + path);
        }
        bits |= static_cast<std::uint64_t>(c & 0xFF) << (8 * i);
    }
    double value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
}

} // namespace detail

/// Write one preprocessed tensor to the binary cache container.
inline void write_tensor_cache(const std::string &path,
                               const ImageTensor &image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out.write(detail::kTensorMagic, 4);
    detail::put_u32(out, detail::kTensorVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(image.height));
    detail::put_u32(out, static_cast<std::uint32_t>(image.width));
    detail::put_u32(out, static_cast<std::uint32_t>(image.label));
    detail::put_u32(out, static_cast<std::uint32_t>(image.source_id.size()));
    out.write(image.source_id.data(),
              static_cast<std::streamsize>(image.source_id.size()));
    for (double p : image.pixels) {
        detail::put_f64(out, p);
    }
}

/// Read a tensor back, bit-exact.
inline ImageTensor read_tensor_cache(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, detail::kTensorMagic, 4) != 0) {
        throw CorruptionError(path + " is not a qscene tensor cache");
    }
    const std::uint32_t version = detail::get_u32(in, path);
    if (version != detail::kTensorVersion) {
        throw VersionError("tensor cache version " + std::to_string(version) +
                           " is incompatible (expected " +
                           std::to_string(detail::kTensorVersion) + ")");
    }
    ImageTensor image;
    image.height = static_cast<int>(detail::get_u32(in, path));
    image.width = static_cast<int>(detail::get_u32(in, path));
    image.label = static_cast<int>(detail::get_u32(in, path));
    const std::uint32_t id_len = detail::get_u32(in, path);
    image.source_id.resize(id_len);
    in.read(image.source_id.data(), id_len);
    if (in.gcount() != static_cast<std::streamsize>(id_len)) {
        throw CorruptionError("truncated tensor cache " + path);
    }
    const std::size_t count =
        static_cast<std::size_t>(image.height) * image.width;
    image.pixels.resize(count);
    for (double &p : image.pixels) {
        p = detail::get_f64(in, path);
    }
    return image;
}

enum class SyntheticKind : int { BrightVsDark, Gradient4Class };

/**
 * @brief Deterministic desk-scale datasets.
 *
 * BrightVsDark: constant plates at mean 0.75 ("bright") / 0.25 ("dark")
 * plus uniform noise. Gradient4Class: linear ramps in four orientations
 * plus uniform noise. Pixels are clamped to [0, 1].
 */
inline Dataset make_synthetic(SyntheticKind kind, int n_per_class, int height,
                              int width, double noise, std::uint64_t seed) {
    QSCENE_REQUIRE(n_per_class >= 1, "n_per_class must be >= 1");
    QSCENE_REQUIRE(height >= 2 && width >= 2, "shape must be at least 2x2");
    Dataset dataset;
    dataset.class_names = kind == SyntheticKind::BrightVsDark
                              ? std::vector<std::string>{"bright", "dark"}
                              : std::vector<std::string>{"ramp_lr", "ramp_rl",
                                                         "ramp_tb", "ramp_bt"};
    Rng rng(seed);
    const int n_classes = dataset.n_classes();
    for (int label = 0; label < n_classes; ++label) {
        for (int k = 0; k < n_per_class; ++k) {
            ImageTensor img;
            img.height = height;
            img.width = width;
            img.label = label;
            img.source_id = dataset.class_names[label] + "/" +
                            std::to_string(k);
            img.pixels.resize(static_cast<std::size_t>(height) * width);
            for (int r = 0; r < height; ++r) {
                for (int c = 0; c < width; ++c) {
                    double base;
                    if (kind == SyntheticKind::BrightVsDark) {
                        base = label == 0 ? 0.75 : 0.25;
                    } else {
                        const double t_lr =
                            static_cast<double>(c) / (width - 1);
                        const double t_tb =
                            static_cast<double>(r) / (height - 1);
                        switch (label) {
                        case 0:
                            base = t_lr;
                            break;
                        case 1:
                            base = 1.0 - t_lr;
                            break;
                        case 2:
                            base = t_tb;
                            break;
                        default:
                            base = 1.0 - t_tb;
                            break;
                        }
                    }
                    const double jitter =
                        noise > 0.0 ? rng.uniform(-noise, noise) : 0.0;
                    img.at(r, c) =
                        std::min(1.0, std::max(0.0, base + jitter));
                }
            }
            dataset.samples.push_back(std::move(img));
        }
    }
    return dataset;
}

/**
 * @brief Stratified, seeded, exact three-way partition.
 *
 * Fractions must be positive and sum to 1; every class needs at least as
 * many samples as there are splits.
 */
inline std::array<Dataset, 3> split(const Dataset &dataset,
                                    const std::array<double, 3> &fractions,
                                    std::uint64_t seed) {
    double sum = 0.0;
    for (double f : fractions) {
        QSCENE_REQUIRE(f > 0.0, "split fractions must be positive");
        sum += f;
    }
    QSCENE_REQUIRE(std::abs(sum - 1.0) < 1e-9, "split fractions must sum to 1");
    QSCENE_REQUIRE(!dataset.samples.empty(), "cannot split an empty dataset");

    std::vector<std::vector<std::size_t>> per_class(
        dataset.class_names.size());
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const int label = dataset.samples[i].label;
        QSCENE_REQUIRE(label >= 0 &&
                           label < static_cast<int>(per_class.size()),
                       "sample label outside class list");
        per_class[static_cast<std::size_t>(label)].push_back(i);
    }

    std::array<Dataset, 3> out;
    for (std::size_t s = 0; s < 3; ++s) {
        out[s].class_names = dataset.class_names;
    }
    out[0].split_tag = SplitTag::Train;
    out[1].split_tag = SplitTag::Val;
    out[2].split_tag = SplitTag::Test;

    Rng rng(seed);
    for (std::size_t cls = 0; cls < per_class.size(); ++cls) {
        auto &indices = per_class[cls];
        QSCENE_REQUIRE(indices.size() >= 3,
                       "class '" + dataset.class_names[cls] +
                           "' has fewer samples than splits");
        Rng stream = rng.fork(cls);
        stream.shuffle(indices);
        const std::size_t n = indices.size();
        const std::size_t n_train = static_cast<std::size_t>(
            std::floor(fractions[0] * static_cast<double>(n) + 1e-9));
        const std::size_t n_val = static_cast<std::size_t>(
            std::floor(fractions[1] * static_cast<double>(n) + 1e-9));
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t bucket = k < n_train ? 0
                                       : k < n_train + n_val ? 1
                                                             : 2;
            out[bucket].samples.push_back(dataset.samples[indices[k]]);
        }
    }
    return out;
}

} // namespace qscene
