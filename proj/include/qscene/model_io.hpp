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
 * Versioned text persistence for trained models.
 *
 * Layout: a `qscene-model v1` header, key/value lines (scheme, shapes,
 * circuit configuration, conventions), decimal parameter blocks written
 * with 17 significant digits (exact double round trip), per-image loader
 * parameters, and a trailing FNV-1a-64 checksum line covering every
 * preceding byte.
 */
#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "util.hpp"

namespace qscene {

struct ModelArtifact {
    ModelSpec model;
    TrainableParams params;
    std::uint64_t seed = 0;
};

namespace detail {

constexpr const char *kModelMagic = "qscene-model";
constexpr const char *kModelVersion = "v1";

inline std::uint64_t fnv1a64(const std::string &data) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

inline std::string escape_id(const std::string &id) {
    std::string out;
    for (char c : id) {
        switch (c) {
        case '%':
            out += "%25";
            break;
        case ' ':
            out += "%20";
            break;
        case '\t':
            out += "%09";
            break;
        case '\n':
            out += "%0A";
            break;
        default:
            out.push_back(c);
        }
    }
    return out;
}

inline std::string unescape_id(const std::string &id) {
    std::string out;
    for (std::size_t i = 0; i < id.size(); ++i) {
        if (id[i] == '%' && i + 2 < id.size()) {
            const std::string code = id.substr(i + 1, 2);
            if (code == "25") {
                out.push_back('%');
            } else if (code == "20") {
                out.push_back(' ');
            } else if (code == "09") {
                out.push_back('\t');
            } else if (code == "0A") {
                out.push_back('\n');
            } else {
                out.push_back(id[i]);
                continue;
            }
            i += 2;
        } else {
            out.push_back(id[i]);
        }
    }
    return out;
}

inline void emit_vector(std::ostringstream &out,
                        const std::vector<double> &values) {
    out << values.size();
    for (double v : values) {
        out << " " << format_double(v);
    }
}

inline std::vector<double> read_vector(std::istringstream &in) {
    std::size_t count = 0;
    if (!(in >> count)) {
        throw CorruptionError("malformed vector length");
    }
    std::vector<double> values(count);
    for (double &v : values) {
        if (!(in >> v)) {
            throw CorruptionError("truncated vector payload");
        }
    }
    return values;
}

} // namespace detail

/// Serialize model + parameters; `seed` records the training seed.
inline void save_model(const std::string &path, const ModelSpec &model,
                       const TrainableParams &params, std::uint64_t seed = 0) {
    std::ostringstream out;
    out << detail::kModelMagic << " " << detail::kModelVersion << "\n";
    out << "# conventions: qubit 0 most significant; rx/ry/rz(t)=exp(-i t "
           "P/2); rzz(t)=exp(-i t ZZ/2)\n";
    out << "scheme " << scheme_name(model.scheme) << "\n";
    out << "classes " << model.n_classes << "\n";
    out << "image " << model.image_height << " " << model.image_width << "\n";
    out << "seed " << seed << "\n";
    if (model.scheme == Scheme::PAE) {
        out << "pae_qubits " << model.plan.n_qubits << "\n";
    } else {
        out << "grid " << model.partition.grid_rows << " "
            << model.partition.grid_cols << "\n";
        out << "loader_layers " << model.loader_layers << "\n";
        out << "loader_entangler " << gate_name(model.loader_entangler)
            << "\n";
    }
    out << "proc_layers " << model.processing.layers << "\n";
    out << "proc_connectivity "
        << connectivity_name(model.processing.connectivity) << "\n";
    out << "proc_entangler " << gate_name(model.processing.entangler) << "\n";
    out << "proc_brickwork " << (model.processing.brickwork ? 1 : 0) << "\n";
    out << "measured " << model.measured_qubits.size();
    for (int q : model.measured_qubits) {
        out << " " << q;
    }
    out << "\n";

    out << "quantum ";
    detail::emit_vector(out, params.quantum);
    out << "\n";
    out << "weights " << params.weights.size() << " "
        << (params.weights.empty() ? 0 : params.weights[0].size());
    for (const auto &row : params.weights) {
        for (double w : row) {
            out << " " << format_double(w);
        }
    }
    out << "\n";
    out << "bias ";
    detail::emit_vector(out, params.bias);
    out << "\n";

    out << "loaders " << model.loaders.entries.size() << "\n";
    for (const auto &[id, blocks] : model.loaders.entries) {
        out << "loader " << detail::escape_id(id) << " " << blocks.size();
        for (const auto &block : blocks) {
            out << " ";
            detail::emit_vector(out, block);
        }
        out << "\n";
    }

    const std::string payload = out.str();
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("cannot write " + path);
    }
    char checksum[32];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(payload)));
    file << payload << "checksum fnv1a64 " << checksum << "\n";
}

/// Parse and verify an artifact; throws VersionError / CorruptionError.
inline ModelArtifact load_model(const std::string &path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open " + path);
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    const std::string text = buffer.str();

    const std::string checksum_tag = "checksum fnv1a64 ";
    const std::size_t tag_pos = text.rfind(checksum_tag);
    if (tag_pos == std::string::npos ||
        (tag_pos != 0 && text[tag_pos - 1] != '\n')) {
        throw CorruptionError("missing checksum trailer in " + path);
    }
    const std::string payload = text.substr(0, tag_pos);
    std::string stored = text.substr(tag_pos + checksum_tag.size());
    while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) {
        stored.pop_back();
    }
    char expected[32];
    std::snprintf(expected, sizeof(expected), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(payload)));
    if (stored != expected) {
        throw CorruptionError("checksum mismatch in " + path +
                              " (artifact corrupted or truncated)");
    }

    std::istringstream lines(payload);
    std::string line;
    if (!std::getline(lines, line)) {
        throw CorruptionError("empty artifact " + path);
    }
    {
        std::istringstream header(line);
        std::string magic;
        std::string version;
        header >> magic >> version;
        if (magic != detail::kModelMagic) {
            throw CorruptionError(path + " is not a qscene model artifact");
        }
        if (version != detail::kModelVersion) {
            throw VersionError("artifact version '" + version +
                               "' is incompatible with this build (expected " +
                               std::string(detail::kModelVersion) + ")");
        }
    }

    std::string scheme_str;
    int n_classes = 0;
    int image_h = 0;
    int image_w = 0;
    std::uint64_t seed = 0;
    int pae_qubits = 0;
    int grid_rows = 1;
    int grid_cols = 1;
    int loader_layers = 6;
    std::string loader_entangler = "cx";
    int proc_layers = 3;
    std::string proc_connectivity = "ring";
    std::string proc_entangler = "cx";
    int proc_brickwork = 0;
    std::vector<int> measured;
    TrainableParams params;
    std::size_t weight_rows = 0;
    std::size_t weight_cols = 0;
    LoaderStore loaders;

    try {
        while (std::getline(lines, line)) {
            if (line.empty() || line[0] == '#') {
                continue;
            }
            std::istringstream in(line);
            std::string key;
            in >> key;
            if (key == "scheme") {
                in >> scheme_str;
            } else if (key == "classes") {
                in >> n_classes;
            } else if (key == "image") {
                in >> image_h >> image_w;
            } else if (key == "seed") {
                in >> seed;
            } else if (key == "pae_qubits") {
                in >> pae_qubits;
            } else if (key == "grid") {
                in >> grid_rows >> grid_cols;
            } else if (key == "loader_layers") {
                in >> loader_layers;
            } else if (key == "loader_entangler") {
                in >> loader_entangler;
            } else if (key == "proc_layers") {
                in >> proc_layers;
            } else if (key == "proc_connectivity") {
                in >> proc_connectivity;
            } else if (key == "proc_entangler") {
                in >> proc_entangler;
            } else if (key == "proc_brickwork") {
                in >> proc_brickwork;
            } else if (key == "measured") {
                std::size_t count = 0;
                in >> count;
                measured.resize(count);
                for (int &q : measured) {
                    in >> q;
                }
            } else if (key == "quantum") {
                params.quantum = detail::read_vector(in);
            } else if (key == "weights") {
                in >> weight_rows >> weight_cols;
                params.weights.assign(weight_rows,
                                      std::vector<double>(weight_cols, 0.0));
                for (auto &row : params.weights) {
                    for (double &w : row) {
                        if (!(in >> w)) {
                            throw CorruptionError("truncated weight block");
                        }
                    }
                }
            } else if (key == "bias") {
                params.bias = detail::read_vector(in);
            } else if (key == "loaders") {
                continue; // count is implied by the loader lines
            } else if (key == "loader") {
                std::string id;
                std::size_t n_blocks = 0;
                in >> id >> n_blocks;
                std::vector<std::vector<double>> blocks;
                blocks.reserve(n_blocks);
                for (std::size_t b = 0; b < n_blocks; ++b) {
                    blocks.push_back(detail::read_vector(in));
                }
                loaders.entries[detail::unescape_id(id)] = std::move(blocks);
            } else {
                throw CorruptionError("unknown artifact key '" + key + "'");
            }
        }
    } catch (const CorruptionError &) {
        throw;
    } catch (const std::exception &e) {
        throw CorruptionError("malformed artifact " + path + ": " + e.what());
    }

    const Scheme scheme = scheme_from_name(scheme_str);
    const HeaConfig processing{proc_layers,
                               connectivity_from_name(proc_connectivity),
                               proc_entangler == "cx"  ? GateKind::CX
                               : proc_entangler == "cz" ? GateKind::CZ
                                                        : GateKind::RZZ,
                               proc_brickwork != 0};
    ModelArtifact artifact;
    artifact.seed = seed;
    if (scheme == Scheme::PAE) {
        artifact.model = assemble_pae_model(image_h, image_w, pae_qubits,
                                            processing, n_classes);
    } else {
        artifact.model = assemble_amplitude_model(
            scheme, image_h, image_w, grid_rows, grid_cols, loader_layers,
            processing, n_classes);
        artifact.model.loader_entangler =
            loader_entangler == "cx"  ? GateKind::CX
            : loader_entangler == "cz" ? GateKind::CZ
                                       : GateKind::RZZ;
    }
    artifact.model.loaders = std::move(loaders);
    if (!measured.empty()) {
        artifact.model.measured_qubits = measured;
    }
    artifact.params = std::move(params);

    const std::size_t expected_quantum =
        static_cast<std::size_t>(artifact.model.n_units()) *
        artifact.model.proc_params_per_unit;
    if (artifact.params.quantum.size() != expected_quantum ||
        weight_rows != static_cast<std::size_t>(n_classes) ||
        weight_cols != artifact.model.measured_qubits.size() ||
        artifact.params.bias.size() != static_cast<std::size_t>(n_classes)) {
        throw CorruptionError("parameter blocks in " + path +
                              " do not match the declared model shape");
    }
    return artifact;
}

/// Load and require a specific scheme (e.g. a BAE artifact opened as AAE
/// is a scheme mismatch, not a silent reinterpretation).
inline ModelArtifact load_model(const std::string &path, Scheme expected) {
    ModelArtifact artifact = load_model(path);
    if (artifact.model.scheme != expected) {
        throw SchemeMismatchError(
            path + " stores a " +
            std::string(scheme_name(artifact.model.scheme)) +
            " model, not " + scheme_name(expected));
    }
    return artifact;
}

} // namespace qscene
