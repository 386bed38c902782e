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
 * OpenQASM 2.0 export and import for the gate subset
 * {rx, ry, rz, rzz, cx, cz, h} with numerically bound angles.
 *
 * The exporter writes every angle with 17 significant digits, which
 * round-trips IEEE doubles exactly; the importer accepts exactly the
 * exported subset and rejects measurement/classical constructs.
 */
#pragma once

#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "util.hpp"

namespace qscene {

/// Serialize with all parameters bound; slot angles come from `params`.
inline std::string export_qasm(const CircuitProgram &program,
                               const std::vector<double> &params) {
    QSCENE_REQUIRE(params.size() == static_cast<std::size_t>(program.n_params),
                   "parameter vector length mismatch");
    std::ostringstream out;
    out << "OPENQASM 2.0;\n";
    out << "include \"qelib1.inc\";\n";
    out << "// rotation convention: rx/ry/rz(t) = exp(-i t P/2), "
           "rzz(t) = exp(-i t Z(x)Z/2); qubit 0 is the most significant "
           "index bit\n";
    out << "qreg q[" << program.n_qubits << "];\n";
    for (const Gate &g : program.gates) {
        switch (g.kind) {
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ:
            out << gate_name(g.kind) << "("
                << format_double(resolve_angle(g, params)) << ") q[" << g.q0
                << "];\n";
            break;
        case GateKind::RZZ:
            out << "rzz(" << format_double(resolve_angle(g, params)) << ") q["
                << g.q0 << "],q[" << g.q1 << "];\n";
            break;
        case GateKind::CX:
        case GateKind::CZ:
            out << gate_name(g.kind) << " q[" << g.q0 << "],q[" << g.q1
                << "];\n";
            break;
        case GateKind::H:
            out << "h q[" << g.q0 << "];\n";
            break;
        default:
            throw UnsupportedError("cannot export gate kind");
        }
    }
    return out.str();
}

namespace detail {

struct QasmToken {
    std::string text;
    int line = 1;
    int column = 1;
};

class QasmLexer {
  public:
    explicit QasmLexer(const std::string &text) : text_(text) {}

    /// Next token; punctuation characters are single-character tokens.
    QasmToken next() {
        skip_space_and_comments();
        QasmToken token;
        token.line = line_;
        token.column = column_;
        if (pos_ >= text_.size()) {
            return token; // empty text marks end of input
        }
        const char c = text_[pos_];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
            c == '.' || c == '-' || c == '+') {
            while (pos_ < text_.size()) {
                const char d = text_[pos_];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' ||
                    d == '.' || d == '-' || d == '+') {
                    token.text.push_back(d);
                    advance();
                } else {
                    break;
                }
            }
        } else if (c == '"') {
            token.text.push_back(c);
            advance();
            while (pos_ < text_.size() && text_[pos_] != '"') {
                token.text.push_back(text_[pos_]);
                advance();
            }
            if (pos_ < text_.size()) {
                token.text.push_back('"');
                advance();
            }
        } else {
            token.text.push_back(c);
            advance();
        }
        return token;
    }

  private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < text_.size() &&
                       text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    advance();
                }
            } else {
                break;
            }
        }
    }

    const std::string &text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

inline double parse_angle(const QasmToken &token) {
    if (token.text.empty()) {
        throw ParseError("missing angle", token.line, token.column);
    }
    char *end = nullptr;
    const double value = std::strtod(token.text.c_str(), &end);
    if (end == nullptr || *end != '\0' || end == token.text.c_str()) {
        throw ParseError("malformed angle token '" + token.text + "'",
                         token.line, token.column);
    }
    return value;
}

inline int parse_index(const QasmToken &token) {
    for (char c : token.text) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw ParseError("malformed index '" + token.text + "'",
                             token.line, token.column);
        }
    }
    if (token.text.empty()) {
        throw ParseError("missing index", token.line, token.column);
    }
    return std::atoi(token.text.c_str());
}

} // namespace detail

/**
 * @brief Parse the exported OpenQASM 2.0 subset back into a fully bound
 * program (no free parameters).
 */
inline CircuitProgram import_qasm(const std::string &text) {
    static const std::set<std::string> kUnsupported{
        "measure", "creg", "barrier", "if",    "reset",
        "gate",    "opaque", "u1",    "u2",    "u3"};
    detail::QasmLexer lexer(text);

    auto expect = [&](const std::string &want) {
        const detail::QasmToken token = lexer.next();
        if (token.text != want) {
            throw ParseError("expected '" + want + "', got '" + token.text +
                                 "'",
                             token.line, token.column);
        }
        return token;
    };

    expect("OPENQASM");
    expect("2.0");
    expect(";");

    CircuitProgram program;
    program.n_params = 0;
    program.loading_boundary = 0;
    bool have_qreg = false;
    std::string qreg_name;

    auto parse_qubit_arg = [&](const std::string &reg) {
        detail::QasmToken token = lexer.next();
        if (token.text != reg) {
            throw ParseError("unknown register '" + token.text + "'",
                             token.line, token.column);
        }
        expect("[");
        const int index = detail::parse_index(lexer.next());
        expect("]");
        if (index >= program.n_qubits) {
            throw ParseError("qubit index " + std::to_string(index) +
                                 " outside qreg of size " +
                                 std::to_string(program.n_qubits),
                             token.line, token.column);
        }
        return index;
    };

    for (detail::QasmToken token = lexer.next(); !token.text.empty();
         token = lexer.next()) {
        const std::string &word = token.text;
        if (word == "include") {
            lexer.next(); // filename string
            expect(";");
            continue;
        }
        if (word == "qreg") {
            if (have_qreg) {
                throw UnsupportedError(
                    "multiple quantum registers are not supported");
            }
            const detail::QasmToken name = lexer.next();
            qreg_name = name.text;
            expect("[");
            program.n_qubits = detail::parse_index(lexer.next());
            expect("]");
            expect(";");
            if (program.n_qubits < 1) {
                throw ParseError("empty quantum register", name.line,
                                 name.column);
            }
            have_qreg = true;
            continue;
        }
        if (kUnsupported.count(word) != 0) {
            throw UnsupportedError("unsupported construct '" + word +
                                   "' (line " + std::to_string(token.line) +
                                   "); only the exported gate subset is "
                                   "accepted");
        }
        if (!have_qreg) {
            throw ParseError("gate before qreg declaration", token.line,
                             token.column);
        }

        if (word == "rx" || word == "ry" || word == "rz" || word == "rzz") {
            expect("(");
            const double angle = detail::parse_angle(lexer.next());
            expect(")");
            if (word == "rzz") {
                const int a = parse_qubit_arg(qreg_name);
                expect(",");
                const int b = parse_qubit_arg(qreg_name);
                expect(";");
                program.gates.push_back(Gate::rzz_fixed(a, b, angle));
            } else {
                const GateKind kind = word == "rx"   ? GateKind::RX
                                      : word == "ry" ? GateKind::RY
                                                     : GateKind::RZ;
                const int q = parse_qubit_arg(qreg_name);
                expect(";");
                program.gates.push_back(Gate::rotation_fixed(kind, q, angle));
            }
            continue;
        }
        if (word == "cx" || word == "cz") {
            const int a = parse_qubit_arg(qreg_name);
            expect(",");
            const int b = parse_qubit_arg(qreg_name);
            expect(";");
            program.gates.push_back(word == "cx" ? Gate::cx(a, b)
                                                 : Gate::cz(a, b));
            continue;
        }
        if (word == "h") {
            const int q = parse_qubit_arg(qreg_name);
            expect(";");
            program.gates.push_back(Gate::h(q));
            continue;
        }
        throw UnsupportedError("unsupported gate '" + word + "' (line " +
                               std::to_string(token.line) + ")");
    }
    if (!have_qreg) {
        throw ParseError("no qreg declaration found", 1, 1);
    }
    validate(program);
    return program;
}

} // namespace qscene
