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
 * Exception hierarchy shared by every qscene component.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace qscene {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

/// A caller violated a documented precondition.
class ContractError : public Error {
  public:
    explicit ContractError(const std::string &msg) : Error(msg) {}
};

/// A request exceeds a hard resource bound (e.g. statevector memory).
class CapacityError : public Error {
  public:
    explicit CapacityError(const std::string &msg) : Error(msg) {}
};

/// Input is formally valid but degenerate (e.g. an all-zero image).
class DegenerateInputError : public Error {
  public:
    explicit DegenerateInputError(const std::string &msg) : Error(msg) {}
};

/// A computation produced a non-finite or otherwise unusable value.
class NumericalError : public Error {
  public:
    explicit NumericalError(const std::string &msg) : Error(msg) {}
};

/// A gate or language construct outside the supported subset.
class UnsupportedError : public Error {
  public:
    explicit UnsupportedError(const std::string &msg) : Error(msg) {}
};

/// Malformed text input; carries 1-based line/column of the offending token.
class ParseError : public Error {
  public:
    ParseError(const std::string &msg, int line, int column)
        : Error(msg + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line_(line), column_(column) {}

    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] int column() const { return column_; }

  private:
    int line_;
    int column_;
};

/// Filesystem-level failure (open/read/write).
class IoError : public Error {
  public:
    explicit IoError(const std::string &msg) : Error(msg) {}
};

/// Persisted artifact carries an incompatible format version.
class VersionError : public Error {
  public:
    explicit VersionError(const std::string &msg) : Error(msg) {}
};

/// Persisted artifact failed its integrity check or is truncated.
class CorruptionError : public Error {
  public:
    explicit CorruptionError(const std::string &msg) : Error(msg) {}
};

/// Persisted artifact stores a different encoding scheme than requested.
class SchemeMismatchError : public Error {
  public:
    explicit SchemeMismatchError(const std::string &msg) : Error(msg) {}
};

} // namespace qscene

#define QSCENE_REQUIRE(cond, msg)                                             \
    do {                                                                      \
        if (!(cond)) {                                                        \
            throw qscene::ContractError(msg);                                 \
        }                                                                     \
    } while (0)
