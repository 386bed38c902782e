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
 * Deterministic RNG streams, a minimal thread pool helper, logging, and
 * small formatting utilities.
 */
#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"

namespace qscene {

/**
 * @brief Seeded random stream with explicit, platform-stable conversions.
 *
 * std::mt19937_64 output is pinned by the standard; the distribution
 * adapters are not, so uniform/integer draws are implemented here directly.
 * Identical seeds therefore give identical draws on every platform.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        QSCENE_REQUIRE(n > 0, "Rng::below requires n > 0");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return x % n;
    }

    /// In-place Fisher-Yates shuffle with draws from this stream.
    template <typename T> void shuffle(std::vector<T> &items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

    /// Derive an independent child stream; stable across platforms.
    Rng fork(std::uint64_t stream_id) {
        // SplitMix64 finalizer over (base draw, stream id).
        std::uint64_t z = next_u64() + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

  private:
    std::mt19937_64 engine_;
};

/**
 * @brief Run fn(i) for i in [0, count) on up to max_threads workers.
 *
 * Results must be written to disjoint slots so the outcome is independent
 * of scheduling. max_threads <= 1 runs inline.
 */
template <typename Fn>
void parallel_for(std::size_t count, unsigned max_threads, Fn &&fn) {
    if (count == 0) {
        return;
    }
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) {
        hw = 1;
    }
    unsigned workers = std::min<unsigned>(max_threads == 0 ? hw : max_threads,
                                          static_cast<unsigned>(count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = cursor.fetch_add(1); i < count;
                 i = cursor.fetch_add(1)) {
                fn(i);
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
}

enum class LogLevel : int { Error = 0, Info = 1, Debug = 2 };

/// Verbosity from QSCENE_LOG in {error, info, debug}; defaults to error.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char *env = std::getenv("QSCENE_LOG");
        if (env == nullptr) {
            return LogLevel::Error;
        }
        const std::string v(env);
        if (v == "debug") {
            return LogLevel::Debug;
        }
        if (v == "info") {
            return LogLevel::Info;
        }
        return LogLevel::Error;
    }();
    return level;
}

inline void log_info(const std::string &msg) {
    if (log_level() >= LogLevel::Info) {
        std::fprintf(stderr, "[qscene] %s\n", msg.c_str());
    }
}

inline void log_debug(const std::string &msg) {
    if (log_level() >= LogLevel::Debug) {
        std::fprintf(stderr, "[qscene:debug] %s\n", msg.c_str());
    }
}

/// Shortest decimal form that round-trips an IEEE double exactly.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace qscene
