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
 * Adam with bias correction.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"

namespace qscene {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    long step = 0;
    std::vector<double> m;
    std::vector<double> v;
    AdamConfig config;
};

inline AdamState make_adam(std::size_t n_params, AdamConfig config = {}) {
    AdamState state;
    state.m.assign(n_params, 0.0);
    state.v.assign(n_params, 0.0);
    state.config = config;
    return state;
}

/// One Adam update in place; throws NumericalError on a non-finite gradient.
inline void adam_step(AdamState &state, std::vector<double> &params,
                      const std::vector<double> &grads) {
    QSCENE_REQUIRE(params.size() == state.m.size() &&
                       grads.size() == state.m.size(),
                   "Adam shape mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw NumericalError("non-finite gradient at parameter " +
                                 std::to_string(i));
        }
    }
    ++state.step;
    const AdamConfig &c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
}

} // namespace qscene
