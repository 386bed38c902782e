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
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <qscene/train.hpp>

using namespace qscene;

TEST_CASE("adam_step with zero gradient leaves parameters unchanged",
          "[train]") {
    AdamState state = make_adam(3);
    std::vector<double> params{0.5, -0.2, 1.0};
    const std::vector<double> before = params;
    adam_step(state, params, {0.0, 0.0, 0.0});
    CHECK(params == before);
    CHECK(state.step == 1);
}

TEST_CASE("adam first step moves by about lr", "[train]") {
    for (double g : {0.3, -2.0, 11.0}) {
        AdamState state = make_adam(1, AdamConfig{0.01, 0.9, 0.999, 1e-8});
        std::vector<double> params{1.0};
        adam_step(state, params, {g});
        // bias-corrected m/sqrt(v) = sign(g) up to eps effects
        CHECK(params[0] ==
              Catch::Approx(1.0 - 0.01 * (g > 0 ? 1.0 : -1.0)).margin(1e-5));
    }
}

TEST_CASE("adam three-step trace matches a hand-computed sequence",
          "[train]") {
    const double lr = 0.1;
    const double b1 = 0.9;
    const double b2 = 0.999;
    const double eps = 1e-8;
    const double grads[3] = {0.4, -0.3, 0.25};

    // scalar reference trace, written out step by step
    double p_ref = 2.0;
    double m = 0.0;
    double v = 0.0;
    for (int t = 1; t <= 3; ++t) {
        const double g = grads[t - 1];
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double m_hat = m / (1 - std::pow(b1, t));
        const double v_hat = v / (1 - std::pow(b2, t));
        p_ref -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }

    AdamState state = make_adam(1, AdamConfig{lr, b1, b2, eps});
    std::vector<double> params{2.0};
    for (double g : grads) {
        adam_step(state, params, {g});
    }
    CHECK(params[0] == Catch::Approx(p_ref).margin(1e-12));
}

TEST_CASE("adam validates shapes and finiteness", "[train]") {
    AdamState state = make_adam(2);
    std::vector<double> params{0.0, 0.0};
    CHECK_THROWS_AS(adam_step(state, params, {1.0}), ContractError);
    try {
        adam_step(state, params, {0.0, std::nan("")});
        FAIL("expected NumericalError");
    } catch (const NumericalError &e) {
        CHECK(std::string(e.what()).find("parameter 1") != std::string::npos);
    }
}

TEST_CASE("fit learns a separable synthetic set with a PAE model",
          "[train][slow]") {
    const Dataset train =
        make_synthetic(SyntheticKind::BrightVsDark, 20, 8, 8, 0.1, 7);
    const Dataset test =
        make_synthetic(SyntheticKind::BrightVsDark, 10, 8, 8, 0.1, 8);
    ModelSpec model = assemble_pae_model(
        8, 8, 6, HeaConfig{4, Connectivity::Ring, GateKind::CX, false}, 2);
    TrainConfig config;
    config.epochs = 12;
    config.lr = 0.05;
    config.seed = 5;
    const FitResult result = fit(model, train, config);
    const Metrics metrics = evaluate(model, result.params, test);
    CHECK(metrics.accuracy >= 0.9);

    // best reported validation loss equals the running minimum
    double best = std::numeric_limits<double>::infinity();
    for (const EpochRecord &row : result.metrics.history) {
        best = std::min(best, row.val_loss);
    }
    CHECK(result.best_val_loss == Catch::Approx(best).margin(0.0));
}

TEST_CASE("fit memorizes a single sample", "[train]") {
    Dataset one;
    one.class_names = {"a", "b"};
    ImageTensor img;
    img.height = 2;
    img.width = 2;
    img.pixels = {0.1, 0.9, 0.4, 0.6};
    img.label = 1;
    img.source_id = "solo";
    one.samples.push_back(img);

    ModelSpec model = assemble_pae_model(
        2, 2, 2, HeaConfig{2, Connectivity::Line}, 2);
    TrainConfig config;
    config.epochs = 120;
    config.lr = 0.2;
    config.seed = 3;
    const FitResult result = fit(model, one, config);
    CHECK(result.metrics.history.back().train_loss < 0.01);
}

TEST_CASE("fit is deterministic for a fixed seed", "[train]") {
    const Dataset train =
        make_synthetic(SyntheticKind::BrightVsDark, 8, 4, 4, 0.1, 2);
    ModelSpec model = assemble_pae_model(
        4, 4, 3, HeaConfig{2, Connectivity::Line}, 2);
    TrainConfig config;
    config.epochs = 5;
    config.seed = 77;
    config.threads = 2;
    const FitResult a = fit(model, train, config);
    const FitResult b = fit(model, train, config);
    REQUIRE(a.metrics.history.size() == b.metrics.history.size());
    for (std::size_t i = 0; i < a.metrics.history.size(); ++i) {
        CHECK(a.metrics.history[i].train_loss ==
              b.metrics.history[i].train_loss);
        CHECK(a.metrics.history[i].val_loss == b.metrics.history[i].val_loss);
    }
    CHECK(a.params.quantum == b.params.quantum);
    CHECK(a.params.bias == b.params.bias);
}

TEST_CASE("loader stage fills the store; classifier training never touches "
          "it",
          "[train][slow]") {
    Dataset data = make_synthetic(SyntheticKind::BrightVsDark, 6, 4, 4, 0.1, 4);
    ModelSpec model = assemble_amplitude_model(
        Scheme::BAE, 4, 4, 2, 2, 2, HeaConfig{2, Connectivity::Line}, 2);

    TrainConfig loader_config;
    loader_config.stage = TrainStage::Loader;
    loader_config.loader_steps = 40;
    loader_config.seed = 9;
    fit(model, data, loader_config);
    REQUIRE(model.loaders.entries.size() == data.size());
    for (const auto &[id, blocks] : model.loaders.entries) {
        CHECK(blocks.size() == 4);
    }
    const auto snapshot = model.loaders.entries;

    TrainConfig cls_config;
    cls_config.epochs = 4;
    cls_config.seed = 9;
    fit(model, data, cls_config);

    // bit-identical loader parameters before and after classifier training
    REQUIRE(model.loaders.entries.size() == snapshot.size());
    for (const auto &[id, blocks] : snapshot) {
        const auto &after = model.loaders.entries.at(id);
        REQUIRE(after.size() == blocks.size());
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            CHECK(after[b] == blocks[b]);
        }
    }

    CHECK_THROWS_AS(fit_loaders(model, Dataset{}, loader_config),
                    ContractError);
    ModelSpec pae = assemble_pae_model(4, 4, 2,
                                       HeaConfig{3, Connectivity::Line}, 2);
    CHECK_THROWS_AS(fit_loaders(pae, data, loader_config), ContractError);
}

TEST_CASE("evaluate computes exact metrics and validates inputs", "[train]") {
    const Dataset data =
        make_synthetic(SyntheticKind::BrightVsDark, 10, 4, 4, 0.1, 6);
    ModelSpec model = assemble_pae_model(
        4, 4, 3, HeaConfig{2, Connectivity::Line}, 2);

    // rig the readout so every image lands in class 0
    TrainableParams rigged = init_trainable(model, 0);
    for (auto &row : rigged.weights) {
        std::fill(row.begin(), row.end(), 0.0);
    }
    rigged.bias = {5.0, 0.0};
    Dataset zeros = data;
    for (auto &s : zeros.samples) {
        s.label = 0;
    }
    const Metrics all_correct = evaluate(model, rigged, zeros);
    CHECK(all_correct.accuracy == 1.0);
    CHECK(all_correct.per_class_accuracy[0] == 1.0);

    // accuracy decomposes exactly into class-weighted per-class accuracy
    TrainableParams params = init_trainable(model, 33);
    const Metrics metrics = evaluate(model, params, data);
    double weighted = 0.0;
    long total = 0;
    for (std::size_t c = 0; c < metrics.per_class_accuracy.size(); ++c) {
        weighted += metrics.per_class_accuracy[c] *
                    static_cast<double>(metrics.class_counts[c]);
        total += metrics.class_counts[c];
    }
    CHECK(metrics.accuracy == weighted / static_cast<double>(total));

    // confusion arithmetic, e.g. (50 + 43)/100 = 0.93 style accounting
    long diag = 0;
    for (std::size_t c = 0; c < metrics.confusion.size(); ++c) {
        diag += metrics.confusion[c][c];
    }
    CHECK(metrics.accuracy ==
          static_cast<double>(diag) / static_cast<double>(data.size()));

    CHECK_THROWS_AS(evaluate(model, params, Dataset{}), ContractError);
    Dataset bad = data;
    bad.samples[0].label = 7; // outside the model's class set
    CHECK_THROWS_AS(evaluate(model, params, bad), ContractError);
}

TEST_CASE("history CSV has the documented schema", "[train]") {
    const std::vector<EpochRecord> history{{0, 0.5, 0.6, 0.7},
                                           {1, 0.4, 0.5, 0.8}};
    const std::string path = "/tmp/qscene_history_test.csv";
    write_history_csv(path, history);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,train_loss,val_loss,val_acc");
    std::getline(in, line);
    CHECK(line == "0,0.5,0.59999999999999998,0.69999999999999996");
}
