/*
 * Copyright 2026 The rolt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cmath>
#include <vector>

#include "rolt/trainer.hpp"
#include "test_support.hpp"

using namespace rolt;
using rolt::testing::standard_benchmark;

namespace
{

TrainConfig short_config(int warmup, int robust)
{
    TrainConfig config;
    config.warmup_epochs = warmup;
    config.robust_epochs = robust;
    return config;
}

}  // namespace

TEST_CASE("TrainConfig: schedules and validation")
{
    const TrainConfig config;
    CHECK(config.total_epochs() == 50);
    CHECK(config.learning_rate_at(0) == 0.1);
    CHECK(config.learning_rate_at(39) == 0.1);
    CHECK(config.learning_rate_at(40) == doctest::Approx(1e-3));
    CHECK(config.learning_rate_at(45) == doctest::Approx(1e-5));
    CHECK(default_lr_schedule(200) == std::vector<LrMilestone>{{160, 0.01}, {180, 1e-4}});

    TrainConfig drw = config;
    CHECK_FALSE(drw.drw_active_at(49));
    drw.drw_enabled = true;
    CHECK_FALSE(drw.drw_active_at(39));
    CHECK(drw.drw_active_at(40));

    TrainConfig custom = config;
    custom.lr_schedule = {{5, 0.5}};
    CHECK(custom.learning_rate_at(4) == 0.1);
    CHECK(custom.learning_rate_at(45) == 0.05);

    CHECK_NOTHROW(config.validate());
    auto bad = config;
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = config;
    bad.drw_start_fraction = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = config;
    bad.alpha = 1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = config;
    bad.lr_schedule = {{5, 0.5}, {5, 0.1}};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = config;
    bad.priors = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("warmup: zero epochs leaves the initial model")
{
    const auto data = standard_benchmark(10.0, 0.2, 0);
    const auto config = short_config(0, 0);
    const auto fresh = initial_state(data.train, config);
    const auto state = warmup(data.train, config);
    CHECK(state.model.weights == fresh.model.weights);
    CHECK(state.model.bias == fresh.model.bias);
    CHECK(state.epoch == 0);
    CHECK(state.erm_logits.values == fresh.model.logits(data.train.embeddings));
}

TEST_CASE("warmup: separable two-class data is fit")
{
    const auto blobs = synth_blobs({2, 300, 1.0}, {8, 6.0, 1.0, 10, 4});
    const auto state = warmup(blobs.train, short_config(10, 0));
    const auto pred = predict_erm(state.model, blobs.train.embeddings).labels;
    Index correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
    {
        correct += pred[i] == blobs.train.noisy_labels[i] ? 1 : 0;
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(pred.size()) > 0.99);
}

TEST_CASE("train: deterministic for a fixed seed")
{
    const auto data = standard_benchmark(100.0, 0.3, 2);
    auto config = short_config(4, 4);
    config.drw_enabled = true;
    const auto a = train(data.train, config, &data.test);
    const auto b = train(data.train, config, &data.test);
    CHECK(a.state.model.weights == b.state.model.weights);
    CHECK(a.state.model.bias == b.state.model.bias);
    REQUIRE(a.report.epochs.size() == b.report.epochs.size());
    for (std::size_t e = 0; e < a.report.epochs.size(); ++e)
    {
        CHECK(a.report.epochs[e].loss == b.report.epochs[e].loss);
        CHECK(a.report.epochs[e].clean_count == b.report.epochs[e].clean_count);
        CHECK(a.report.epochs[e].erm_test->balanced_accuracy == b.report.epochs[e].erm_test->balanced_accuracy);
    }
    config.seed = 1;
    const auto c = train(data.train, config, &data.test);
    CHECK(c.state.model.weights != a.state.model.weights);
}

TEST_CASE("train: no robust epochs equals warm-up alone")
{
    const auto data = standard_benchmark(10.0, 0.2, 1);
    const auto config = short_config(3, 0);
    const auto trained = train(data.train, config);
    const auto warmed = warmup(data.train, config);
    CHECK(trained.state.model.weights == warmed.model.weights);
    CHECK(trained.report.epochs.size() == 3);
    for (const auto& record : trained.report.epochs)
    {
        CHECK(record.stage == "warmup");
        CHECK(record.noisy_count == 0);
        CHECK_FALSE(record.detection_precision.has_value());
    }
}

TEST_CASE("robust_epoch: an empty noisy set reduces to clean cross-entropy")
{
    const auto data = standard_benchmark(10.0, 0.2, 3);
    auto config = short_config(2, 1);
    // Every class is below the minimum size, so detection keeps all examples.
    config.min_class_size = 1000000;
    auto robust = warmup(data.train, config);
    auto plain = robust;
    const auto record = robust_epoch(robust, data.train, config);
    warmup_epoch(plain, data.train, config);
    CHECK(record.noisy_count == 0);
    CHECK(robust.model.weights == plain.model.weights);
    CHECK(robust.model.bias == plain.model.bias);
    CHECK(robust.targets.targets == one_hot(std::span<const Label>(data.train.noisy_labels), 10));
}

TEST_CASE("train: reported losses and counts match the emitted targets")
{
    const auto data = standard_benchmark(100.0, 0.3, 0);
    auto config = short_config(3, 4);
    int checked = 0;
    const auto observer = [&](const EpochRecord& record, const TrainState& state) {
        const auto losses = per_example_loss(state.model, data.train.embeddings, state.targets.targets);
        double clean = 0.0;
        double noisy = 0.0;
        Index clean_n = 0;
        for (Index i = 0; i < losses.size(); ++i)
        {
            if (state.targets.clean[static_cast<std::size_t>(i)])
            {
                clean += losses(i);
                ++clean_n;
            }
            else
            {
                noisy += losses(i);
            }
        }
        const auto n = static_cast<double>(losses.size());
        CHECK(record.loss == doctest::Approx((clean + noisy) / n).epsilon(1e-12));
        CHECK(record.clean_count == clean_n);
        CHECK(record.clean_count == state.split.clean_count());
        CHECK(record.noisy_count == state.split.noisy_count());
        CHECK(record.epoch == state.epoch);
        if (record.stage == "robust")
        {
            const auto flags = state.split.clean_flags(data.train.size());
            CHECK(flags == state.targets.clean);
            const auto score = detection_scores(flags, data.train.noisy_labels, *data.train.true_labels);
            CHECK(record.detection_precision == score.precision);
            CHECK(record.detection_recall == score.recall);
            for (Index i = 0; i < data.train.size(); ++i)
            {
                CHECK(std::abs(state.targets.targets.row(i).sum() - 1.0) <= 1e-9);
            }
        }
        ++checked;
    };
    const auto result = train(data.train, config, &data.test, observer);
    CHECK(checked == 7);
    CHECK(result.report.epochs.size() == 7);
    for (std::size_t e = 0; e < result.report.epochs.size(); ++e)
    {
        CHECK(result.report.epochs[e].epoch == static_cast<int>(e) + 1);
    }
    CHECK(result.report.dataset_fingerprint == dataset_fingerprint(data.train));
    CHECK(result.state.model.all_finite());
    CHECK(result.report.last_erm_accuracy() == result.report.epochs.back().erm_test->balanced_accuracy);
    CHECK(result.report.best_erm_accuracy() >= result.report.last_erm_accuracy());
}

TEST_CASE("train: input validation")
{
    const auto data = standard_benchmark(10.0, 0.2, 0);
    auto config = short_config(1, 1);
    config.learning_rate = -1.0;
    CHECK_THROWS_AS(train(data.train, config), InvalidArgument);

    auto mismatched = data.test;
    mismatched.embeddings = MatrixXd::Zero(mismatched.size(), 5);
    CHECK_THROWS_AS(train(data.train, short_config(1, 0), &mismatched), DimensionMismatch);
}
