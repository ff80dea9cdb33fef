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

#include "rolt/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace rolt
{
namespace
{

MatrixXd feature_view(const MatrixXd& embeddings, const TrainConfig& config)
{
    return config.normalize_features ? l2_normalize_rows(embeddings) : embeddings;
}

DetectionOptions detection_options(const TrainConfig& config)
{
    DetectionOptions options;
    options.refinement_rounds = config.refinement_rounds;
    options.min_class_size = config.min_class_size;
    return options;
}

/// Per-example DRW weight: class weight of the target's argmax.
std::vector<double> example_weights(const MatrixXd& targets, std::span<const double> class_weights)
{
    std::vector<double> weights(static_cast<std::size_t>(targets.rows()));
    for (Index i = 0; i < targets.rows(); ++i)
    {
        weights[static_cast<std::size_t>(i)]
            = class_weights[static_cast<std::size_t>(argmax_first(targets.row(i)))];
    }
    return weights;
}

/// One pass of shuffled mini-batch SGD over every row.
void sgd_epoch(
    TrainState& state,
    const MatrixXd& embeddings,
    const MatrixXd& targets,
    const std::vector<double>& weights,
    double learning_rate,
    const TrainConfig& config)
{
    const Index n = embeddings.rows();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    state.rng.shuffle(std::span<Index>(order));

    MatrixXd batch_x;
    MatrixXd batch_t;
    std::vector<double> batch_w;
    for (Index start = 0; start < n; start += config.batch_size)
    {
        const Index size = std::min(config.batch_size, n - start);
        batch_x.resize(size, embeddings.cols());
        batch_t.resize(size, targets.cols());
        batch_w.clear();
        for (Index b = 0; b < size; ++b)
        {
            const Index row = order[static_cast<std::size_t>(start + b)];
            batch_x.row(b) = embeddings.row(row);
            batch_t.row(b) = targets.row(row);
            if (!weights.empty())
            {
                batch_w.push_back(weights[static_cast<std::size_t>(row)]);
            }
        }
        const auto grad = loss_gradient(state.model, batch_x, batch_t, std::span<const double>(batch_w));
        state.model = sgd_step(state.model, grad, learning_rate, config.weight_decay);
    }
}

void fill_losses(EpochRecord& record, const TrainState& state, const MatrixXd& embeddings)
{
    const VectorXd losses = per_example_loss(state.model, embeddings, state.targets.targets);
    double clean_sum = 0.0;
    double noisy_sum = 0.0;
    for (Index i = 0; i < losses.size(); ++i)
    {
        (state.targets.clean[static_cast<std::size_t>(i)] ? clean_sum : noisy_sum) += losses(i);
    }
    record.clean_count = state.split.clean_count();
    record.noisy_count = state.split.noisy_count();
    const auto total = record.clean_count + record.noisy_count;
    record.loss = total > 0 ? (clean_sum + noisy_sum) / static_cast<double>(total) : 0.0;
    record.loss_clean = record.clean_count > 0 ? clean_sum / static_cast<double>(record.clean_count) : 0.0;
    record.loss_noisy = record.noisy_count > 0 ? noisy_sum / static_cast<double>(record.noisy_count) : 0.0;
}

void fill_test_metrics(
    EpochRecord& record,
    const TrainState& state,
    const TrainConfig& config,
    const LabeledDataset* test)
{
    if (test == nullptr)
    {
        return;
    }
    const auto& truth = test->true_labels ? *test->true_labels : test->noisy_labels;
    const auto erm = predict_erm(state.model, test->embeddings);
    const auto ncm = predict_ncm(state.prototypes, feature_view(test->embeddings, config));
    record.erm_test = balanced_accuracy(erm.labels, truth, test->class_count);
    record.ncm_test = balanced_accuracy(ncm.labels, truth, test->class_count);
}

Index count_degenerate(const PrototypeSet<double>& protos)
{
    return static_cast<Index>(std::count(protos.degenerate.begin(), protos.degenerate.end(), true));
}

void check_inputs(const LabeledDataset& train, const TrainConfig& config, const LabeledDataset* test)
{
    config.validate();
    train.validate();
    require(train.size() > 0, "training set is empty");
    if (test != nullptr)
    {
        test->validate();
        require_shape(
            test->dim() == train.dim() && test->class_count == train.class_count,
            "test split does not match the training split's shape");
    }
}

}  // namespace

std::vector<LrMilestone> default_lr_schedule(int total_epochs)
{
    return {
        {static_cast<int>(std::lround(0.8 * total_epochs)), 0.01},
        {static_cast<int>(std::lround(0.9 * total_epochs)), 1e-4},
    };
}

double TrainConfig::learning_rate_at(int epoch) const
{
    const auto schedule = lr_schedule.empty() ? default_lr_schedule(total_epochs()) : lr_schedule;
    double multiplier = 1.0;
    for (const auto& step : schedule)
    {
        if (epoch >= step.epoch)
        {
            multiplier = step.multiplier;
        }
    }
    return learning_rate * multiplier;
}

bool TrainConfig::drw_active_at(int epoch) const
{
    return drw_enabled
           && epoch >= static_cast<int>(std::lround(drw_start_fraction * total_epochs()));
}

void TrainConfig::validate() const
{
    require(warmup_epochs >= 0, "warmup_epochs must be >= 0");
    require(robust_epochs >= 0, "robust_epochs must be >= 0");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(learning_rate > 0.0, "learning_rate must be > 0");
    require(weight_decay >= 0.0, "weight_decay must be >= 0");
    require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
    priors.validate();
    require(
        drw_start_fraction > 0.0 && drw_start_fraction <= 1.0,
        "drw_start_fraction must lie in (0, 1]");
    require(drw_beta >= 0.0 && drw_beta < 1.0, "drw_beta must lie in [0, 1)");
    require(refinement_rounds >= 0, "refinement_rounds must be >= 0");
    require(min_class_size >= 0, "min_class_size must be >= 0");
    int previous = -1;
    for (const auto& step : lr_schedule)
    {
        require(step.epoch > previous, "lr_schedule epochs must be strictly increasing");
        require(step.multiplier > 0.0, "lr_schedule multipliers must be > 0");
        previous = step.epoch;
    }
}

double TrainReport::last_erm_accuracy() const
{
    return epochs.empty() || !epochs.back().erm_test
               ? std::numeric_limits<double>::quiet_NaN()
               : epochs.back().erm_test->balanced_accuracy;
}

double TrainReport::best_erm_accuracy() const
{
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const auto& e : epochs)
    {
        if (e.erm_test && !(e.erm_test->balanced_accuracy <= best))
        {
            best = e.erm_test->balanced_accuracy;
        }
    }
    return best;
}

double TrainReport::last_ncm_accuracy() const
{
    return epochs.empty() || !epochs.back().ncm_test
               ? std::numeric_limits<double>::quiet_NaN()
               : epochs.back().ncm_test->balanced_accuracy;
}

double TrainReport::best_ncm_accuracy() const
{
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const auto& e : epochs)
    {
        if (e.ncm_test && !(e.ncm_test->balanced_accuracy <= best))
        {
            best = e.ncm_test->balanced_accuracy;
        }
    }
    return best;
}

VectorXd per_example_loss(
    const LinearModel<double>& model,
    const MatrixXd& embeddings,
    const MatrixXd& targets)
{
    return cross_entropy_rows(model.logits(embeddings), targets);
}

TrainState initial_state(const LabeledDataset& train, const TrainConfig& config)
{
    const Index n = train.size();
    const Index k_total = train.class_count;
    Rng rng(config.seed);
    auto model = make_linear_model<double>(k_total, train.dim(), rng);
    MatrixXd features = feature_view(train.embeddings, config);
    const auto by_label = train.indices_by_label();
    auto protos = compute_prototypes(features, by_label);
    TrainingTargets targets{
        one_hot(train.noisy_labels, k_total),
        std::vector<bool>(static_cast<std::size_t>(n), true),
        {},
        0,
    };
    return TrainState{
        std::move(model),
        std::move(features),
        std::move(protos),
        MomentumLogits::empty(n, k_total, config.alpha),
        MomentumLogits::empty(n, k_total, config.alpha),
        all_clean_split(by_label),
        std::move(targets),
        {},
        {},
        rng,
        0,
    };
}

EpochRecord warmup_epoch(
    TrainState& state,
    const LabeledDataset& train,
    const TrainConfig& config,
    const LabeledDataset* test)
{
    const int epoch = state.epoch;
    EpochRecord record;
    record.epoch = epoch + 1;
    record.stage = "warmup";
    record.learning_rate = config.learning_rate_at(epoch);
    record.drw_active = config.drw_active_at(epoch);

    const auto by_label = train.indices_by_label();
    state.split = all_clean_split(by_label);
    state.targets.targets = one_hot(train.noisy_labels, train.class_count);
    state.targets.clean.assign(static_cast<std::size_t>(train.size()), true);
    state.targets.guesses.clear();
    state.targets.degenerate_soft_labels = 0;

    std::vector<double> weights;
    if (record.drw_active)
    {
        weights = example_weights(
            state.targets.targets, drw_class_weights(train.label_counts(), config.drw_beta));
    }
    sgd_epoch(state, train.embeddings, state.targets.targets, weights, record.learning_rate, config);
    state.prototypes = compute_prototypes(state.features, by_label, &state.prototypes);
    ++state.epoch;

    fill_losses(record, state, train.embeddings);
    record.degenerate_prototypes = count_degenerate(state.prototypes);
    fill_test_metrics(record, state, config, test);
    return record;
}

void seed_momentum(TrainState& state, const LabeledDataset& train)
{
    state.erm_logits = update_momentum(state.erm_logits, state.model.logits(train.embeddings));
    state.ncm_logits = update_momentum(state.ncm_logits, predict_ncm(state.prototypes, state.features).scores);
}

TrainState warmup(
    const LabeledDataset& train,
    const TrainConfig& config,
    const LabeledDataset* test,
    const EpochObserver& observer)
{
    check_inputs(train, config, test);
    TrainState state = initial_state(train, config);
    for (int e = 0; e < config.warmup_epochs; ++e)
    {
        const auto record = warmup_epoch(state, train, config, test);
        if (observer)
        {
            observer(record, state);
        }
    }
    seed_momentum(state, train);
    return state;
}

EpochRecord robust_epoch(
    TrainState& state,
    const LabeledDataset& train,
    const TrainConfig& config,
    const LabeledDataset* test)
{
    const int epoch = state.epoch;
    EpochRecord record;
    record.epoch = epoch + 1;
    record.stage = "robust";
    record.learning_rate = config.learning_rate_at(epoch);
    record.drw_active = config.drw_active_at(epoch);

    // Prototypes from the assigned label sets, then detection with refinement.
    const auto initial = compute_prototypes(state.features, train.indices_by_label(), &state.prototypes);
    auto detection = detect(state.features, train.noisy_labels, initial, detection_options(config));
    state.split = std::move(detection.split);
    state.prototypes = std::move(detection.prototypes);
    state.fits = std::move(detection.fits);
    state.distances = std::move(detection.distances);

    state.erm_logits = update_momentum(state.erm_logits, state.model.logits(train.embeddings));
    state.ncm_logits = update_momentum(state.ncm_logits, predict_ncm(state.prototypes, state.features).scores);
    state.targets = relabel_noisy(
        state.split, state.erm_logits, state.ncm_logits, config.priors, train.noisy_labels, train.class_count);

    std::vector<double> weights;
    if (record.drw_active)
    {
        weights = example_weights(
            state.targets.targets, drw_class_weights(train.label_counts(), config.drw_beta));
    }
    sgd_epoch(state, train.embeddings, state.targets.targets, weights, record.learning_rate, config);
    ++state.epoch;

    fill_losses(record, state, train.embeddings);
    if (train.has_ground_truth())
    {
        const auto score = detection_scores(state.split, train);
        record.detection_precision = score.precision;
        record.detection_recall = score.recall;
    }
    record.degenerate_prototypes = count_degenerate(state.prototypes);
    record.degenerate_soft_labels = state.targets.degenerate_soft_labels;
    fill_test_metrics(record, state, config, test);
    return record;
}

TrainResult train(
    const LabeledDataset& train,
    const TrainConfig& config,
    const LabeledDataset* test,
    const EpochObserver& observer)
{
    TrainReport report;
    report.dataset_fingerprint = dataset_fingerprint(train);
    auto collect = [&](const EpochRecord& record, const TrainState& state)
    {
        report.epochs.push_back(record);
        if (observer)
        {
            observer(record, state);
        }
    };
    TrainState state = warmup(train, config, test, collect);
    for (int e = 0; e < config.robust_epochs; ++e)
    {
        const auto record = robust_epoch(state, train, config, test);
        collect(record, state);
    }
    return {std::move(state), std::move(report)};
}

}  // namespace rolt
