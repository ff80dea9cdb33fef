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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rolt/common.hpp"
#include "rolt/datasim.hpp"
#include "rolt/eval.hpp"
#include "rolt/gmm.hpp"
#include "rolt/model.hpp"
#include "rolt/prototypes.hpp"
#include "rolt/pseudolabel.hpp"
#include "rolt/random.hpp"

namespace rolt
{

/// From `epoch` (0-based) on, the learning rate is base * multiplier.
struct LrMilestone
{
    int epoch = 0;
    double multiplier = 1.0;

    bool operator==(const LrMilestone&) const = default;
};

struct TrainConfig
{
    int warmup_epochs = 20;
    int robust_epochs = 30;
    Index batch_size = 128;
    double learning_rate = 0.1;
    /// Empty means the default step schedule (see default_lr_schedule).
    std::vector<LrMilestone> lr_schedule;
    double weight_decay = 2e-4;
    double alpha = 0.9;
    GuessPriors priors;
    bool drw_enabled = false;
    double drw_start_fraction = 0.8;
    double drw_beta = 0.9999;
    int refinement_rounds = 1;
    Index min_class_size = 5;
    /// L2-normalize embeddings before prototypes, distances and NCM.
    bool normalize_features = true;
    std::uint64_t seed = 0;

    [[nodiscard]] int total_epochs() const { return warmup_epochs + robust_epochs; }
    [[nodiscard]] double learning_rate_at(int epoch) const;
    [[nodiscard]] bool drw_active_at(int epoch) const;
    void validate() const;
};

/// Multiplier 0.01 from 80% and 1e-4 from 90% of the epoch budget.
std::vector<LrMilestone> default_lr_schedule(int total_epochs);

struct TrainState
{
    LinearModel<double> model;
    MatrixXd features;  // training embeddings as seen by the prototype space
    PrototypeSet<double> prototypes;
    MomentumLogits erm_logits;
    MomentumLogits ncm_logits;
    CleanNoisySplit split;
    TrainingTargets targets;
    std::vector<GmmFit> fits;
    /// Final-round class distances of the last detection.
    std::vector<ClassDistances<double>> distances;
    Rng rng;
    int epoch = 0;  // number of completed epochs
};

struct EpochRecord
{
    int epoch = 0;  // 1-based
    std::string stage;
    double learning_rate = 0.0;
    bool drw_active = false;
    double loss = 0.0;        // (sum clean CE + sum noisy CE) / (|X| + |S|)
    double loss_clean = 0.0;  // L_X
    double loss_noisy = 0.0;  // L_S
    Index clean_count = 0;
    Index noisy_count = 0;
    std::optional<double> detection_precision;
    std::optional<double> detection_recall;
    std::optional<RecallSummary> erm_test;
    std::optional<RecallSummary> ncm_test;
    Index degenerate_prototypes = 0;
    Index degenerate_soft_labels = 0;
};

struct TrainReport
{
    std::vector<EpochRecord> epochs;
    std::uint64_t dataset_fingerprint = 0;

    /// Best and last ERM/NCM balanced test accuracy (NaN without a test set).
    [[nodiscard]] double last_erm_accuracy() const;
    [[nodiscard]] double best_erm_accuracy() const;
    [[nodiscard]] double last_ncm_accuracy() const;
    [[nodiscard]] double best_ncm_accuracy() const;
};

using EpochObserver = std::function<void(const EpochRecord&, const TrainState&)>;

/// Fresh model, prototypes from the assigned labels, empty momentum stores.
TrainState initial_state(const LabeledDataset& train, const TrainConfig& config);

/// Plain cross-entropy epoch on the assigned labels (one-hot targets).
EpochRecord warmup_epoch(
    TrainState& state,
    const LabeledDataset& train,
    const TrainConfig& config,
    const LabeledDataset* test = nullptr);

/// Seeds both momentum stores from the current ERM and NCM logits.
void seed_momentum(TrainState& state, const LabeledDataset& train);

/// `warmup_epochs` warm-up epochs followed by momentum seeding.
TrainState warmup(
    const LabeledDataset& train,
    const TrainConfig& config,
    const LabeledDataset* test = nullptr,
    const EpochObserver& observer = {});

/// Detection, momentum update, relabeling and one SGD epoch on X u S.
EpochRecord robust_epoch(
    TrainState& state,
    const LabeledDataset& train,
    const TrainConfig& config,
    const LabeledDataset* test = nullptr);

struct TrainResult
{
    TrainState state;
    TrainReport report;
};

TrainResult train(
    const LabeledDataset& train,
    const TrainConfig& config,
    const LabeledDataset* test = nullptr,
    const EpochObserver& observer = {});

/// Cross-entropy of every training example against `targets` under `model`.
VectorXd per_example_loss(
    const LinearModel<double>& model,
    const MatrixXd& embeddings,
    const MatrixXd& targets);

}  // namespace rolt
