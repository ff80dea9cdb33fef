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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rolt/common.hpp"
#include "rolt/datasim.hpp"
#include "rolt/gmm.hpp"

namespace rolt
{

using CountMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RecallSummary
{
    double balanced_accuracy = 0.0;  // mean per-class recall over present classes
    double accuracy = 0.0;           // micro accuracy
    VectorXd per_class_recall;       // NaN for classes absent from the truth
    double recall_std = 0.0;         // population std over present classes
    std::vector<Label> absent_classes;
};

RecallSummary balanced_accuracy(
    std::span<const Label> predictions,
    std::span<const Label> truth,
    Index class_count);

/// Rows are true classes, columns predicted classes.
CountMatrix confusion_matrix(
    std::span<const Label> predictions,
    std::span<const Label> truth,
    Index class_count);

struct ShotThresholds
{
    Index many_above = 100;  // count > many_above      -> many
    Index few_below = 20;    // count < few_below       -> few; otherwise medium
};

struct ShotSplit
{
    std::vector<Label> many;
    std::vector<Label> medium;
    std::vector<Label> few;
    std::optional<ShotThresholds> thresholds;  // absent in explicit mode

    [[nodiscard]] Index class_count() const;
    [[nodiscard]] std::string bucket_of(Label k) const;
};

ShotSplit shot_split(std::span<const Index> train_counts, const ShotThresholds& thresholds = {});

/// Explicit index-list mode; the lists must partition [0, K).
ShotSplit shot_split(
    Index class_count,
    std::vector<Label> many,
    std::vector<Label> medium,
    std::vector<Label> few);

struct DetectionScore
{
    double precision = 0.0;  // |{i in X : y_i = y*_i}| / |X|
    double recall = 0.0;     // |{i in X : y_i = y*_i}| / |{i : y_i = y*_i}|
    bool precision_defined = true;  // false when X is empty (precision reported as 0)
    bool recall_defined = true;     // false when no example is truly clean
    Index selected = 0;
    Index selected_correct = 0;
    Index correct_total = 0;
    /// Same quantities for the noisy set S against truly mislabeled examples.
    double noisy_precision = 0.0;
    double noisy_recall = 0.0;
};

/// Scores the clean flags against y == y*. When `classes` is given only
/// examples whose assigned label is in it are counted.
DetectionScore detection_scores(
    const std::vector<bool>& clean_flags,
    std::span<const Label> noisy_labels,
    std::span<const Label> true_labels,
    std::optional<std::span<const Label>> classes = std::nullopt);

DetectionScore detection_scores(const CleanNoisySplit& split, const LabeledDataset& dataset);

struct DetectionBreakdown
{
    DetectionScore overall;
    DetectionScore many;
    DetectionScore medium;
    DetectionScore few;
};

DetectionBreakdown detection_breakdown(
    const CleanNoisySplit& split,
    const LabeledDataset& dataset,
    const ShotSplit& shots);

enum class SmallLossMode
{
    global,
    per_class
};

/// Loss-GMM detector: fit the two-component mixture to per-example losses
/// (all classes pooled, or per class) and keep the low-mean component.
CleanNoisySplit small_loss_baseline(
    std::span<const double> losses,
    std::span<const Label> labels,
    Index class_count,
    SmallLossMode mode = SmallLossMode::global,
    const DetectionOptions& options = {});

/// FNV-1a over shape, embedding bytes and labels.
std::uint64_t dataset_fingerprint(const LabeledDataset& dataset);

}  // namespace rolt
