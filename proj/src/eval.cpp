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

#include "rolt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace rolt
{
namespace
{

void check_labels(std::span<const Label> labels, Index class_count, const char* what)
{
    for (Label y : labels)
    {
        require(y >= 0 && y < class_count, std::string(what) + " label out of range");
    }
}

double ratio(Index num, Index den)
{
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

class Fnv1a
{
  public:
    void add(const void* data, std::size_t size)
    {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i)
        {
            hash_ ^= bytes[i];
            hash_ *= 0x100000001b3ULL;
        }
    }

    template <typename T>
    void add_value(T value)
    {
        add(&value, sizeof(T));
    }

    [[nodiscard]] std::uint64_t value() const { return hash_; }

  private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

RecallSummary balanced_accuracy(
    std::span<const Label> predictions,
    std::span<const Label> truth,
    Index class_count)
{
    require_shape(predictions.size() == truth.size(), "predictions and truth differ in length");
    require(!truth.empty(), "balanced_accuracy needs at least one example");
    const auto confusion = confusion_matrix(predictions, truth, class_count);

    RecallSummary out;
    out.per_class_recall = VectorXd::Constant(class_count, std::numeric_limits<double>::quiet_NaN());
    double recall_sum = 0.0;
    Index present = 0;
    for (Index k = 0; k < class_count; ++k)
    {
        const Index row_total = confusion.row(k).sum();
        if (row_total == 0)
        {
            out.absent_classes.push_back(static_cast<Label>(k));
            continue;
        }
        out.per_class_recall(k) = ratio(confusion(k, k), row_total);
        recall_sum += out.per_class_recall(k);
        ++present;
    }
    out.balanced_accuracy = recall_sum / static_cast<double>(present);
    out.accuracy = ratio(confusion.trace(), static_cast<Index>(truth.size()));

    double var = 0.0;
    for (Index k = 0; k < class_count; ++k)
    {
        if (!std::isnan(out.per_class_recall(k)))
        {
            const double d = out.per_class_recall(k) - out.balanced_accuracy;
            var += d * d;
        }
    }
    out.recall_std = std::sqrt(var / static_cast<double>(present));
    return out;
}

CountMatrix confusion_matrix(
    std::span<const Label> predictions,
    std::span<const Label> truth,
    Index class_count)
{
    require_shape(predictions.size() == truth.size(), "predictions and truth differ in length");
    check_labels(predictions, class_count, "predicted");
    check_labels(truth, class_count, "true");
    CountMatrix counts = CountMatrix::Zero(class_count, class_count);
    for (std::size_t i = 0; i < truth.size(); ++i)
    {
        ++counts(truth[i], predictions[i]);
    }
    return counts;
}

Index ShotSplit::class_count() const
{
    return static_cast<Index>(many.size() + medium.size() + few.size());
}

std::string ShotSplit::bucket_of(Label k) const
{
    if (std::ranges::find(many, k) != many.end())
    {
        return "many";
    }
    if (std::ranges::find(medium, k) != medium.end())
    {
        return "medium";
    }
    if (std::ranges::find(few, k) != few.end())
    {
        return "few";
    }
    throw InvalidArgument("class " + std::to_string(k + 1) + " is in no shot bucket");
}

ShotSplit shot_split(std::span<const Index> train_counts, const ShotThresholds& thresholds)
{
    require(
        thresholds.few_below <= thresholds.many_above + 1,
        "few threshold must not exceed the many threshold");
    ShotSplit split;
    split.thresholds = thresholds;
    for (std::size_t k = 0; k < train_counts.size(); ++k)
    {
        const auto label = static_cast<Label>(k);
        if (train_counts[k] > thresholds.many_above)
        {
            split.many.push_back(label);
        }
        else if (train_counts[k] < thresholds.few_below)
        {
            split.few.push_back(label);
        }
        else
        {
            split.medium.push_back(label);
        }
    }
    return split;
}

ShotSplit shot_split(
    Index class_count,
    std::vector<Label> many,
    std::vector<Label> medium,
    std::vector<Label> few)
{
    std::vector<int> seen(static_cast<std::size_t>(class_count), 0);
    for (const auto* list : {&many, &medium, &few})
    {
        for (Label k : *list)
        {
            require(k >= 0 && k < class_count, "shot split class out of range");
            ++seen[static_cast<std::size_t>(k)];
        }
    }
    require(
        std::ranges::all_of(seen, [](int c) { return c == 1; }),
        "explicit shot split must list every class exactly once");
    return {std::move(many), std::move(medium), std::move(few), std::nullopt};
}

DetectionScore detection_scores(
    const std::vector<bool>& clean_flags,
    std::span<const Label> noisy_labels,
    std::span<const Label> true_labels,
    std::optional<std::span<const Label>> classes)
{
    require_shape(
        clean_flags.size() == noisy_labels.size() && noisy_labels.size() == true_labels.size(),
        "clean flags, noisy labels and true labels must have equal length");
    auto counted = [&](Label y)
    { return !classes || std::ranges::find(*classes, y) != classes->end(); };

    DetectionScore s;
    Index noisy_selected = 0;
    Index noisy_selected_wrong = 0;
    Index wrong_total = 0;
    for (std::size_t i = 0; i < noisy_labels.size(); ++i)
    {
        if (!counted(noisy_labels[i]))
        {
            continue;
        }
        const bool correct = noisy_labels[i] == true_labels[i];
        s.correct_total += correct ? 1 : 0;
        wrong_total += correct ? 0 : 1;
        if (clean_flags[i])
        {
            ++s.selected;
            s.selected_correct += correct ? 1 : 0;
        }
        else
        {
            ++noisy_selected;
            noisy_selected_wrong += correct ? 0 : 1;
        }
    }
    s.precision_defined = s.selected > 0;
    s.recall_defined = s.correct_total > 0;
    s.precision = ratio(s.selected_correct, s.selected);
    s.recall = ratio(s.selected_correct, s.correct_total);
    s.noisy_precision = ratio(noisy_selected_wrong, noisy_selected);
    s.noisy_recall = ratio(noisy_selected_wrong, wrong_total);
    return s;
}

DetectionScore detection_scores(const CleanNoisySplit& split, const LabeledDataset& dataset)
{
    require(dataset.has_ground_truth(), "detection scores need ground-truth labels");
    return detection_scores(
        split.clean_flags(dataset.size()), dataset.noisy_labels, *dataset.true_labels);
}

DetectionBreakdown detection_breakdown(
    const CleanNoisySplit& split,
    const LabeledDataset& dataset,
    const ShotSplit& shots)
{
    require(dataset.has_ground_truth(), "detection scores need ground-truth labels");
    const auto flags = split.clean_flags(dataset.size());
    auto score = [&](const std::vector<Label>& classes)
    {
        return detection_scores(
            flags, dataset.noisy_labels, *dataset.true_labels, std::span<const Label>(classes));
    };
    return {
        detection_scores(flags, dataset.noisy_labels, *dataset.true_labels),
        score(shots.many),
        score(shots.medium),
        score(shots.few),
    };
}

CleanNoisySplit small_loss_baseline(
    std::span<const double> losses,
    std::span<const Label> labels,
    Index class_count,
    SmallLossMode mode,
    const DetectionOptions& options)
{
    require_shape(losses.size() == labels.size(), "one loss per label required");
    check_labels(labels, class_count, "assigned");

    IndexSets by_label(static_cast<std::size_t>(class_count));
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
        by_label[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
    }
    CleanNoisySplit split{IndexSets(by_label.size()), IndexSets(by_label.size())};

    if (mode == SmallLossMode::global)
    {
        const auto fit = fit_gmm2(losses, options.gmm);
        const auto flags = split_class(losses, fit);
        for (std::size_t i = 0; i < labels.size(); ++i)
        {
            auto& target = flags[i] ? split.clean : split.noisy;
            target[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
        }
        return split;
    }

    for (std::size_t k = 0; k < by_label.size(); ++k)
    {
        const auto& members = by_label[k];
        if (static_cast<Index>(members.size()) < options.min_class_size)
        {
            split.clean[k] = members;
            continue;
        }
        std::vector<double> values;
        values.reserve(members.size());
        for (Index i : members)
        {
            values.push_back(losses[static_cast<std::size_t>(i)]);
        }
        const auto flags = split_class(values, fit_gmm2(values, options.gmm));
        for (std::size_t j = 0; j < members.size(); ++j)
        {
            (flags[j] ? split.clean : split.noisy)[k].push_back(members[j]);
        }
    }
    return split;
}

std::uint64_t dataset_fingerprint(const LabeledDataset& dataset)
{
    Fnv1a h;
    h.add_value(static_cast<std::int64_t>(dataset.size()));
    h.add_value(static_cast<std::int64_t>(dataset.dim()));
    h.add_value(static_cast<std::int32_t>(dataset.class_count));
    h.add(dataset.embeddings.data(), static_cast<std::size_t>(dataset.embeddings.size()) * sizeof(double));
    for (Label y : dataset.noisy_labels)
    {
        h.add_value(static_cast<std::int32_t>(y));
    }
    if (dataset.true_labels)
    {
        for (Label y : *dataset.true_labels)
        {
            h.add_value(static_cast<std::int32_t>(y));
        }
    }
    return h.value();
}

}  // namespace rolt
