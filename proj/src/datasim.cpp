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

#include "rolt/datasim.hpp"

#include <cmath>
#include <numeric>

#include "rolt/random.hpp"

namespace rolt
{

std::string to_string(SplitTag tag)
{
    return tag == SplitTag::train ? "train" : "test";
}

SplitTag split_tag_from_string(const std::string& text)
{
    if (text == "train")
    {
        return SplitTag::train;
    }
    if (text == "test")
    {
        return SplitTag::test;
    }
    throw InvalidArgument("unknown split tag '" + text + "'");
}

void LabeledDataset::validate() const
{
    require(class_count >= 1, "dataset class_count must be >= 1");
    require_shape(
        static_cast<Index>(noisy_labels.size()) == embeddings.rows(),
        "noisy_labels length " + std::to_string(noisy_labels.size())
            + " does not match " + std::to_string(embeddings.rows()) + " embedding rows");
    require(embeddings.allFinite(), "embeddings contain non-finite values");
    auto check_labels = [&](const std::vector<Label>& labels, const char* name)
    {
        for (Label y : labels)
        {
            require(
                y >= 0 && y < class_count,
                std::string(name) + " value " + std::to_string(y + 1) + " outside [1, "
                    + std::to_string(class_count) + "]");
        }
    };
    check_labels(noisy_labels, "noisy label");
    if (true_labels)
    {
        require_shape(
            true_labels->size() == noisy_labels.size(),
            "true_labels and noisy_labels differ in length");
        check_labels(*true_labels, "true label");
    }
}

IndexSets LabeledDataset::indices_by_label() const
{
    IndexSets sets(static_cast<std::size_t>(class_count));
    for (std::size_t i = 0; i < noisy_labels.size(); ++i)
    {
        sets[static_cast<std::size_t>(noisy_labels[i])].push_back(static_cast<Index>(i));
    }
    return sets;
}

std::vector<Index> LabeledDataset::label_counts() const
{
    std::vector<Index> counts(static_cast<std::size_t>(class_count), 0);
    for (Label y : noisy_labels)
    {
        ++counts[static_cast<std::size_t>(y)];
    }
    return counts;
}

std::vector<Index> long_tailed_counts(const ClassProfile& profile)
{
    const int k_total = profile.class_count;
    require(k_total >= 2, "invalid profile: need at least 2 classes");
    require(profile.base_count >= k_total, "invalid profile: base_count must be >= class count");
    require(
        std::isfinite(profile.imbalance_ratio) && profile.imbalance_ratio >= 1.0,
        "invalid profile: imbalance ratio must be >= 1");

    const auto base = static_cast<double>(profile.base_count);
    require(
        std::round(base / profile.imbalance_ratio) >= 1.0,
        "invalid profile: base_count too small for imbalance ratio (tail class would be empty)");

    std::vector<Index> counts(static_cast<std::size_t>(k_total));
    for (int k = 0; k < k_total; ++k)
    {
        const double exponent = -static_cast<double>(k) / static_cast<double>(k_total - 1);
        const double value = std::round(base * std::pow(profile.imbalance_ratio, exponent));
        counts[static_cast<std::size_t>(k)] = std::max<Index>(1, static_cast<Index>(value));
    }
    return counts;
}

TransitionMatrix build_transition_matrix(std::span<const Index> counts, double noise_level)
{
    require(
        noise_level >= 0.0 && noise_level <= 1.0, "noise level must lie in [0, 1]");
    require(counts.size() >= 2, "degenerate transition matrix: need at least two classes");
    for (Index n : counts)
    {
        require(n > 0, "class counts must be positive");
    }

    const auto k_total = static_cast<Index>(counts.size());
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), Index{0}));

    TransitionMatrix t{MatrixXd::Zero(k_total, k_total), noise_level};
    for (Index i = 0; i < k_total; ++i)
    {
        const double others = total - static_cast<double>(counts[static_cast<std::size_t>(i)]);
        for (Index j = 0; j < k_total; ++j)
        {
            t.entries(i, j)
                = i == j ? 1.0 - noise_level
                         : noise_level * static_cast<double>(counts[static_cast<std::size_t>(j)]) / others;
        }
    }
    return t;
}

LabeledDataset inject_noise(
    const LabeledDataset& dataset,
    const TransitionMatrix& transition,
    std::uint64_t seed)
{
    require(dataset.has_ground_truth(), "inject_noise needs true labels");
    require_shape(
        transition.class_count() == dataset.class_count
            && transition.entries.cols() == dataset.class_count,
        "transition matrix is " + std::to_string(transition.class_count()) + "x"
            + std::to_string(transition.entries.cols()) + " but dataset has "
            + std::to_string(dataset.class_count) + " classes");

    Rng rng(seed);
    LabeledDataset noisy = dataset;
    const auto& truth = *dataset.true_labels;
    const auto k_total = static_cast<std::size_t>(dataset.class_count);
    std::vector<double> row(k_total);
    for (std::size_t i = 0; i < truth.size(); ++i)
    {
        for (std::size_t j = 0; j < k_total; ++j)
        {
            row[j] = transition.entries(truth[i], static_cast<Index>(j));
        }
        noisy.noisy_labels[i] = static_cast<Label>(rng.categorical(row));
    }
    if (noisy.simulation)
    {
        noisy.simulation->noise_level = transition.noise_level;
    }
    return noisy;
}

LabeledDataset sample_gaussian_classes(
    const MatrixXd& centers,
    std::span<const Index> counts,
    double noise_std,
    SplitTag split,
    Rng& rng)
{
    require_shape(
        static_cast<Index>(counts.size()) == centers.rows(), "one count per center required");
    require(noise_std >= 0.0, "noise_std must be >= 0");

    const Index total = std::accumulate(counts.begin(), counts.end(), Index{0});
    LabeledDataset data;
    data.class_count = static_cast<int>(centers.rows());
    data.split = split;
    data.embeddings.resize(total, centers.cols());
    data.noisy_labels.reserve(static_cast<std::size_t>(total));

    Index row = 0;
    for (Index k = 0; k < centers.rows(); ++k)
    {
        for (Index n = 0; n < counts[static_cast<std::size_t>(k)]; ++n, ++row)
        {
            for (Index d = 0; d < centers.cols(); ++d)
            {
                data.embeddings(row, d) = centers(k, d) + noise_std * rng.normal();
            }
            data.noisy_labels.push_back(static_cast<Label>(k));
        }
    }
    data.true_labels = data.noisy_labels;
    return data;
}

BlobSample synth_blobs(const ClassProfile& profile, const BlobOptions& options)
{
    require(options.dim >= 2, "blob dimension must be >= 2");
    require(options.separation > 0.0, "separation must be > 0");
    require(options.test_per_class >= 1, "test_per_class must be >= 1");
    const auto train_counts = long_tailed_counts(profile);

    Rng rng(options.seed);
    MatrixXd centers(profile.class_count, options.dim);
    for (Index k = 0; k < centers.rows(); ++k)
    {
        do
        {
            for (Index d = 0; d < options.dim; ++d)
            {
                centers(k, d) = rng.normal();
            }
        } while (centers.row(k).norm() == 0.0);
        centers.row(k) *= options.separation / centers.row(k).norm();
    }

    const std::vector<Index> test_counts(
        static_cast<std::size_t>(profile.class_count), options.test_per_class);

    BlobSample sample{
        sample_gaussian_classes(centers, train_counts, options.noise_std, SplitTag::train, rng),
        sample_gaussian_classes(centers, test_counts, options.noise_std, SplitTag::test, rng),
        centers,
    };
    const SimulationInfo info{profile, 0.0, options.separation, options.noise_std, options.seed};
    sample.train.simulation = info;
    sample.test.simulation = info;
    return sample;
}

}  // namespace rolt
