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
#include "rolt/random.hpp"

namespace rolt
{

struct ClassProfile
{
    int class_count = 10;
    Index base_count = 1000;
    double imbalance_ratio = 1.0;
};

enum class SplitTag
{
    train,
    test
};

std::string to_string(SplitTag tag);
SplitTag split_tag_from_string(const std::string& text);

/// Parameters a simulated dataset was generated with, kept for meta.json.
struct SimulationInfo
{
    ClassProfile profile;
    double noise_level = 0.0;
    double separation = 0.0;
    double noise_std = 1.0;
    std::uint64_t seed = 0;
};

/// Embedding matrix with assigned (possibly noisy) labels and, for simulated
/// data, the hidden ground truth.
struct LabeledDataset
{
    MatrixXd embeddings;
    std::vector<Label> noisy_labels;
    std::optional<std::vector<Label>> true_labels;
    int class_count = 0;
    SplitTag split = SplitTag::train;
    std::optional<SimulationInfo> simulation;

    [[nodiscard]] Index size() const { return embeddings.rows(); }
    [[nodiscard]] Index dim() const { return embeddings.cols(); }
    [[nodiscard]] bool has_ground_truth() const { return true_labels.has_value(); }

    /// Throws InvalidArgument/DimensionMismatch when an invariant is broken.
    void validate() const;

    /// Example indices grouped by assigned label (D_k).
    [[nodiscard]] IndexSets indices_by_label() const;

    /// Number of examples per assigned label.
    [[nodiscard]] std::vector<Index> label_counts() const;
};

struct TransitionMatrix
{
    MatrixXd entries;
    double noise_level = 0.0;

    [[nodiscard]] Index class_count() const { return entries.rows(); }
};

/// Per-class sizes decaying exponentially from base_count down to
/// base_count / rho: N_k = round(base * rho^(-k / (K - 1))), k = 0..K-1.
std::vector<Index> long_tailed_counts(const ClassProfile& profile);

/// Class-prior-weighted flip matrix: T_ii = 1 - gamma and
/// T_ij = gamma * N_j / (N - N_i) for j != i.
TransitionMatrix build_transition_matrix(std::span<const Index> counts, double noise_level);

/// Resamples noisy_labels from T[true label] for every example.
LabeledDataset inject_noise(
    const LabeledDataset& dataset,
    const TransitionMatrix& transition,
    std::uint64_t seed);

struct BlobOptions
{
    Index dim = 32;
    double separation = 6.0;
    double noise_std = 1.0;
    Index test_per_class = 200;
    std::uint64_t seed = 0;
};

struct BlobSample
{
    LabeledDataset train;
    LabeledDataset test;
    MatrixXd centers;  // K x D generating means
};

/// Isotropic Gaussian blobs around random unit directions scaled by
/// `separation`. Train follows long_tailed_counts; test is balanced.
/// Labels are clean (noisy_labels == true_labels).
BlobSample synth_blobs(const ClassProfile& profile, const BlobOptions& options);

/// Draws `counts[k]` examples around each row of `centers`.
LabeledDataset sample_gaussian_classes(
    const MatrixXd& centers,
    std::span<const Index> counts,
    double noise_std,
    SplitTag split,
    Rng& rng);

}  // namespace rolt
