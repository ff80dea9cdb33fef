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

#include <span>
#include <vector>

#include "rolt/common.hpp"
#include "rolt/gmm.hpp"

namespace rolt
{

/// Prior probability that each guess source matches the ground truth.
struct GuessPriors
{
    double erm = 0.4;
    double ncm = 0.2;
    double original = 0.2;

    [[nodiscard]] double total() const { return erm + ncm + original; }
    void validate() const;
};

/// Per-example exponential moving average of logits:
/// q <- alpha * q + (1 - alpha) * z, with the first observation copied.
struct MomentumLogits
{
    MatrixXd values;
    double alpha = 0.9;
    std::vector<bool> initialized;

    static MomentumLogits empty(Index example_count, Index class_count, double alpha);
};

MomentumLogits update_momentum(const MomentumLogits& store, const MatrixXd& fresh_logits);

struct GuessSet
{
    Label erm = 0;
    Label ncm = 0;
    Label original = 0;

    /// Distinct guessed classes in ascending order.
    [[nodiscard]] std::vector<Label> distinct() const;
};

GuessSet guess_labels(
    Index example,
    const MomentumLogits& erm_logits,
    const MomentumLogits& ncm_logits,
    Label original);

struct SoftLabel
{
    VectorXd probs;
    /// Every class was guessed, so the guessed masses were renormalized.
    bool degenerate = false;
};

/// Guessed classes get the summed prior mass of the guesses naming them;
/// the remaining 1 - sum(priors) is spread evenly over the other classes.
SoftLabel soft_label(const GuessSet& guesses, const GuessPriors& priors, Index class_count);

struct TrainingTargets
{
    MatrixXd targets;                      // N x K
    std::vector<bool> clean;               // per example
    std::vector<GuessSet> guesses;         // per example; soft labels use them where !clean
    Index degenerate_soft_labels = 0;
};

/// One-hot original labels for X, smoothed guess-set soft labels for S.
TrainingTargets relabel_noisy(
    const CleanNoisySplit& split,
    const MomentumLogits& erm_logits,
    const MomentumLogits& ncm_logits,
    const GuessPriors& priors,
    std::span<const Label> labels,
    Index class_count);

}  // namespace rolt
