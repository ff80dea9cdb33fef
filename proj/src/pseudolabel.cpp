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

#include "rolt/pseudolabel.hpp"

#include <algorithm>
#include <cmath>

#include "rolt/model.hpp"

namespace rolt
{

void GuessPriors::validate() const
{
    for (double p : {erm, ncm, original})
    {
        require(p >= 0.0 && p <= 1.0, "guess priors must lie in [0, 1]");
    }
    require(total() <= 1.0 + 1e-12, "guess priors must sum to at most 1");
}

MomentumLogits MomentumLogits::empty(Index example_count, Index class_count, double alpha)
{
    require(alpha >= 0.0 && alpha < 1.0, "momentum alpha must lie in [0, 1)");
    return {
        MatrixXd::Zero(example_count, class_count),
        alpha,
        std::vector<bool>(static_cast<std::size_t>(example_count), false),
    };
}

MomentumLogits update_momentum(const MomentumLogits& store, const MatrixXd& fresh_logits)
{
    require_shape(
        fresh_logits.rows() == store.values.rows() && fresh_logits.cols() == store.values.cols(),
        "fresh logits shape does not match the momentum store");
    require(fresh_logits.allFinite(), "fresh logits must be finite");
    MomentumLogits next = store;
    for (Index i = 0; i < fresh_logits.rows(); ++i)
    {
        const auto slot = static_cast<std::size_t>(i);
        if (store.initialized[slot])
        {
            next.values.row(i) = store.alpha * store.values.row(i) + (1.0 - store.alpha) * fresh_logits.row(i);
        }
        else
        {
            next.values.row(i) = fresh_logits.row(i);
            next.initialized[slot] = true;
        }
    }
    return next;
}

std::vector<Label> GuessSet::distinct() const
{
    std::vector<Label> out{erm, ncm, original};
    std::ranges::sort(out);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

GuessSet guess_labels(
    Index example,
    const MomentumLogits& erm_logits,
    const MomentumLogits& ncm_logits,
    Label original)
{
    require(
        example >= 0 && example < erm_logits.values.rows() && example < ncm_logits.values.rows(),
        "example index outside the momentum stores");
    // softmax is monotone, so its argmax is the argmax of the logits.
    return {
        static_cast<Label>(argmax_first(erm_logits.values.row(example))),
        static_cast<Label>(argmax_first(ncm_logits.values.row(example))),
        original,
    };
}

SoftLabel soft_label(const GuessSet& guesses, const GuessPriors& priors, Index class_count)
{
    priors.validate();
    for (Label g : {guesses.erm, guesses.ncm, guesses.original})
    {
        require(g >= 0 && g < class_count, "guessed class out of range");
    }

    SoftLabel out{VectorXd::Zero(class_count), false};
    out.probs(guesses.erm) += priors.erm;
    out.probs(guesses.ncm) += priors.ncm;
    out.probs(guesses.original) += priors.original;

    const auto guessed = guesses.distinct();
    const auto n_guessed = static_cast<Index>(guessed.size());
    if (n_guessed < class_count)
    {
        // Priors summing to one can leave a rounding residue just below zero.
        const double rest
            = std::max(0.0, 1.0 - priors.total()) / static_cast<double>(class_count - n_guessed);
        for (Index k = 0; k < class_count; ++k)
        {
            if (!std::ranges::binary_search(guessed, static_cast<Label>(k)))
            {
                out.probs(k) = rest;
            }
        }
        return out;
    }

    out.degenerate = true;
    const double mass = out.probs.sum();
    if (mass > 0.0)
    {
        out.probs /= mass;
    }
    else
    {
        out.probs.setConstant(1.0 / static_cast<double>(class_count));
    }
    return out;
}

TrainingTargets relabel_noisy(
    const CleanNoisySplit& split,
    const MomentumLogits& erm_logits,
    const MomentumLogits& ncm_logits,
    const GuessPriors& priors,
    std::span<const Label> labels,
    Index class_count)
{
    const auto n = static_cast<Index>(labels.size());
    TrainingTargets out;
    out.targets = one_hot(labels, class_count);
    out.clean = split.clean_flags(n);
    out.guesses.reserve(labels.size());
    for (Index i = 0; i < n; ++i)
    {
        out.guesses.push_back(
            guess_labels(i, erm_logits, ncm_logits, labels[static_cast<std::size_t>(i)]));
    }

    std::vector<bool> covered = out.clean;
    for (const auto& set : split.noisy)
    {
        for (Index i : set)
        {
            require(i >= 0 && i < n, "noisy index out of range");
            const auto slot = static_cast<std::size_t>(i);
            require(!covered[slot], "example appears in both clean and noisy sets");
            covered[slot] = true;
            const auto soft = soft_label(out.guesses[slot], priors, class_count);
            out.targets.row(i) = soft.probs.transpose();
            out.degenerate_soft_labels += soft.degenerate ? 1 : 0;
        }
    }
    require(
        std::ranges::all_of(covered, [](bool c) { return c; }),
        "clean/noisy split does not cover every example");
    return out;
}

}  // namespace rolt
