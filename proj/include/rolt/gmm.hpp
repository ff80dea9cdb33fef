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

#include <array>
#include <span>
#include <vector>

#include "rolt/common.hpp"
#include "rolt/prototypes.hpp"

namespace rolt
{

/// Two-component 1-D Gaussian mixture, components ordered by mean.
struct GmmFit
{
    std::array<double, 2> weights{0.5, 0.5};
    std::array<double, 2> means{0.0, 0.0};
    std::array<double, 2> stds{1.0, 1.0};
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Too few samples, zero variance, or a collapsed component: the split
    /// treats every sample as clean.
    bool degenerate = false;
    /// Log-likelihood at the initial parameters and after every EM step.
    std::vector<double> log_likelihood_trace;

    [[nodiscard]] double log_density(int component, double x) const;
    [[nodiscard]] double density(int component, double x) const;
};

struct GmmOptions
{
    int max_iterations = 100;
    double tolerance = 1e-6;
};

/// EM for a two-component mixture with deterministic initialization:
/// means at the 10th/90th percentiles, both stds at the sample std, equal
/// weights. Stds are floored at 1e-4 * (sample std + 1e-12).
GmmFit fit_gmm2(std::span<const double> samples, const GmmOptions& options = {});

/// Flags sample i clean iff N(x_i | mu1, s1) > N(x_i | mu2, s2), comparing
/// unweighted component densities. Degenerate fits flag everything clean.
std::vector<bool> split_class(std::span<const double> samples, const GmmFit& fit);

/// Per-class clean (X_k) and noisy (S_k) index lists.
struct CleanNoisySplit
{
    IndexSets clean;
    IndexSets noisy;

    [[nodiscard]] Index clean_count() const;
    [[nodiscard]] Index noisy_count() const;
    /// Length-N flags, true where the example sits in some X_k.
    [[nodiscard]] std::vector<bool> clean_flags(Index example_count) const;
};

/// Everything-clean split for the given per-class index sets.
CleanNoisySplit all_clean_split(const IndexSets& by_label);

struct DetectionOptions
{
    int refinement_rounds = 1;
    Index min_class_size = 5;
    GmmOptions gmm;
};

struct DetectionResult
{
    CleanNoisySplit split;
    /// Prototypes recomputed from the final clean sets.
    PrototypeSet<double> prototypes;
    /// Fits and distances of the final split round, one per class.
    std::vector<GmmFit> fits;
    std::vector<ClassDistances<double>> distances;
};

/// Class-independent prototypical noise detection: per class, fit the
/// distance mixture and split; then refine every prototype from its clean
/// set and split again, `refinement_rounds` times.
DetectionResult detect(
    const MatrixXd& features,
    std::span<const Label> labels,
    const PrototypeSet<double>& initial,
    const DetectionOptions& options = {});

}  // namespace rolt
