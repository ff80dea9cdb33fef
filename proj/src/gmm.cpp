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

#include "rolt/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rolt
{
namespace
{

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_log_pdf(double x, double mean, double std)
{
    const double z = (x - mean) / std;
    return -0.5 * z * z - std::log(std) - kLogSqrt2Pi;
}

double log_add(double a, double b)
{
    const double m = std::max(a, b);
    if (m == -std::numeric_limits<double>::infinity())
    {
        return m;
    }
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

double quantile_sorted(const std::vector<double>& sorted, double p)
{
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mixture_log_likelihood(std::span<const double> x, const GmmFit& fit)
{
    const double lw0 = std::log(fit.weights[0]);
    const double lw1 = std::log(fit.weights[1]);
    double total = 0.0;
    for (double v : x)
    {
        total += log_add(
            lw0 + normal_log_pdf(v, fit.means[0], fit.stds[0]),
            lw1 + normal_log_pdf(v, fit.means[1], fit.stds[1]));
    }
    return total;
}

GmmFit single_component(double mean, double std)
{
    GmmFit fit;
    fit.means = {mean, mean};
    fit.stds = {std > 0.0 ? std : 1.0, std > 0.0 ? std : 1.0};
    fit.degenerate = true;
    return fit;
}

}  // namespace

double GmmFit::log_density(int component, double x) const
{
    return normal_log_pdf(x, means.at(component), stds.at(component));
}

double GmmFit::density(int component, double x) const
{
    return std::exp(log_density(component, x));
}

GmmFit fit_gmm2(std::span<const double> samples, const GmmOptions& options)
{
    require(options.max_iterations >= 1, "max_iterations must be >= 1");
    for (double v : samples)
    {
        require(std::isfinite(v), "GMM samples must be finite");
    }
    const auto n = static_cast<double>(samples.size());
    if (samples.size() < 2)
    {
        return single_component(samples.empty() ? 0.0 : samples.front(), 0.0);
    }

    double mean = 0.0;
    for (double v : samples)
    {
        mean += v;
    }
    mean /= n;
    double var = 0.0;
    for (double v : samples)
    {
        var += (v - mean) * (v - mean);
    }
    const double sample_std = std::sqrt(var / n);
    if (!(sample_std > 0.0))
    {
        return single_component(mean, 0.0);
    }
    const double std_floor = 1e-4 * (sample_std + 1e-12);

    std::vector<double> sorted(samples.begin(), samples.end());
    std::ranges::sort(sorted);
    GmmFit fit;
    fit.means = {quantile_sorted(sorted, 0.1), quantile_sorted(sorted, 0.9)};
    if (fit.means[0] == fit.means[1])
    {
        // Over 80% of the mass on one value: start from the extremes instead.
        fit.means = {sorted.front(), sorted.back()};
    }
    fit.stds = {std::max(sample_std, std_floor), std::max(sample_std, std_floor)};
    fit.weights = {0.5, 0.5};

    double current = mixture_log_likelihood(samples, fit);
    fit.log_likelihood_trace.push_back(current);
    std::vector<double> resp(samples.size());
    for (int it = 1; it <= options.max_iterations; ++it)
    {
        // E-step: responsibility of component 0.
        const double lw0 = std::log(fit.weights[0]);
        const double lw1 = std::log(fit.weights[1]);
        double n0 = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            const double a = lw0 + normal_log_pdf(samples[i], fit.means[0], fit.stds[0]);
            const double b = lw1 + normal_log_pdf(samples[i], fit.means[1], fit.stds[1]);
            resp[i] = std::exp(a - log_add(a, b));
            n0 += resp[i];
        }
        const double n1 = n - n0;
        if (n0 <= 1e-10 * n || n1 <= 1e-10 * n)
        {
            // One component lost all its mass.
            fit.degenerate = true;
            break;
        }

        // M-step.
        double s0 = 0.0;
        double s1 = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            s0 += resp[i] * samples[i];
            s1 += (1.0 - resp[i]) * samples[i];
        }
        GmmFit next = fit;
        next.means = {s0 / n0, s1 / n1};
        double v0 = 0.0;
        double v1 = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            const double d0 = samples[i] - next.means[0];
            const double d1 = samples[i] - next.means[1];
            v0 += resp[i] * d0 * d0;
            v1 += (1.0 - resp[i]) * d1 * d1;
        }
        next.stds = {std::max(std::sqrt(v0 / n0), std_floor), std::max(std::sqrt(v1 / n1), std_floor)};
        next.weights[0] = n0 / n;
        next.weights[1] = 1.0 - next.weights[0];

        const double updated = mixture_log_likelihood(samples, next);
        fit.means = next.means;
        fit.stds = next.stds;
        fit.weights = next.weights;
        fit.log_likelihood_trace.push_back(updated);
        fit.iterations = it;
        const double gain = updated - current;
        current = updated;
        if (gain < options.tolerance)
        {
            fit.converged = true;
            break;
        }
    }
    fit.log_likelihood = current;

    if (fit.means[0] > fit.means[1])
    {
        std::swap(fit.means[0], fit.means[1]);
        std::swap(fit.stds[0], fit.stds[1]);
        fit.weights = {fit.weights[1], 1.0 - fit.weights[1]};
    }
    return fit;
}

std::vector<bool> split_class(std::span<const double> samples, const GmmFit& fit)
{
    std::vector<bool> clean(samples.size(), true);
    if (fit.degenerate)
    {
        return clean;
    }
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        clean[i] = fit.log_density(0, samples[i]) > fit.log_density(1, samples[i]);
    }
    return clean;
}

Index CleanNoisySplit::clean_count() const
{
    Index total = 0;
    for (const auto& set : clean)
    {
        total += static_cast<Index>(set.size());
    }
    return total;
}

Index CleanNoisySplit::noisy_count() const
{
    Index total = 0;
    for (const auto& set : noisy)
    {
        total += static_cast<Index>(set.size());
    }
    return total;
}

std::vector<bool> CleanNoisySplit::clean_flags(Index example_count) const
{
    std::vector<bool> flags(static_cast<std::size_t>(example_count), false);
    for (const auto& set : clean)
    {
        for (Index i : set)
        {
            flags.at(static_cast<std::size_t>(i)) = true;
        }
    }
    return flags;
}

CleanNoisySplit all_clean_split(const IndexSets& by_label)
{
    return {by_label, IndexSets(by_label.size())};
}

DetectionResult detect(
    const MatrixXd& features,
    std::span<const Label> labels,
    const PrototypeSet<double>& initial,
    const DetectionOptions& options)
{
    require_shape(
        static_cast<Index>(labels.size()) == features.rows(), "one label per feature row required");
    require_shape(features.cols() == initial.dim(), "feature dim does not match prototypes");
    require(options.refinement_rounds >= 0, "refinement_rounds must be >= 0");

    const Index k_total = initial.class_count();
    IndexSets by_label(static_cast<std::size_t>(k_total));
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
        require(labels[i] >= 0 && labels[i] < k_total, "label out of range in detect");
        by_label[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
    }

    DetectionResult result;
    result.prototypes = initial;
    for (int round = 0; round <= options.refinement_rounds; ++round)
    {
        result.split = CleanNoisySplit{IndexSets(by_label.size()), IndexSets(by_label.size())};
        result.fits.assign(static_cast<std::size_t>(k_total), GmmFit{});
        result.distances.assign(static_cast<std::size_t>(k_total), ClassDistances<double>{});
        for (Index k = 0; k < k_total; ++k)
        {
            const auto slot = static_cast<std::size_t>(k);
            const auto& members = by_label[slot];
            auto dist = distances_to_prototype(features, members, result.prototypes, k);
            const std::span<const double> values(dist.distances.data(), members.size());

            GmmFit fit;
            if (static_cast<Index>(members.size()) < options.min_class_size)
            {
                fit = single_component(
                    values.empty() ? 0.0 : dist.distances.mean(), 0.0);
            }
            else
            {
                fit = fit_gmm2(values, options.gmm);
            }
            const auto flags = split_class(values, fit);
            for (std::size_t j = 0; j < members.size(); ++j)
            {
                (flags[j] ? result.split.clean : result.split.noisy)[slot].push_back(members[j]);
            }
            result.fits[slot] = std::move(fit);
            result.distances[slot] = std::move(dist);
        }
        result.prototypes = compute_prototypes(features, result.split.clean, &result.prototypes);
    }
    return result;
}

}  // namespace rolt
