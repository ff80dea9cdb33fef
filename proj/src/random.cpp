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

#include "rolt/random.hpp"

#include <cmath>
#include <limits>

namespace rolt
{

double Rng::normal()
{
    if (has_spare_)
    {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do
    {
        u = uniform(-1.0, 1.0);
        v = uniform(-1.0, 1.0);
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

std::uint64_t Rng::uniform_index(std::uint64_t bound)
{
    require(bound > 0, "uniform_index bound must be positive");
    // Largest multiple of bound representable; values above it are rejected.
    const std::uint64_t limit
        = std::numeric_limits<std::uint64_t>::max()
          - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = 0;
    do
    {
        draw = engine_();
    } while (draw >= limit);
    return draw % bound;
}

Index Rng::categorical(std::span<const double> weights)
{
    require(!weights.empty(), "categorical needs at least one weight");
    double total = 0.0;
    for (double w : weights)
    {
        require(w >= 0.0 && std::isfinite(w), "categorical weights must be finite and >= 0");
        total += w;
    }
    require(total > 0.0, "categorical weights must not all be zero");

    const double target = uniform() * total;
    double cumulative = 0.0;
    Index last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k)
    {
        if (weights[k] > 0.0)
        {
            last_positive = static_cast<Index>(k);
        }
        cumulative += weights[k];
        if (target < cumulative)
        {
            return static_cast<Index>(k);
        }
    }
    // Rounding left target past the final cumulative sum.
    return last_positive;
}

}  // namespace rolt
