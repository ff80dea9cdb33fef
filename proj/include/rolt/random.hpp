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
#include <random>
#include <span>

#include "rolt/common.hpp"

namespace rolt
{

/// Seedable generator with a fully specified output sequence.
///
/// Bits come from std::mt19937_64, whose sequence is fixed by the standard.
/// Everything built on top (uniform reals, normals, bounded integers,
/// shuffles) is implemented here instead of through std::*_distribution,
/// whose algorithms differ between standard libraries.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Marsaglia polar method (spare value cached).
    double normal();

    /// Uniform integer in [0, bound) by rejection sampling; bound > 0.
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Draw from a discrete distribution given by non-negative weights.
    Index categorical(std::span<const double> weights);

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> values)
    {
        for (std::size_t i = values.size(); i > 1; --i)
        {
            const auto j = static_cast<std::size_t>(uniform_index(i));
            std::swap(values[i - 1], values[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rolt
