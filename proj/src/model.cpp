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

#include "rolt/model.hpp"

#include <algorithm>
#include <cmath>

namespace rolt
{

std::vector<double> drw_class_weights(std::span<const Index> class_counts, double beta)
{
    require(beta >= 0.0 && beta < 1.0, "DRW beta must lie in [0, 1)");
    require(!class_counts.empty(), "DRW needs at least one class");
    std::vector<double> weights(class_counts.size());
    double total = 0.0;
    for (std::size_t k = 0; k < class_counts.size(); ++k)
    {
        // Empty classes are treated as holding one example.
        const auto n = static_cast<double>(std::max<Index>(class_counts[k], 1));
        const double effective = beta == 0.0 ? 1.0 : (1.0 - std::pow(beta, n)) / (1.0 - beta);
        weights[k] = 1.0 / effective;
        total += weights[k];
    }
    const double mean = total / static_cast<double>(weights.size());
    for (double& w : weights)
    {
        w /= mean;
    }
    return weights;
}

}  // namespace rolt
