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
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rolt
{

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

using Index = Eigen::Index;

/// Class labels are 0-based in memory and 1-based in every file format.
using Label = int;

/// Per-class lists of example indices (row numbers into a dataset).
using IndexSets = std::vector<std::vector<Index>>;

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
  public:
    using Error::Error;
};

class DimensionMismatch : public Error
{
  public:
    using Error::Error;
};

class IoError : public Error
{
  public:
    using Error::Error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition)
    {
        throw InvalidArgument(message);
    }
}

inline void require_shape(bool condition, const std::string& message)
{
    if (!condition)
    {
        throw DimensionMismatch(message);
    }
}

/// Index of the largest entry; ties resolve to the smallest index.
template <typename Derived>
Index argmax_first(const Eigen::DenseBase<Derived>& values)
{
    Index best = 0;
    for (Index k = 1; k < values.size(); ++k)
    {
        if (values(k) > values(best))
        {
            best = k;
        }
    }
    return best;
}

}  // namespace rolt
