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

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rolt/common.hpp"
#include "rolt/model.hpp"

namespace rolt
{

/// Unit-norm class centers in feature space.
template <typename Scalar>
struct PrototypeSet
{
    Matrix<Scalar> centers;            // K x D
    std::vector<Index> source_counts;  // examples averaged per prototype
    std::vector<bool> degenerate;      // center came from a fallback

    [[nodiscard]] Index class_count() const { return centers.rows(); }
    [[nodiscard]] Index dim() const { return centers.cols(); }
};

/// Squared distances from the members of one class to its prototype.
template <typename Scalar>
struct ClassDistances
{
    std::vector<Index> indices;
    Vector<Scalar> distances;
};

/// Rows scaled to unit L2 norm; all-zero rows are left at zero.
template <typename Derived>
Matrix<typename Derived::Scalar> l2_normalize_rows(const Eigen::MatrixBase<Derived>& x)
{
    Matrix<typename Derived::Scalar> out = x;
    for (Index i = 0; i < out.rows(); ++i)
    {
        const auto norm = out.row(i).norm();
        if (norm > 0)
        {
            out.row(i) /= norm;
        }
    }
    return out;
}

namespace detail
{

// A mean this short relative to its members is treated as zero.
inline constexpr double kZeroMeanRelTol = 1e-12;

template <typename Scalar, typename Derived>
bool normalized_mean(
    const Eigen::MatrixBase<Derived>& features,
    const std::vector<Index>& members,
    Eigen::Ref<RowVector<Scalar>> out)
{
    if (members.empty())
    {
        return false;
    }
    RowVector<Scalar> sum = RowVector<Scalar>::Zero(features.cols());
    Scalar scale = 0;
    for (Index i : members)
    {
        sum += features.row(i);
        scale = std::max<Scalar>(scale, features.row(i).norm());
    }
    sum /= static_cast<Scalar>(members.size());
    const Scalar norm = sum.norm();
    if (!(norm > static_cast<Scalar>(kZeroMeanRelTol) * scale))
    {
        return false;
    }
    out = sum / norm;
    return true;
}

}  // namespace detail

/// Normalized class means over the given per-class index sets.
///
/// A class whose set is empty or averages to (numerically) zero keeps its
/// center from `previous` when supplied; otherwise it falls back to the
/// normalized mean of every row of `features` (or e_1 if that is zero too).
/// Fallback centers are flagged degenerate.
template <typename Derived>
PrototypeSet<typename Derived::Scalar> compute_prototypes(
    const Eigen::MatrixBase<Derived>& features,
    const IndexSets& index_sets,
    const PrototypeSet<typename Derived::Scalar>* previous = nullptr)
{
    using Scalar = typename Derived::Scalar;
    const auto k_total = static_cast<Index>(index_sets.size());
    require(k_total >= 1, "need at least one class");
    require(features.cols() >= 1, "features need at least one column");
    require_shape(
        previous == nullptr
            || (previous->class_count() == k_total && previous->dim() == features.cols()),
        "previous prototypes do not match the requested shape");

    PrototypeSet<Scalar> protos{
        Matrix<Scalar>::Zero(k_total, features.cols()),
        std::vector<Index>(static_cast<std::size_t>(k_total), 0),
        std::vector<bool>(static_cast<std::size_t>(k_total), false),
    };

    RowVector<Scalar> global_center(features.cols());
    bool global_ready = false;
    for (Index k = 0; k < k_total; ++k)
    {
        const auto& members = index_sets[static_cast<std::size_t>(k)];
        for (Index i : members)
        {
            require(i >= 0 && i < features.rows(), "prototype member index out of range");
        }
        protos.source_counts[static_cast<std::size_t>(k)] = static_cast<Index>(members.size());
        RowVector<Scalar> center(features.cols());
        if (detail::normalized_mean<Scalar>(features, members, center))
        {
            protos.centers.row(k) = center;
            continue;
        }

        protos.degenerate[static_cast<std::size_t>(k)] = true;
        if (previous != nullptr)
        {
            protos.centers.row(k) = previous->centers.row(k);
            continue;
        }
        if (!global_ready)
        {
            std::vector<Index> all(static_cast<std::size_t>(features.rows()));
            for (Index i = 0; i < features.rows(); ++i)
            {
                all[static_cast<std::size_t>(i)] = i;
            }
            if (!detail::normalized_mean<Scalar>(features, all, global_center))
            {
                global_center.setZero();
                global_center(0) = Scalar(1);
            }
            global_ready = true;
        }
        protos.centers.row(k) = global_center;
    }
    return protos;
}

/// ||c_k - x_i||^2 for every i in `members`.
template <typename Derived, typename Scalar>
ClassDistances<Scalar> distances_to_prototype(
    const Eigen::MatrixBase<Derived>& features,
    const std::vector<Index>& members,
    const PrototypeSet<Scalar>& protos,
    Index k)
{
    require(k >= 0 && k < protos.class_count(), "class index out of range");
    require_shape(features.cols() == protos.dim(), "feature dim does not match prototypes");
    ClassDistances<Scalar> out{members, Vector<Scalar>(static_cast<Index>(members.size()))};
    for (std::size_t j = 0; j < members.size(); ++j)
    {
        out.distances(static_cast<Index>(j))
            = (protos.centers.row(k) - features.row(members[j])).squaredNorm();
    }
    return out;
}

/// Nearest-prototype classifier. Scores are negative squared distances,
/// so the argmax (ties to the smaller index) is the nearest prototype.
template <typename Scalar, typename Derived>
Predictions<Scalar> predict_ncm(
    const PrototypeSet<Scalar>& protos,
    const Eigen::MatrixBase<Derived>& features)
{
    require_shape(features.cols() == protos.dim(), "feature dim does not match prototypes");
    Predictions<Scalar> out;
    out.scores.resize(features.rows(), protos.class_count());
    for (Index i = 0; i < features.rows(); ++i)
    {
        for (Index k = 0; k < protos.class_count(); ++k)
        {
            out.scores(i, k) = -(protos.centers.row(k) - features.row(i)).squaredNorm();
        }
    }
    out.labels = argmax_rows(out.scores);
    return out;
}

}  // namespace rolt
