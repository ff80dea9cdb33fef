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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rolt/common.hpp"
#include "rolt/random.hpp"

namespace rolt
{

/// Linear softmax head: logits(x) = W x + b.
template <typename Scalar>
struct LinearModel
{
    Matrix<Scalar> weights;  // K x D
    Vector<Scalar> bias;     // K

    [[nodiscard]] Index class_count() const { return weights.rows(); }
    [[nodiscard]] Index dim() const { return weights.cols(); }

    /// Row i holds the K logits of example i.
    template <typename Derived>
    [[nodiscard]] Matrix<Scalar> logits(const Eigen::MatrixBase<Derived>& embeddings) const
    {
        require_shape(
            embeddings.cols() == dim(),
            "embedding dim " + std::to_string(embeddings.cols()) + " does not match model dim "
                + std::to_string(dim()));
        Matrix<Scalar> z = embeddings * weights.transpose();
        z.rowwise() += bias.transpose();
        return z;
    }

    [[nodiscard]] bool all_finite() const { return weights.allFinite() && bias.allFinite(); }
};

/// Zero bias, weights i.i.d. uniform in [-1/sqrt(D), 1/sqrt(D)].
template <typename Scalar>
LinearModel<Scalar> make_linear_model(Index class_count, Index dim, Rng& rng)
{
    require(class_count >= 1 && dim >= 1, "model shape must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    LinearModel<Scalar> model{Matrix<Scalar>(class_count, dim), Vector<Scalar>::Zero(class_count)};
    for (Index k = 0; k < class_count; ++k)
    {
        for (Index d = 0; d < dim; ++d)
        {
            model.weights(k, d) = static_cast<Scalar>(rng.uniform(-bound, bound));
        }
    }
    return model;
}

/// log(sum(exp(z))) with max-subtraction; the max term is handled through
/// log1p so that dominant logits keep full relative precision.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& z)
{
    using Scalar = typename Derived::Scalar;
    const Index top = argmax_first(z);
    const Scalar m = z(top);
    Scalar rest = 0;
    for (Index k = 0; k < z.size(); ++k)
    {
        if (k != top)
        {
            rest += std::exp(z(k) - m);
        }
    }
    return m + std::log1p(rest);
}

/// Row-wise softmax of a logit matrix.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& logits)
{
    using Scalar = typename Derived::Scalar;
    Matrix<Scalar> p(logits.rows(), logits.cols());
    for (Index i = 0; i < logits.rows(); ++i)
    {
        const Scalar m = logits.row(i).maxCoeff();
        p.row(i) = (logits.row(i).array() - m).exp().matrix();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

/// Throws unless `target` is non-negative and sums to one within `tolerance`.
template <typename Derived>
void require_simplex(const Eigen::MatrixBase<Derived>& target, double tolerance = 1e-9)
{
    require(
        (target.array() >= 0).all(),
        "target has negative entries (not on the probability simplex)");
    const double sum = static_cast<double>(target.sum());
    require(
        std::abs(sum - 1.0) <= tolerance,
        "target sums to " + std::to_string(sum) + ", not 1 (not on the probability simplex)");
}

/// H(t, softmax(z)) = -sum_k t_k log softmax(z)_k.
template <typename DerivedZ, typename DerivedT>
typename DerivedZ::Scalar softmax_cross_entropy(
    const Eigen::MatrixBase<DerivedZ>& logits,
    const Eigen::MatrixBase<DerivedT>& target)
{
    using Scalar = typename DerivedZ::Scalar;
    require_shape(logits.size() == target.size(), "logits and target lengths differ");
    require(logits.allFinite(), "logits must be finite");
    require_simplex(target);

    const Scalar lse = log_sum_exp(logits);
    Scalar loss = 0;
    for (Index k = 0; k < logits.size(); ++k)
    {
        if (target(k) != 0)
        {
            loss -= static_cast<Scalar>(target(k)) * (logits(k) - lse);
        }
    }
    // Rounding can leave a tiny negative residue for a one-hot dominant target.
    return loss < 0 ? Scalar(0) : loss;
}

/// Per-example cross-entropy for a batch (rows of `logits` against rows of `targets`).
template <typename DerivedZ, typename DerivedT>
Vector<typename DerivedZ::Scalar> cross_entropy_rows(
    const Eigen::MatrixBase<DerivedZ>& logits,
    const Eigen::MatrixBase<DerivedT>& targets)
{
    require_shape(
        logits.rows() == targets.rows() && logits.cols() == targets.cols(),
        "logits and targets have different shapes");
    Vector<typename DerivedZ::Scalar> out(logits.rows());
    for (Index i = 0; i < logits.rows(); ++i)
    {
        out(i) = softmax_cross_entropy(logits.row(i), targets.row(i));
    }
    return out;
}

/// g_t for a mini-batch: mean over examples of w_i (softmax(z_i) - t_i) x_i^T.
template <typename Scalar>
struct GradientEstimate
{
    Matrix<Scalar> d_weights;
    Vector<Scalar> d_bias;
    Index batch_size = 0;
};

/// Analytic gradient of the batch-mean cross-entropy. `example_weights`, when
/// non-empty, scales each example's contribution (DRW); the mean is still
/// taken over the batch size.
template <typename Scalar, typename DerivedX, typename DerivedT>
GradientEstimate<Scalar> loss_gradient(
    const LinearModel<Scalar>& model,
    const Eigen::MatrixBase<DerivedX>& embeddings,
    const Eigen::MatrixBase<DerivedT>& targets,
    std::span<const Scalar> example_weights = {})
{
    const Index batch = embeddings.rows();
    require(batch > 0, "loss_gradient needs a non-empty batch");
    require_shape(
        targets.rows() == batch && targets.cols() == model.class_count(),
        "targets must be batch x K");
    require_shape(
        example_weights.empty() || static_cast<Index>(example_weights.size()) == batch,
        "one example weight per batch row required");

    Matrix<Scalar> residual = softmax_rows(model.logits(embeddings));
    residual -= targets;
    if (!example_weights.empty())
    {
        for (Index i = 0; i < batch; ++i)
        {
            residual.row(i) *= example_weights[static_cast<std::size_t>(i)];
        }
    }
    const Scalar inv = Scalar(1) / static_cast<Scalar>(batch);
    GradientEstimate<Scalar> grad;
    grad.d_weights = inv * (residual.transpose() * embeddings);
    grad.d_bias = inv * residual.colwise().sum().transpose();
    grad.batch_size = batch;
    return grad;
}

/// w <- w - lr * (g + weight_decay * w), applied to W and b.
template <typename Scalar>
LinearModel<Scalar> sgd_step(
    const LinearModel<Scalar>& model,
    const GradientEstimate<Scalar>& grad,
    Scalar learning_rate,
    Scalar weight_decay)
{
    require(learning_rate >= 0, "learning rate must be >= 0");
    require_shape(
        grad.d_weights.rows() == model.weights.rows()
            && grad.d_weights.cols() == model.weights.cols()
            && grad.d_bias.size() == model.bias.size(),
        "gradient shape does not match model");
    LinearModel<Scalar> next = model;
    next.weights -= learning_rate * (grad.d_weights + weight_decay * model.weights);
    next.bias -= learning_rate * (grad.d_bias + weight_decay * model.bias);
    return next;
}

template <typename Scalar>
struct Predictions
{
    Matrix<Scalar> scores;       // N x K
    std::vector<Label> labels;   // argmax per row, ties to smaller index
};

template <typename Derived>
std::vector<Label> argmax_rows(const Eigen::MatrixBase<Derived>& scores)
{
    std::vector<Label> labels(static_cast<std::size_t>(scores.rows()));
    for (Index i = 0; i < scores.rows(); ++i)
    {
        labels[static_cast<std::size_t>(i)] = static_cast<Label>(argmax_first(scores.row(i)));
    }
    return labels;
}

template <typename Scalar, typename Derived>
Predictions<Scalar> predict_erm(
    const LinearModel<Scalar>& model,
    const Eigen::MatrixBase<Derived>& embeddings)
{
    Predictions<Scalar> out;
    out.scores = model.logits(embeddings);
    out.labels = argmax_rows(out.scores);
    return out;
}

/// One-hot rows for hard labels.
template <typename Scalar = double>
Matrix<Scalar> one_hot(std::span<const Label> labels, Index class_count)
{
    Matrix<Scalar> out = Matrix<Scalar>::Zero(static_cast<Index>(labels.size()), class_count);
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
        require(labels[i] >= 0 && labels[i] < class_count, "label out of range");
        out(static_cast<Index>(i), labels[i]) = Scalar(1);
    }
    return out;
}

/// Class-balanced DRW weights: (1 - beta) / (1 - beta^N_k), normalized to mean 1.
std::vector<double> drw_class_weights(std::span<const Index> class_counts, double beta);

}  // namespace rolt
