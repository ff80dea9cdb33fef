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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "rolt/gmm.hpp"
#include "rolt/prototypes.hpp"
#include "rolt/random.hpp"
#include "test_support.hpp"

using namespace rolt;
using rolt::testing::angle_degrees;
using rolt::testing::standard_benchmark;

namespace
{

MatrixXd random_matrix(Index rows, Index cols, Rng& rng)
{
    MatrixXd m(rows, cols);
    for (Index i = 0; i < m.size(); ++i)
    {
        m.data()[i] = rng.normal();
    }
    return m;
}

IndexSets true_label_sets(const LabeledDataset& d)
{
    IndexSets sets(static_cast<std::size_t>(d.class_count));
    for (Index i = 0; i < d.size(); ++i)
    {
        sets[static_cast<std::size_t>((*d.true_labels)[static_cast<std::size_t>(i)])].push_back(i);
    }
    return sets;
}

}  // namespace

TEST_CASE("compute_prototypes: single example and unit norm")
{
    MatrixXd x(3, 3);
    x << 3.0, 4.0, 0.0, 1.0, 1.0, 1.0, 2.0, 0.0, 0.0;
    const IndexSets sets{{0}, {1, 2}};
    const auto p = compute_prototypes(x, sets);
    CHECK(p.centers(0, 0) == doctest::Approx(0.6));
    CHECK(p.centers(0, 1) == doctest::Approx(0.8));
    // Mean of rows 1, 2 is (1.5, 0.5, 0.5).
    const double n = std::sqrt(2.75);
    CHECK(p.centers(1, 0) == doctest::Approx(1.5 / n));
    CHECK(p.centers(1, 2) == doctest::Approx(0.5 / n));
    CHECK(p.source_counts == std::vector<Index>{1, 2});
    CHECK(p.degenerate == std::vector<bool>{false, false});
    for (Index k = 0; k < 2; ++k)
    {
        CHECK(std::abs(p.centers.row(k).norm() - 1.0) <= 1e-9);
    }
}

TEST_CASE("compute_prototypes: cancellation and empty sets fall back")
{
    MatrixXd x(3, 2);
    x << 1.0, 2.0, -1.0, -2.0, 0.0, 5.0;
    const IndexSets sets{{0, 1}, {2}, {}};
    const auto p = compute_prototypes(x, sets);
    CHECK(p.degenerate == std::vector<bool>{true, false, true});
    // Global mean (0, 5/3) normalizes to e_2.
    CHECK(p.centers(0, 1) == doctest::Approx(1.0));
    CHECK(p.centers.row(2) == p.centers.row(0));
    CHECK(p.source_counts == std::vector<Index>{2, 1, 0});

    PrototypeSet<double> previous{MatrixXd::Zero(3, 2), {1, 1, 1}, {false, false, false}};
    previous.centers << 1.0, 0.0, 0.0, 1.0, -1.0, 0.0;
    const auto q = compute_prototypes(x, sets, &previous);
    CHECK(q.centers.row(0) == previous.centers.row(0));
    CHECK(q.centers.row(2) == previous.centers.row(2));
    CHECK(q.degenerate[0]);

    // Everything cancels: e_1.
    MatrixXd y(2, 2);
    y << 1.0, 1.0, -1.0, -1.0;
    const auto r = compute_prototypes(y, IndexSets{{0, 1}});
    CHECK(r.centers(0, 0) == 1.0);
    CHECK(r.centers(0, 1) == 0.0);

    CHECK_THROWS_AS(compute_prototypes(x, IndexSets{{5}}), InvalidArgument);
    PrototypeSet<double> wrong{MatrixXd::Zero(2, 2), {1, 1}, {false, false}};
    CHECK_THROWS_AS(compute_prototypes(x, sets, &wrong), DimensionMismatch);
}

TEST_CASE("compute_prototypes: separated blobs recover generator directions")
{
    const auto blobs = synth_blobs({10, 1000, 10.0}, {32, 10.0, 1.0, 10, 42});
    const auto p = compute_prototypes(blobs.train.embeddings, blobs.train.indices_by_label());
    for (Index k = 0; k < 10; ++k)
    {
        CHECK(angle_degrees(p.centers.row(k), blobs.centers.row(k)) < 5.0);
    }
}

TEST_CASE("distances_to_prototype: trivial cases and brute-force oracle")
{
    PrototypeSet<double> p{MatrixXd::Zero(2, 3), {1, 1}, {false, false}};
    p.centers << 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
    MatrixXd x(2, 3);
    x << 1.0, 0.0, 0.0, 0.0, 0.0, 1.0;
    const auto d = distances_to_prototype(x, {0, 1}, p, 0);
    CHECK(d.distances(0) == 0.0);
    CHECK(d.distances(1) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(d.indices == std::vector<Index>{0, 1});

    Rng rng(8);
    const MatrixXd feats = random_matrix(50, 7, rng);
    PrototypeSet<double> q{
        l2_normalize_rows(random_matrix(4, 7, rng)), {1, 1, 1, 1}, {false, false, false, false}};
    const std::vector<Index> members{0, 3, 9, 17, 49};
    for (Index k = 0; k < 4; ++k)
    {
        const auto dist = distances_to_prototype(feats, members, q, k);
        for (std::size_t j = 0; j < members.size(); ++j)
        {
            double naive = 0.0;
            for (Index c = 0; c < 7; ++c)
            {
                const double diff = q.centers(k, c) - feats(members[j], c);
                naive += diff * diff;
            }
            CHECK(std::abs(dist.distances(static_cast<Index>(j)) - naive) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(distances_to_prototype(feats, members, q, 4), InvalidArgument);
    CHECK_THROWS_AS(distances_to_prototype(MatrixXd(MatrixXd::Zero(2, 3)), {0}, q, 0), DimensionMismatch);
}

TEST_CASE("predict_ncm: nearest prototype with ties to the smaller index")
{
    PrototypeSet<double> p{MatrixXd::Identity(4, 4), {1, 1, 1, 1}, {false, false, false, false}};
    const MatrixXd x = MatrixXd::Identity(4, 4).row(2);
    CHECK(predict_ncm(p, x).labels == std::vector<Label>{2});

    PrototypeSet<double> pair{MatrixXd::Zero(2, 2), {1, 1}, {false, false}};
    pair.centers << 1.0, 0.0, -1.0, 0.0;
    MatrixXd bisector(1, 2);
    bisector << 0.0, 3.0;
    const auto tie = predict_ncm(pair, bisector);
    CHECK(tie.labels == std::vector<Label>{0});
    CHECK(tie.scores(0, 0) == tie.scores(0, 1));
    CHECK(tie.scores(0, 0) == doctest::Approx(-10.0));
}

TEST_CASE("predict_ncm: decisions invariant to positive rescaling")
{
    const auto blobs = synth_blobs({5, 200, 10.0}, {8, 2.0, 1.0, 100, 6});
    const auto sets = blobs.train.indices_by_label();
    const auto base = compute_prototypes(blobs.train.embeddings, sets);
    const auto base_labels = predict_ncm(base, l2_normalize_rows(blobs.test.embeddings)).labels;
    for (double scale : {1e-3, 0.5, 7.0})
    {
        const MatrixXd xs = scale * blobs.train.embeddings;
        const MatrixXd ts = scale * blobs.test.embeddings;
        const auto p = compute_prototypes(xs, sets);
        CHECK((p.centers - base.centers).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(predict_ncm(p, l2_normalize_rows(ts)).labels == base_labels);
    }
}

// Registered as its own ctest entry. On this generator half of every D_k is
// mislabeled, so the noisy mean sits roughly atan(|contamination| / |clean|)
// away from the clean one, which exceeds 25 degrees for most classes.
TEST_CASE("gap: polluted prototypes stay within 25 degrees")
{
    for (std::uint64_t seed : {0, 1, 2})
    {
        const auto data = standard_benchmark(100.0, 0.5, seed);
        const auto clean = compute_prototypes(data.train.embeddings, true_label_sets(data.train));
        const auto noisy = compute_prototypes(data.train.embeddings, data.train.indices_by_label());
        for (Index k = 0; k < 10; ++k)
        {
            const double angle = angle_degrees(clean.centers.row(k), noisy.centers.row(k));
            MESSAGE("seed " << seed << " class " << k + 1 << ": " << angle << " deg");
            CHECK(angle < 25.0);
        }
    }
}

TEST_CASE("compute_prototypes: refinement from clean sets moves toward true centers")
{
    const auto data = standard_benchmark(100.0, 0.3, 11);
    const MatrixXd feats = l2_normalize_rows(data.train.embeddings);
    const auto initial = compute_prototypes(feats, data.train.indices_by_label());
    const auto refined = detect(feats, data.train.noisy_labels, initial).prototypes;
    int closer = 0;
    for (Index k = 0; k < 10; ++k)
    {
        const double before = angle_degrees(initial.centers.row(k), data.centers.row(k));
        const double after = angle_degrees(refined.centers.row(k), data.centers.row(k));
        MESSAGE("class " << k + 1 << ": " << before << " deg -> " << after << " deg");
        closer += after < before ? 1 : 0;
    }
    CHECK(closer >= 9);
}
