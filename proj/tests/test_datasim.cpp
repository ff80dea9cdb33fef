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
#include <numeric>
#include <vector>

#include "rolt/datasim.hpp"
#include "rolt/random.hpp"

using namespace rolt;

TEST_CASE("long_tailed_counts: uniform when rho is 1")
{
    const auto counts = long_tailed_counts({10, 5000, 1.0});
    CHECK(counts == std::vector<Index>(10, 5000));
}

TEST_CASE("long_tailed_counts: direct evaluation")
{
    // 100 * 100^(-k/2) for k = 0, 1, 2.
    CHECK(long_tailed_counts({3, 100, 100.0}) == std::vector<Index>{100, 10, 1});

    const auto counts = long_tailed_counts({10, 5000, 100.0});
    CHECK(counts.front() == 5000);
    CHECK(counts.back() == 50);
}

TEST_CASE("long_tailed_counts: invalid profiles")
{
    CHECK_THROWS_AS(long_tailed_counts({10, 5000, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(long_tailed_counts({1, 5000, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(long_tailed_counts({10, 5, 1.0}), InvalidArgument);
    // Tail would be round(100 / 1000) = 0.
    CHECK_THROWS_AS(long_tailed_counts({3, 100, 1000.0}), InvalidArgument);
}

TEST_CASE("long_tailed_counts: monotone with endpoint ratio rho")
{
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial)
    {
        const int k = 2 + static_cast<int>(rng.uniform_index(20));
        const Index base = 50 + static_cast<Index>(rng.uniform_index(5000));
        const double rho = 1.0 + rng.uniform() * (static_cast<double>(base) / 2.0 - 1.0);
        const auto counts = long_tailed_counts({k, base, rho});
        REQUIRE(counts.size() == static_cast<std::size_t>(k));
        CHECK(counts.front() == base);
        for (std::size_t i = 1; i < counts.size(); ++i)
        {
            CHECK(counts[i] <= counts[i - 1]);
            CHECK(counts[i] >= 1);
        }
        // Tail is round(base / rho).
        CHECK(std::abs(static_cast<double>(counts.back()) - static_cast<double>(base) / rho) <= 0.5);
    }
}

TEST_CASE("transition matrix: worked example")
{
    const std::vector<Index> counts{6, 3, 1};
    const auto t = build_transition_matrix(counts, 0.3);
    CHECK(t.entries(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(t.entries(0, 1) == doctest::Approx(0.225).epsilon(1e-15));
    CHECK(t.entries(0, 2) == doctest::Approx(0.075).epsilon(1e-15));
    // Row 2: 0.3 * 6/7 and 0.3 * 1/7.
    CHECK(t.entries(1, 0) == doctest::Approx(0.3 * 6.0 / 7.0).epsilon(1e-15));
    CHECK(t.entries(1, 2) == doctest::Approx(0.3 / 7.0).epsilon(1e-15));
}

TEST_CASE("transition matrix: zero noise and two classes")
{
    const std::vector<Index> counts{50, 7, 3, 1};
    CHECK(build_transition_matrix(counts, 0.0).entries.isIdentity(0.0));

    const std::vector<Index> pair{5, 5};
    const auto t = build_transition_matrix(pair, 0.4);
    CHECK(t.entries(0, 0) == 0.6);
    CHECK(t.entries(1, 1) == 0.6);
    CHECK(t.entries(0, 1) == doctest::Approx(0.4));
    CHECK(t.entries(1, 0) == doctest::Approx(0.4));
}

TEST_CASE("transition matrix: errors")
{
    const std::vector<Index> one{10};
    CHECK_THROWS_AS(build_transition_matrix(one, 0.2), InvalidArgument);
    const std::vector<Index> counts{3, 2};
    CHECK_THROWS_AS(build_transition_matrix(counts, 1.5), InvalidArgument);
    CHECK_THROWS_AS(build_transition_matrix(counts, -0.1), InvalidArgument);
    const std::vector<Index> zero{3, 0};
    CHECK_THROWS_AS(build_transition_matrix(zero, 0.1), InvalidArgument);
}

TEST_CASE("transition matrix: row sums, diagonal and frequency ratios")
{
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto k = static_cast<std::size_t>(2 + rng.uniform_index(15));
        std::vector<Index> counts(k);
        for (auto& c : counts)
        {
            c = 1 + static_cast<Index>(rng.uniform_index(5000));
        }
        for (int g = 0; g <= 10; ++g)
        {
            const double gamma = g / 10.0;
            const auto t = build_transition_matrix(counts, gamma);
            for (Index i = 0; i < t.class_count(); ++i)
            {
                CHECK(std::abs(t.entries.row(i).sum() - 1.0) <= 1e-12);
                CHECK(t.entries(i, i) == 1.0 - gamma);
                CHECK((t.entries.row(i).array() >= 0.0).all());
                for (Index j = 0; j < t.class_count(); ++j)
                {
                    for (Index l = 0; l < t.class_count(); ++l)
                    {
                        if (j == i || l == i || gamma == 0.0)
                        {
                            continue;
                        }
                        const double lhs = t.entries(i, j) / t.entries(i, l);
                        const double rhs = static_cast<double>(counts[static_cast<std::size_t>(j)])
                                           / static_cast<double>(counts[static_cast<std::size_t>(l)]);
                        CHECK(std::abs(lhs - rhs) <= 4e-16 * rhs * 4);
                    }
                }
            }
        }
    }
}

namespace
{

LabeledDataset single_class_dataset(Index n, Label label, int class_count)
{
    LabeledDataset d;
    d.class_count = class_count;
    d.embeddings = MatrixXd::Zero(n, 2);
    d.noisy_labels.assign(static_cast<std::size_t>(n), label);
    d.true_labels = d.noisy_labels;
    return d;
}

}  // namespace

TEST_CASE("inject_noise: identity matrix keeps labels")
{
    const std::vector<Index> counts{6, 3, 1};
    const auto blobs = synth_blobs({3, 60, 6.0}, {4, 3.0, 1.0, 5, 9});
    const auto noisy = inject_noise(blobs.train, build_transition_matrix(counts, 0.0), 1);
    CHECK(noisy.noisy_labels == *noisy.true_labels);
}

TEST_CASE("inject_noise: flip frequencies match the transition row")
{
    // Monte-Carlo frequency oracle for the first row of the [6,3,1] matrix.
    const std::vector<Index> counts{6, 3, 1};
    const auto t = build_transition_matrix(counts, 0.3);
    const auto data = single_class_dataset(100000, 0, 3);
    const auto noisy = inject_noise(data, t, 2024);
    std::vector<double> freq(3, 0.0);
    for (Label y : noisy.noisy_labels)
    {
        freq[static_cast<std::size_t>(y)] += 1.0 / 100000.0;
    }
    CHECK(std::abs(freq[0] - 0.7) < 0.01);
    CHECK(std::abs(freq[1] - 0.225) < 0.01);
    CHECK(std::abs(freq[2] - 0.075) < 0.01);

    // Pearson chi-square against the row, 2 degrees of freedom; 13.8 is the 0.999 quantile.
    double chi2 = 0.0;
    for (int j = 0; j < 3; ++j)
    {
        const double expected = 100000.0 * t.entries(0, j);
        const double observed = freq[static_cast<std::size_t>(j)] * 100000.0;
        chi2 += (observed - expected) * (observed - expected) / expected;
    }
    CHECK(chi2 < 13.8);
    CHECK(*noisy.true_labels == *data.true_labels);
}

TEST_CASE("inject_noise: deterministic and validated")
{
    const auto blobs = synth_blobs({4, 200, 10.0}, {3, 4.0, 1.0, 5, 1});
    const auto t = build_transition_matrix(long_tailed_counts({4, 200, 10.0}), 0.4);
    const auto a = inject_noise(blobs.train, t, 77);
    const auto b = inject_noise(blobs.train, t, 77);
    CHECK(a.noisy_labels == b.noisy_labels);
    CHECK(a.noisy_labels != *a.true_labels);

    const std::vector<Index> wrong{5, 5};
    CHECK_THROWS_AS(inject_noise(blobs.train, build_transition_matrix(wrong, 0.1), 1), DimensionMismatch);
    auto no_truth = blobs.train;
    no_truth.true_labels.reset();
    CHECK_THROWS_AS(inject_noise(no_truth, t, 1), InvalidArgument);
}

TEST_CASE("synth_blobs: shapes, counts and determinism")
{
    const ClassProfile profile{5, 300, 30.0};
    const BlobOptions options{8, 4.0, 1.0, 25, 123};
    const auto a = synth_blobs(profile, options);
    const auto b = synth_blobs(profile, options);
    CHECK(a.train.embeddings == b.train.embeddings);
    CHECK(a.test.embeddings == b.test.embeddings);
    CHECK(a.train.noisy_labels == b.train.noisy_labels);

    CHECK(a.train.label_counts() == long_tailed_counts(profile));
    CHECK(a.test.label_counts() == std::vector<Index>(5, 25));
    CHECK(a.train.split == SplitTag::train);
    CHECK(a.test.split == SplitTag::test);
    CHECK(a.train.noisy_labels == *a.train.true_labels);
    for (Index k = 0; k < 5; ++k)
    {
        CHECK(a.centers.row(k).norm() == doctest::Approx(4.0));
    }
    CHECK_NOTHROW(a.train.validate());

    CHECK_THROWS_AS(synth_blobs(profile, {1, 4.0, 1.0, 25, 1}), InvalidArgument);
    CHECK_THROWS_AS(synth_blobs(profile, {8, 0.0, 1.0, 25, 1}), InvalidArgument);
}

TEST_CASE("synth_blobs: separable limit gives perfect nearest-center accuracy")
{
    const auto blobs = synth_blobs({6, 100, 5.0}, {16, 1000.0, 1.0, 50, 3});
    Index correct = 0;
    for (Index i = 0; i < blobs.test.size(); ++i)
    {
        Index best = 0;
        (blobs.centers.rowwise() - blobs.test.embeddings.row(i)).rowwise().squaredNorm().minCoeff(&best);
        correct += best == (*blobs.test.true_labels)[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    CHECK(correct == blobs.test.size());
}

TEST_CASE("sample_gaussian_classes: antipodal pair is Bayes-separable")
{
    // For centers +-10 e_1 the Bayes rule is the sign of the first
    // coordinate; its error is P(N(0,1) > 10) ~ 7.6e-24.
    MatrixXd centers(2, 3);
    centers << 10.0, 0.0, 0.0, -10.0, 0.0, 0.0;
    const std::vector<Index> counts{5000, 5000};
    Rng rng(8);
    const auto data = sample_gaussian_classes(centers, counts, 1.0, SplitTag::test, rng);
    Index correct = 0;
    for (Index i = 0; i < data.size(); ++i)
    {
        const Label bayes = data.embeddings(i, 0) > 0.0 ? 0 : 1;
        correct += bayes == data.noisy_labels[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    const double bayes_error_bound = 0.5 * std::erfc(10.0 / std::sqrt(2.0));
    CHECK(bayes_error_bound < 1e-20);
    CHECK(static_cast<double>(correct) / static_cast<double>(data.size()) > 0.99);
}

TEST_CASE("LabeledDataset::validate catches broken invariants")
{
    LabeledDataset d;
    d.class_count = 2;
    d.embeddings = MatrixXd::Zero(3, 2);
    d.noisy_labels = {0, 1, 1};
    CHECK_NOTHROW(d.validate());

    auto bad = d;
    bad.noisy_labels[1] = 2;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);

    bad = d;
    bad.embeddings(0, 0) = std::nan("");
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);

    bad = d;
    bad.true_labels = std::vector<Label>{0, 1};
    CHECK_THROWS_AS(bad.validate(), DimensionMismatch);

    bad = d;
    bad.noisy_labels.pop_back();
    CHECK_THROWS_AS(bad.validate(), DimensionMismatch);

    const auto sets = d.indices_by_label();
    CHECK(sets[0] == std::vector<Index>{0});
    CHECK(sets[1] == std::vector<Index>{1, 2});
}
