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

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "rolt/random.hpp"

using rolt::Rng;

TEST_CASE("same seed gives the same stream")
{
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i)
    {
        CHECK(a.next_u64() == b.next_u64());
        CHECK(a.normal() == b.normal());
    }
}

TEST_CASE("mt19937_64 reference value")
{
    // The standard fixes the 10000th output of a default-seeded mt19937_64.
    Rng rng(5489u);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i)
    {
        v = rng.next_u64();
    }
    CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("uniform and normal moments")
{
    Rng rng(7);
    const int n = 200000;
    double sum = 0.0;
    double sum_sq = 0.0;
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        const double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
}

TEST_CASE("uniform_index stays in range and covers it")
{
    Rng rng(1);
    std::array<int, 7> hits{};
    for (int i = 0; i < 7000; ++i)
    {
        const auto v = rng.uniform_index(7);
        REQUIRE(v < 7);
        ++hits[v];
    }
    for (int h : hits)
    {
        CHECK(h > 850);
        CHECK(h < 1150);
    }
    CHECK_THROWS(rng.uniform_index(0));
}

TEST_CASE("categorical never picks zero-weight entries")
{
    Rng rng(3);
    const std::vector<double> w{0.0, 2.0, 0.0, 1.0};
    int ones = 0;
    for (int i = 0; i < 30000; ++i)
    {
        const auto k = rng.categorical(w);
        REQUIRE((k == 1 || k == 3));
        ones += k == 1 ? 1 : 0;
    }
    CHECK(std::abs(ones / 30000.0 - 2.0 / 3.0) < 0.01);
    CHECK_THROWS(rng.categorical(std::vector<double>{0.0, 0.0}));
    CHECK_THROWS(rng.categorical(std::vector<double>{1.0, -1.0}));
}

TEST_CASE("shuffle is a permutation")
{
    Rng rng(11);
    std::vector<int> v(100);
    std::iota(v.begin(), v.end(), 0);
    auto original = v;
    rng.shuffle(std::span<int>(v));
    CHECK(v != original);
    std::ranges::sort(v);
    CHECK(v == original);
}
