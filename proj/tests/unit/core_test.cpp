/**
 * Copyright 2026 The biasaudit Authors
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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "biasaudit/core/hash.hpp"
#include "biasaudit/core/rng.hpp"

using namespace biasaudit;

TEST(Hash, Fnv1aMatchesPublishedVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Hash, Hash64SeparatesSeedsAndValues) {
  EXPECT_NE(hash64(1, 2), hash64(2, 1));
  EXPECT_NE(hash64(0, "a"), hash64(0, "b"));
  EXPECT_EQ(hash64(42, "dataset"), hash64(42, "dataset"));
}

TEST(Hash, Hex64IsSixteenLowercaseDigits) {
  EXPECT_EQ(hex64(0), "0000000000000000");
  EXPECT_EQ(hex64(0xdeadbeefULL), "00000000deadbeef");
}

TEST(CounterRng, SameKeySameStream) {
  CounterRng a(9), b(9);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, UniformBelowStaysInRangeAndCoversIt) {
  CounterRng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.uniform_below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(CounterRng, Uniform01InHalfOpenUnitInterval) {
  CounterRng rng(5);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(CounterRng, NormalMomentsMatchStandardNormal) {
  CounterRng rng(11);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(s2 / n - mean * mean, 1.0, 0.02);
}

TEST(CounterRng, BetaMeanMatchesClosedForm) {
  CounterRng rng(13);
  for (double a : {0.8, 1.0, 2.5}) {
    double s = 0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
      const double x = rng.beta(a, a);
      ASSERT_GE(x, 0.0);
      ASSERT_LE(x, 1.0);
      s += x;
    }
    EXPECT_NEAR(s / n, 0.5, 0.01) << "alpha " << a;
  }
  double s = 0;
  for (int i = 0; i < 50000; ++i) s += rng.beta(2.0, 6.0);
  EXPECT_NEAR(s / 50000, 0.25, 0.01);
}

TEST(CounterRng, GammaMeanEqualsShape) {
  CounterRng rng(17);
  for (double k : {0.5, 1.0, 3.0}) {
    double s = 0;
    for (int i = 0; i < 50000; ++i) s += rng.gamma(k);
    EXPECT_NEAR(s / 50000, k, 0.05 * k + 0.01);
  }
}

TEST(CounterRng, ShuffleIsPermutationAndSeedDependent) {
  std::vector<int> a(50), b(50);
  std::iota(a.begin(), a.end(), 0);
  b = a;
  CounterRng(1).shuffle(std::span<int>(a));
  CounterRng(2).shuffle(std::span<int>(b));
  EXPECT_NE(a, b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
}

TEST(CounterRng, ForkedStreamsDiffer) {
  CounterRng base(21);
  auto f1 = base.fork(1), f2 = base.fork(2);
  EXPECT_NE(f1.next_u64(), f2.next_u64());
}
