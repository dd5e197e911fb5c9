#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sojourn/philox.hpp"

using namespace sojourn::rng;

// Known-answer vectors from the Random123 distribution (philox4x32_10).
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, EngineIsReplayable) {
  PhiloxEngine a(42, 1, 2, 3), b(42, 1, 2, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
  PhiloxEngine c(42, 1, 2, 3);
  const auto first = c();
  PhiloxEngine d(42, 1, 2, 3);
  EXPECT_EQ(d(), first);
}

TEST(Philox, EngineMatchesBlockFunction) {
  PhiloxEngine e(0x0000000100000002ull, 7, 8, 9);
  const Counter block = philox4x32({0, 7, 8, 9}, {0x00000002, 0x00000001});
  for (int i = 0; i < 4; ++i) EXPECT_EQ(e(), block[i]);
  const Counter next = philox4x32({1, 7, 8, 9}, {0x00000002, 0x00000001});
  EXPECT_EQ(e(), next[0]);
}

TEST(Philox, StreamsDiffer) {
  PhiloxEngine a(1, 0, 0, 0), b(1, 1, 0, 0), c(1, 0, 1, 0), d(1, 0, 0, 1), e(2, 0, 0, 0);
  const auto x = a();
  EXPECT_NE(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  EXPECT_NE(x, e());
}

TEST(Philox, UniformMoments) {
  PhiloxEngine e(9, 0, 0, 0);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0, lag = 0.0, prev = 0.5;
  for (int i = 0; i < n; ++i) {
    const double u = e.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
    lag += (u - 0.5) * (prev - 0.5);
    prev = u;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum2 / n - mean * mean, 1.0 / 12.0, 2e-3);
  EXPECT_NEAR(lag / n * 12.0, 0.0, 4.0 / std::sqrt(n));
}

TEST(Philox, WorksWithStdDistributions) {
  PhiloxEngine e(3, 0, 0, 0);
  std::poisson_distribution<int> pois(50.0);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) sum += pois(e);
  EXPECT_NEAR(sum / 10000.0, 50.0, 4.0 * std::sqrt(50.0 / 10000.0));
}
