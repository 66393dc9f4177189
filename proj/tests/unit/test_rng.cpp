#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "predlab/rng.hpp"

using predlab::CounterRng;

TEST(CounterRng, DeterministicAndStreamSeparated) {
  CounterRng a(1, "x"), b(1, "x"), c(1, "y"), d(2, "x");
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(va, d());
  }
  CounterRng e(1, "x");
  EXPECT_EQ(e.at(57), CounterRng(1, "x").at(57));
  for (int i = 0; i < 57; ++i) e();
  EXPECT_EQ(e(), CounterRng(1, "x").at(57));
  EXPECT_EQ(e.position(), 58u);
}

TEST(CounterRng, UniformRanges) {
  CounterRng r(9, "u");
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);

  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[r.below(7)];
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_EQ(r.below(1), 0u);
}
