#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "predlab/embedding.hpp"

using namespace predlab;

TEST(DelaySeries, Examples) {
  const std::vector<double> m{1, 2, 3, 4};
  const auto s = delay_series(m, 2);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.source_len(), 4u);
  const double expect[3][2] = {{1, 2}, {2, 3}, {3, 4}};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s[i][0], expect[i][0]);
    EXPECT_EQ(s[i][1], expect[i][1]);
  }

  const auto one = delay_series(m, 1);
  ASSERT_EQ(one.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(one[i][0], m[i]);

  const std::vector<double> c(10, 2.5);
  const auto cs = delay_series(c, 3);
  for (double v : cs.data()) EXPECT_EQ(v, 2.5);
}

TEST(DelaySeries, RejectsShortInput) {
  const std::vector<double> m{1, 2};
  EXPECT_THROW(delay_series(m, 3), std::invalid_argument);
  EXPECT_THROW(delay_series(m, 0), std::invalid_argument);
}

TEST(DelaySeries, OverlapInvariant) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  std::vector<double> m(500);
  for (auto& v : m) v = nd(gen);
  for (std::size_t k : {1u, 2u, 5u}) {
    const auto s = delay_series(m, k);
    ASSERT_EQ(s.size(), m.size() - k + 1);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      for (std::size_t j = 0; j + 1 < k; ++j) ASSERT_EQ(s[i + 1][j], s[i][j + 1]);
    }
  }
}

TEST(DelaySeries, SegmentsHaveNoCrossSuccessor) {
  const auto s = DelaySeries::from_segments({{1, 2, 3}, {10, 20, 30, 40}}, 2);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_TRUE(s.has_successor(0));
  EXPECT_FALSE(s.has_successor(1));
  EXPECT_TRUE(s.has_successor(2));
  EXPECT_FALSE(s.has_successor(4));
  EXPECT_EQ(s.segment_starts(), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(s[2][0], 10.0);
}

TEST(DelayMap, Examples) {
  SystemConfig rot;
  rot.id = SystemId::rotation;
  const Observable cosine({BaseKind::cosine_fiber, 0}, 5, 1);
  const double t0 = 0.137;
  const auto v1 = delay_map(cosine, 1, rot, CirclePoint{t0});
  ASSERT_EQ(v1.size(), 1u);
  EXPECT_NEAR(v1[0], std::cos(2 * std::numbers::pi * t0), 1e-15);

  const auto v2 = delay_map(cosine, 2, rot, CirclePoint{t0});
  EXPECT_NEAR(v2[1], std::cos(2 * std::numbers::pi * (t0 + kGoldenAlpha)), 1e-12);

  const auto c = delay_map(Observable::constant(3.0, 5), 4, rot, CirclePoint{t0});
  for (double v : c) EXPECT_EQ(v, 3.0);

  EXPECT_THROW(delay_map(cosine, 0, rot, CirclePoint{t0}), std::invalid_argument);
  SystemConfig hen;
  hen.id = SystemId::henon;
  EXPECT_THROW(delay_map(cosine, 1, hen, PlanarPoint{}), std::invalid_argument);
}

TEST(DelayMap, AgreesWithSeriesRoute) {
  SystemConfig cfg;
  cfg.id = SystemId::skew_T;
  const ProductPoint x0{make_polar(0.6, 1.0), {0.2}};
  const auto h = perturb(Observable({BaseKind::coordinate, 0}, 5, 2), 0.1, std::uint64_t{9});
  const std::size_t k = 4;
  const auto values = measure_orbit(h, cfg, x0, 3000);
  const auto series = delay_series(values, k);
  const auto states = typed_trajectory(cfg, x0, 3000);
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<std::size_t> pick(0, series.size() - 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t i = pick(gen);
    const auto direct = delay_map(h, k, cfg, states[i]);
    for (std::size_t j = 0; j < k; ++j) ASSERT_NEAR(series[i][j], direct[j], 1e-12);
  }
}

TEST(OrbitCoordinates, MatchesEmbedding) {
  SystemConfig cfg;
  cfg.id = SystemId::henon;
  const auto c = orbit_coordinates(cfg, PlanarPoint{0.1, 0.1}, 10, 5);
  ASSERT_EQ(c.size(), 20u);
  const auto tr = typed_trajectory(cfg, PlanarPoint{0.1, 0.1}, 10, 5);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(c[2 * i], tr[i].x);
    EXPECT_EQ(c[2 * i + 1], tr[i].y);
  }
  const Observable x1({BaseKind::coordinate, 0}, 2, 1);
  const auto v = apply_observable(x1, c);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(v[i], tr[i].x);
}

TEST(SeriesCsv, HeaderAndRows) {
  const std::vector<double> m{0.1, 2, 3};
  std::ostringstream out;
  write_series_csv(out, delay_series(m, 2));
  EXPECT_EQ(out.str(), "i,y0,y1\n0,0.10000000000000001,2\n1,2,3\n");
}
