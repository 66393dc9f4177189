#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "predlab/kdtree.hpp"

using namespace predlab;

namespace {

struct Cloud {
  std::vector<double> pts;
  std::vector<double> payload;
  std::vector<double> weights;
  std::size_t dim;
  std::size_t pdim;
};

Cloud make_cloud(std::size_t n, std::size_t dim, std::size_t pdim, std::uint64_t seed, bool lattice) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> grid(-4, 4);
  Cloud c{{}, {}, {}, dim, pdim};
  for (std::size_t i = 0; i < n * dim; ++i) c.pts.push_back(lattice ? grid(gen) * 0.25 : u(gen));
  for (std::size_t i = 0; i < n * pdim; ++i) c.payload.push_back(u(gen) * 3 + 10);
  for (std::size_t i = 0; i < n; ++i) c.weights.push_back(0.5 + u(gen) * 0.5);
  return c;
}

double d2(const Cloud& c, std::size_t i, std::span<const double> q) {
  double s = 0;
  for (std::size_t j = 0; j < c.dim; ++j) s += (c.pts[i * c.dim + j] - q[j]) * (c.pts[i * c.dim + j] - q[j]);
  return s;
}

}  // namespace

class KdTreeVsBrute : public ::testing::TestWithParam<std::tuple<std::size_t, bool>> {};

TEST_P(KdTreeVsBrute, SameBallContentsAndMoments) {
  const auto [dim, lattice] = GetParam();
  const std::size_t n = 3000;
  const Cloud c = make_cloud(n, dim, 2, 100 + dim, lattice);
  KdTree::Input in;
  in.points = c.pts;
  in.dim = dim;
  in.payload = c.payload;
  in.payload_dim = 2;
  in.weights = c.weights;
  in.leaf_size = 8;
  const KdTree tree(in);
  ASSERT_EQ(tree.size(), n);

  std::mt19937_64 gen(7);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t qi = pick(gen);
    const std::span<const double> q(c.pts.data() + qi * dim, dim);
    // lattice clouds put many points exactly on the sphere |x - q| = eps
    const double eps = lattice ? 0.25 * (1 + trial % 6) : 0.05 * (1 + trial % 20);
    std::vector<std::size_t> expect;
    double w = 0;
    std::vector<double> mean(2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (d2(c, i, q) < eps * eps) {
        expect.push_back(i);
        w += c.weights[i];
        mean[0] += c.payload[2 * i];
        mean[1] += c.payload[2 * i + 1];
      }
    }
    ASSERT_EQ(tree.radius_ids(q, eps), expect);
    ASSERT_EQ(tree.radius_count(q, eps), expect.size());
    ASSERT_NEAR(tree.ball_weight(q, eps), w, 1e-9);
    const auto m = tree.ball_moments(q, eps);
    ASSERT_EQ(m.count, expect.size());
    if (expect.empty()) continue;
    mean[0] /= expect.size();
    mean[1] /= expect.size();
    double var = 0;
    for (std::size_t i : expect) {
      var += std::pow(c.payload[2 * i] - mean[0], 2) + std::pow(c.payload[2 * i + 1] - mean[1], 2);
    }
    var /= expect.size();
    ASSERT_NEAR(m.mean[0], mean[0], 1e-12);
    ASSERT_NEAR(m.mean[1], mean[1], 1e-12);
    ASSERT_NEAR(m.variance, var, 1e-11);
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, KdTreeVsBrute,
                         ::testing::Combine(::testing::Values(1u, 2u, 3u, 5u), ::testing::Bool()));

TEST(KdTree, AggregatedMomentsOnLargeBalls) {
  // Balls above the exact-moment limit use node sums.
  const std::size_t n = 20000;
  const Cloud c = make_cloud(n, 2, 1, 77, false);
  KdTree::Input in;
  in.points = c.pts;
  in.dim = 2;
  in.payload = c.payload;
  in.payload_dim = 1;
  const KdTree tree(in);
  const std::vector<double> q{0.0, 0.0};
  const auto m = tree.ball_moments(q, 1.0);
  ASSERT_GT(m.count, KdTree::kExactMomentLimit);
  double mean = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d2(c, i, q) < 1.0) {
      mean += c.payload[i];
      ++count;
    }
  }
  mean /= count;
  double var = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d2(c, i, q) < 1.0) var += std::pow(c.payload[i] - mean, 2);
  }
  var /= count;
  EXPECT_EQ(m.count, count);
  EXPECT_NEAR(m.mean[0], mean, 1e-12);
  EXPECT_NEAR(m.variance, var, 1e-10);
}

TEST(KdTree, DuplicatePointsAndCustomIds) {
  std::vector<double> pts(1000, 0.5);
  std::vector<std::size_t> ids(1000);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = 5000 + i;
  KdTree::Input in;
  in.points = pts;
  in.ids = ids;
  const KdTree tree(in);
  const std::vector<double> q{0.5};
  const auto got = tree.radius_ids(q, 1e-9);
  ASSERT_EQ(got.size(), 1000u);
  EXPECT_EQ(got.front(), 5000u);
  EXPECT_EQ(tree.radius_count(std::vector<double>{0.75}, 0.25), 0u);
  EXPECT_NEAR(tree.ball_weight(q, 1.0), 1000.0, 1e-9);
}

TEST(KdTree, Validation) {
  std::vector<double> pts{0, 1, 2};
  KdTree::Input in;
  in.points = pts;
  in.dim = 2;
  EXPECT_THROW(KdTree{in}, std::invalid_argument);
  in.dim = 1;
  const KdTree tree(in);
  EXPECT_THROW(tree.radius_count(std::vector<double>{0.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(tree.radius_count(std::vector<double>{0.0, 1.0}, 1.0), std::invalid_argument);
}
