#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "predlab/predictability.hpp"

using namespace predlab;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// Independent oracle: textbook mean and RMS spread over an explicit list.
struct Oracle {
  std::vector<double> chi;
  double sigma;
  std::size_t count;
};

Oracle oracle(const DelaySeries& s, std::span<const double> y, double eps) {
  const std::size_t k = s.k();
  Oracle o{std::vector<double>(k, 0.0), 0.0, 0};
  std::vector<std::size_t> in;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.has_successor(i)) continue;
    double d = 0;
    for (std::size_t j = 0; j < k; ++j) d += (s[i][j] - y[j]) * (s[i][j] - y[j]);
    if (d < eps * eps) in.push_back(i);
  }
  o.count = in.size();
  if (in.empty()) return o;
  for (std::size_t i : in) {
    for (std::size_t j = 0; j < k; ++j) o.chi[j] += s[i + 1][j];
  }
  for (auto& c : o.chi) c /= double(in.size());
  for (std::size_t i : in) {
    for (std::size_t j = 0; j < k; ++j) o.sigma += (s[i + 1][j] - o.chi[j]) * (s[i + 1][j] - o.chi[j]);
  }
  o.sigma = std::sqrt(o.sigma / double(in.size()));
  return o;
}

std::vector<double> rotation_cos(std::size_t n, double t0 = 0.1, double alpha = kGoldenAlpha) {
  std::vector<double> m(n);
  double t = t0;
  for (auto& v : m) {
    v = std::cos(kTwoPi * t);
    t += alpha;
    t -= std::floor(t);
  }
  return m;
}

std::vector<double> noisy(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<double> m(n);
  for (auto& v : m) v = nd(gen);
  return m;
}

}  // namespace

TEST(ChiSigma, TwoPointFormula) {
  // The ball around y = 0 holds indices 0 and 2; successors are 5 and 9.
  const std::vector<double> m{0.0, 5.0, 0.01, 9.0};
  const auto s = delay_series(m, 1);
  const std::vector<double> y{0.0};
  const auto cs = chi_sigma(s, y, 0.1);
  ASSERT_EQ(cs.count, 2u);
  EXPECT_EQ(cs.chi[0], 7.0);
  EXPECT_EQ(cs.sigma, 2.0);
}

TEST(ChiSigma, OpenBallAndEmptyBall) {
  const std::vector<double> m{0.0, 1.0, 0.5, 2.0};
  const auto s = delay_series(m, 1);
  const std::vector<double> y{0.0};
  // |0.5 - 0| = 0.5 is on the boundary and excluded
  EXPECT_EQ(chi_sigma(s, y, 0.5).count, 1u);
  const std::vector<double> far{100.0};
  const auto e = chi_sigma(s, far, 0.1);
  EXPECT_TRUE(e.empty());
  EXPECT_TRUE(std::isnan(e.sigma));
  // The last vector has no successor.
  EXPECT_TRUE(neighbor_indices(s, std::vector<double>{2.0}, 0.1).empty());
}

TEST(ChiSigma, MatchesOracle) {
  for (std::size_t k : {1u, 2u, 3u}) {
    const auto s = delay_series(noisy(2000, 11 + k), k);
    std::mt19937_64 gen(k);
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    for (int trial = 0; trial < 50; ++trial) {
      const auto y = s[pick(gen)];
      const double eps = 0.3 + 0.1 * (trial % 10);
      const auto o = oracle(s, y, eps);
      const auto cs = chi_sigma(s, y, eps);
      ASSERT_EQ(cs.count, o.count);
      if (o.count == 0) continue;
      for (std::size_t j = 0; j < k; ++j) ASSERT_NEAR(cs.chi[j], o.chi[j], 1e-12);
      ASSERT_NEAR(cs.sigma, o.sigma, 1e-12);
    }
  }
}

TEST(ChiSigma, PermutationInvariant) {
  const auto s = delay_series(noisy(500, 3), 2);
  std::vector<std::size_t> idx(s.size() - 1);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto a = chi_sigma_from_indices(s, idx);
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(idx.begin(), idx.end(), gen);
    const auto b = chi_sigma_from_indices(s, idx);
    EXPECT_NEAR(a.sigma, b.sigma, 1e-12);
    EXPECT_NEAR(a.chi[0], b.chi[0], 1e-12);
    EXPECT_NEAR(a.chi[1], b.chi[1], 1e-12);
  }
  const std::vector<std::size_t> bad{s.size() - 1};
  EXPECT_THROW(chi_sigma_from_indices(s, bad), std::invalid_argument);
}

TEST(ChiSigma, TranslationEquivariant) {
  const auto s = delay_series(noisy(1000, 4), 2);
  const double c = 3.25;
  const std::vector<double> shift{c, c};
  const auto t = s.translated(shift);
  for (std::size_t i : {0u, 17u, 400u}) {
    std::vector<double> y(s[i].begin(), s[i].end());
    std::vector<double> yt{y[0] + c, y[1] + c};
    const auto a = chi_sigma(s, y, 0.7);
    const auto b = chi_sigma(t, yt, 0.7);
    ASSERT_EQ(a.count, b.count);
    EXPECT_NEAR(b.chi[0], a.chi[0] + c, 1e-12);
    EXPECT_NEAR(b.chi[1], a.chi[1] + c, 1e-12);
    EXPECT_NEAR(b.sigma, a.sigma, 1e-12);
  }
}

TEST(SuccessorIndex, AgreesWithBruteForce) {
  for (std::size_t k : {1u, 2u, 4u}) {
    const auto s = delay_series(noisy(5000, 20 + k), k);
    const SuccessorIndex index(s);
    std::mt19937_64 gen(k);
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    for (int trial = 0; trial < 60; ++trial) {
      const auto y = s[pick(gen)];
      const double eps = 0.2 * (1 + trial % 8);
      ASSERT_EQ(index.neighbor_indices(y, eps), neighbor_indices(s, y, eps));
      const auto a = index.chi_sigma(y, eps);
      const auto b = chi_sigma(s, y, eps);
      ASSERT_EQ(a.count, b.count);
      if (a.empty()) continue;
      for (std::size_t j = 0; j < k; ++j) ASSERT_NEAR(a.chi[j], b.chi[j], 1e-12);
      ASSERT_NEAR(a.sigma, b.sigma, 1e-12);
    }
  }
}

TEST(SuccessorIndex, RespectsSegments) {
  const auto s = DelaySeries::from_segments({{0.0, 1.0}, {0.0, 5.0}}, 1);
  const SuccessorIndex index(s);
  const std::vector<double> y{0.0};
  EXPECT_EQ(index.neighbor_indices(y, 0.5), (std::vector<std::size_t>{0, 2}));
  const auto cs = index.chi_sigma(y, 0.5);
  EXPECT_EQ(cs.chi[0], 3.0);
  EXPECT_EQ(cs.sigma, 2.0);
}

TEST(SigmaProfile, CountsNonIncreasingDownTheLadder) {
  const auto s = delay_series(rotation_cos(20000), 2);
  const SuccessorIndex index(s);
  ProfileOptions opt;
  opt.ladder = default_ladder(s);
  for (std::size_t i : {5u, 1000u, 9999u}) {
    const auto est = sigma_profile(index, s[i], opt);
    ASSERT_EQ(est.ladder.size(), opt.ladder.size());
    for (std::size_t j = 1; j < est.ladder.size(); ++j) {
      ASSERT_LE(est.ladder[j].count, est.ladder[j - 1].count);
    }
    const auto brute = sigma_profile(s, s[i], opt);
    EXPECT_NEAR(brute.sigma_hat, est.sigma_hat, 1e-12);
    EXPECT_EQ(brute.hat_level, est.hat_level);
  }
}

TEST(SigmaProfile, LinearRecurrenceShrinksWithEps) {
  // For the delay-2 series of a rotation observed through cos, the successor is
  // a fixed linear map of the vector, so sigma is O(eps).
  const auto s = delay_series(rotation_cos(50000), 2);
  const SuccessorIndex index(s);
  ProfileOptions opt;
  opt.ladder = default_ladder(s);
  const double c = 2 * std::cos(kTwoPi * kGoldenAlpha);
  const double lip = std::sqrt(1.0 + (std::fabs(c) + 1.0) * (std::fabs(c) + 1.0));
  for (std::size_t i : {100u, 20000u, 40000u}) {
    const auto est = sigma_profile(index, s[i], opt);
    ASSERT_TRUE(est.defined);
    for (const auto& e : est.ladder) {
      if (e.count == 0) continue;
      ASSERT_LE(e.sigma, lip * e.eps);
    }
    EXPECT_NEAR(est.log_slope, 1.0, 0.2);
  }
}

TEST(SigmaProfile, IdenticalVectorsArePredictable) {
  const auto s = delay_series(std::vector<double>(100, 0.7), 2);
  ProfileOptions opt;
  opt.ladder = default_ladder(s);
  const auto est = sigma_profile(s, s[10], opt);
  ASSERT_TRUE(est.defined);
  EXPECT_EQ(est.sigma_hat, 0.0);
  EXPECT_TRUE(est.predictable);
}

TEST(SigmaProfile, UndefinedWhenNoLevelReachesMinCount) {
  const auto s = delay_series(noisy(10, 2), 1);
  ProfileOptions opt;
  opt.ladder = default_ladder(s);
  const auto est = sigma_profile(s, s[0], opt);
  EXPECT_FALSE(est.defined);
  EXPECT_FALSE(est.predictable);
  EXPECT_TRUE(std::isnan(est.sigma_hat));
}

TEST(SigmaProfile, OptionValidation) {
  const auto s = delay_series(noisy(50, 2), 1);
  ProfileOptions opt;
  opt.ladder = {0.1, 0.2};
  EXPECT_THROW(sigma_profile(s, s[0], opt), std::invalid_argument);
  opt.ladder = {0.2, 0.0};
  EXPECT_THROW(sigma_profile(s, s[0], opt), std::invalid_argument);
  opt.ladder = {0.2, 0.1};
  opt.min_count = 1;
  EXPECT_THROW(sigma_profile(s, s[0], opt), std::invalid_argument);
}

TEST(Ladder, Geometric) {
  const auto l = geometric_ladder(2.0, 4);
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0], 0.4);
  EXPECT_EQ(l[3], 0.05);
  const auto flat = default_ladder(delay_series(std::vector<double>(5, 1.0), 1), 2);
  EXPECT_EQ(flat[0], 0.2);
}

TEST(PredictNext, RotationErrorIsOrderEps) {
  const auto m = rotation_cos(30001);
  const std::vector<double> head(m.begin(), m.end() - 1);
  const auto s = delay_series(head, 2);
  for (double eps : {0.05, 0.02, 0.01}) {
    const auto p = predict_next(s, eps);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_LT(std::fabs(p[0] - head.back()), eps);
    EXPECT_LT(std::fabs(p[1] - m.back()), 4 * eps);
  }
  const auto tiny = delay_series(std::vector<double>{0.0, 1.0, 2.0}, 1);
  EXPECT_THROW(predict_next(tiny, 0.5), EmptyBallError);
}

TEST(Quantiles, LinearInterpolation) {
  const auto q = quantiles({3.0, 1.0, 2.0, kNaN, 5.0, 4.0});
  EXPECT_DOUBLE_EQ(q.q50, 3.0);
  EXPECT_DOUBLE_EQ(q.q10, 1.4);
  EXPECT_DOUBLE_EQ(q.q90, 4.6);
  EXPECT_TRUE(std::isnan(quantiles({}).q50));
}

TEST(TwoAtom, MatchesIndependentDerivationAndEmpiricalSigma) {
  // cos(2 pi t) = y has the two roots t0 and -t0; their successors under the
  // rotation are cos(2 pi (t0 + a)) and cos(2 pi (a - t0)).
  const double alpha = kGoldenAlpha;
  const Observable cosine({BaseKind::cosine_fiber, 0}, 5, 1);
  const auto ch = circle_harmonic(cosine, [](double t) { return embed_ambient({kFixedQ, {t}}); });
  EXPECT_NEAR(ch.c, 0.0, 1e-15);
  EXPECT_NEAR(ch.P, 1.0, 1e-15);
  EXPECT_NEAR(ch.Q, 0.0, 1e-15);

  const auto m = rotation_cos(200000, 0.05, alpha);
  const auto s = delay_series(m, 1);
  const SuccessorIndex index(s);
  ProfileOptions opt;
  opt.ladder = geometric_ladder(2.0, 10);
  for (double t0 : {0.1, 0.2, 0.3, 0.4}) {
    const double hand = 0.5 * std::fabs(std::cos(kTwoPi * (t0 + alpha)) - std::cos(kTwoPi * (alpha - t0)));
    EXPECT_NEAR(two_atom_sigma(ch, t0, alpha), hand, 1e-12);
    const std::vector<double> y{std::cos(kTwoPi * t0)};
    const auto est = sigma_profile(index, y, opt);
    ASSERT_TRUE(est.defined);
    EXPECT_NEAR(est.sigma_hat, hand, 0.1 * hand);
  }

  const Observable bad({BaseKind::cosine_fiber, 0}, 5, 2);
  Observable sq = bad;
  sq.set_coefficient({0, 0, 0, 2, 0}, 1.0);
  EXPECT_THROW(circle_harmonic(sq, [](double t) { return embed_ambient({kFixedQ, {t}}); }),
               std::invalid_argument);
}

TEST(Report, ConstantObservableIsFullyPredictable) {
  SystemConfig rot;
  rot.id = SystemId::rotation;
  ReportRequest req;
  req.n_orbit = 5000;
  req.n_refs = 50;
  const auto rep = predictability_report(rot, Observable::constant(2.0, 5), CirclePoint{0.1}, req);
  EXPECT_EQ(rep.n_defined, 50u);
  EXPECT_EQ(rep.predictable_fraction, 1.0);
  EXPECT_EQ(rep.sigma_hat.q90, 0.0);
}

TEST(Report, RotationThroughCosineIsNotPredictableWithOneDelay) {
  SystemConfig rot;
  rot.id = SystemId::rotation;
  ReportRequest req;
  req.n_orbit = 50000;
  req.n_refs = 100;
  const Observable cosine({BaseKind::cosine_fiber, 0}, 5, 1);
  const auto rep = predictability_report(rot, cosine, CirclePoint{0.1}, req);
  EXPECT_GT(rep.n_defined, 90u);
  EXPECT_LT(rep.predictable_fraction, 0.2);

  req.k = 2;
  const auto rep2 = predictability_report(rot, cosine, CirclePoint{0.1}, req);
  EXPECT_GT(rep2.median_log_slope, 0.5);

  std::ostringstream out;
  write_report_csv(out, rep);
  EXPECT_EQ(out.str().substr(0, 31), "ref_idx,eps,count,sigma,chi_nor");
}

TEST(Report, TailReferencesDeterministic) {
  const auto s = delay_series(noisy(1000, 1), 2);
  const auto a = sample_tail_references(s, 500, 40, 7);
  EXPECT_EQ(a, sample_tail_references(s, 500, 40, 7));
  for (std::size_t i : a) {
    EXPECT_GE(i, 500u);
    EXPECT_TRUE(s.has_successor(i));
  }
  EXPECT_THROW(sample_tail_references(s, 999, 1, 7), std::invalid_argument);
}
