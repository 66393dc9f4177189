#include <benchmark/benchmark.h>

#include <random>

#include "predlab/dimension.hpp"
#include "predlab/dynamics.hpp"
#include "predlab/kdtree.hpp"
#include "predlab/predictability.hpp"

using namespace predlab;

namespace {

std::vector<double> cloud(std::size_t n, std::size_t dim) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> pts(n * dim);
  for (auto& v : pts) v = u(gen);
  return pts;
}

void BM_SkewOrbit(benchmark::State& state) {
  SystemConfig cfg;
  cfg.id = SystemId::skew_T;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    double acc = 0;
    iterate_orbit(cfg, ProductPoint{make_polar(0.5, 0.0), {0.3}}, n, 0,
                  [&](std::size_t, const ProductPoint& x) { acc += x.fiber.t; });
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SkewOrbit)->Arg(100000);

void BM_KdBuild(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pts = cloud(n, 3);
  for (auto _ : state) {
    KdTree::Input in;
    in.points = pts;
    in.dim = 3;
    KdTree tree(in);
    benchmark::DoNotOptimize(tree.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdBuild)->Arg(100000)->Arg(1000000);

void BM_BallMoments(benchmark::State& state) {
  const std::size_t n = 200000;
  const auto pts = cloud(n, 2);
  const auto payload = cloud(n, 2);
  KdTree::Input in;
  in.points = pts;
  in.dim = 2;
  in.payload = payload;
  in.payload_dim = 2;
  const KdTree tree(in);
  const double eps = static_cast<double>(state.range(0)) / 1000.0;
  std::size_t i = 0;
  for (auto _ : state) {
    const std::span<const double> q(pts.data() + 2 * (i++ % n), 2);
    benchmark::DoNotOptimize(tree.ball_moments(q, eps));
  }
}
BENCHMARK(BM_BallMoments)->Arg(10)->Arg(100)->Arg(500);

void BM_SigmaProfile(benchmark::State& state) {
  std::vector<double> m(200000);
  double t = 0.1;
  for (auto& v : m) {
    v = std::cos(2 * M_PI * t);
    t += kGoldenAlpha;
    t -= std::floor(t);
  }
  const auto series = delay_series(m, 2);
  const SuccessorIndex index(series);
  ProfileOptions opt;
  opt.ladder = default_ladder(series);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sigma_profile(index, series[(i++ * 7919) % series.size()], opt));
  }
}
BENCHMARK(BM_SigmaProfile);

void BM_BoxCounting(benchmark::State& state) {
  const auto mu = sample_model_measure(static_cast<std::size_t>(state.range(0)), 1);
  const auto window = default_dimension_window();
  for (auto _ : state) benchmark::DoNotOptimize(box_counting_idim(mu, window));
}
BENCHMARK(BM_BoxCounting)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
