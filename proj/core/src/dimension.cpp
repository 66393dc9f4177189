#include "predlab/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "predlab/kdtree.hpp"
#include "predlab/manifold.hpp"
#include "predlab/rng.hpp"

namespace predlab {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> points, std::size_t dim,
                                   std::vector<double> weights)
    : points_(std::move(points)), dim_(dim), weights_(std::move(weights)) {
  if (dim_ == 0) throw std::invalid_argument("EmpiricalMeasure: dim must be >= 1");
  if (weights_.empty() || points_.size() != weights_.size() * dim_) {
    throw std::invalid_argument("EmpiricalMeasure: need one weight per point");
  }
  for (double v : points_) {
    if (!std::isfinite(v)) throw std::invalid_argument("EmpiricalMeasure: non-finite coordinate");
  }
  long double total = 0.0L;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("EmpiricalMeasure: bad weight");
    total += w;
  }
  if (std::fabs(static_cast<double>(total) - 1.0) > 1e-12) {
    throw std::invalid_argument("EmpiricalMeasure: weights must sum to 1");
  }
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::vector<double> points, std::size_t dim) {
  if (dim == 0 || points.empty() || points.size() % dim != 0) {
    throw std::invalid_argument("EmpiricalMeasure: ragged point data");
  }
  const std::size_t n = points.size() / dim;
  return EmpiricalMeasure(std::move(points), dim, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

EmpiricalMeasure EmpiricalMeasure::scaled(double factor) const {
  std::vector<double> p = points_;
  for (auto& v : p) v *= factor;
  return EmpiricalMeasure(std::move(p), dim_, weights_);
}

EmpiricalMeasure sample_model_measure(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sample_model_measure: n must be >= 2");
  CounterRng rng(seed, "model-measure");
  std::vector<double> pts;
  pts.reserve(n * kAmbientDim);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform01() < 0.5) {
      pts.insert(pts.end(), {1.0, 0.0, 0.0, 1.0, 0.0});
    } else {
      const double a = 2.0 * std::numbers::pi * rng.uniform01();
      pts.insert(pts.end(), {-1.0, 0.0, 0.0, std::cos(a), std::sin(a)});
    }
  }
  return EmpiricalMeasure::uniform(std::move(pts), kAmbientDim);
}

EmpiricalMeasure sample_uniform_segment(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_uniform_segment: n must be >= 1");
  CounterRng rng(seed, "uniform-segment");
  std::vector<double> pts(n);
  for (auto& v : pts) v = rng.uniform01();
  return EmpiricalMeasure::uniform(std::move(pts), 1);
}

EmpiricalMeasure point_mass(std::size_t n, std::size_t dim) {
  if (n < 1) throw std::invalid_argument("point_mass: n must be >= 1");
  return EmpiricalMeasure::uniform(std::vector<double>(n * dim, 0.0), dim);
}

std::vector<double> default_dimension_window() {
  return {0x1.0p-4, 0x1.0p-5, 0x1.0p-6, 0x1.0p-7, 0x1.0p-8};
}

namespace {

void check_ladder(std::span<const double> ladder) {
  if (ladder.empty()) throw std::invalid_argument("dimension ladder is empty");
  for (std::size_t j = 0; j < ladder.size(); ++j) {
    if (!(ladder[j] > 0.0) || !std::isfinite(ladder[j])) {
      throw std::invalid_argument("dimension ladder levels must be finite and > 0");
    }
    if (j > 0 && !(ladder[j] < ladder[j - 1])) {
      throw std::invalid_argument("dimension ladder must be strictly decreasing");
    }
  }
}

struct Fit {
  double slope = kNaN;
  double intercept = kNaN;
  double r_squared = kNaN;
};

Fit least_squares(std::span<const double> xs, std::span<const double> ys) {
  Fit f;
  const std::size_t n = xs.size();
  if (n < 2) return f;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  // A flat response is fit perfectly.
  f.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return f;
}

double ratio(double num, double eps) {
  const double le = std::log(eps);
  return le == 0.0 ? kNaN : num / le;
}

void finish(DimensionEstimate& est, std::span<const double> xs, std::span<const double> ys) {
  const Fit f = least_squares(xs, ys);
  est.slope = f.slope;
  est.intercept = f.intercept;
  est.r_squared = f.r_squared;
  est.defined = std::isfinite(f.slope);
  est.estimate = f.slope;
  for (const auto& lvl : est.levels) {
    if (lvl.dropped || !std::isfinite(lvl.value)) continue;
    est.min_value = std::isnan(est.min_value) ? lvl.value : std::min(est.min_value, lvl.value);
    est.max_value = std::isnan(est.max_value) ? lvl.value : std::max(est.max_value, lvl.value);
  }
}

}  // namespace

DimensionEstimate ball_mass_dimension(const EmpiricalMeasure& mu, std::span<const double> ladder,
                                      std::size_t n_centers, std::uint64_t seed) {
  check_ladder(ladder);
  if (n_centers == 0) throw std::invalid_argument("ball_mass_dimension: n_centers must be >= 1");

  KdTree::Input in;
  in.points = mu.points();
  in.dim = mu.dim();
  in.weights = mu.weights();
  const KdTree tree(in);

  std::vector<double> cdf(mu.size());
  std::partial_sum(mu.weights().begin(), mu.weights().end(), cdf.begin());
  CounterRng rng(seed, "ball-mass-centers");
  std::vector<std::size_t> centers(n_centers);
  for (auto& c : centers) {
    const double u = rng.uniform01() * cdf.back();
    c = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    c = std::min(c, mu.size() - 1);
  }

  const std::size_t L = ladder.size();
  std::vector<double> log_mass(n_centers * L);
  DimensionEstimate est;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t j = 0; j < L; ++j) {
    DimensionLevel lvl;
    lvl.eps = ladder[j];
    double sum = 0.0;
    for (std::size_t c = 0; c < n_centers; ++c) {
      const double m = tree.ball_weight(mu.point(centers[c]), ladder[j]);
      if (!(m > 0.0)) {
        lvl.dropped = true;
        break;
      }
      log_mass[c * L + j] = std::log(m);
      sum += log_mass[c * L + j];
    }
    if (!lvl.dropped) {
      lvl.n_centers_used = n_centers;
      const double avg = sum / static_cast<double>(n_centers);
      lvl.value = ratio(avg, ladder[j]);
      xs.push_back(std::log(ladder[j]));
      ys.push_back(avg);
    }
    est.levels.push_back(lvl);
  }
  finish(est, xs, ys);

  if (xs.size() >= 2) {
    std::vector<double> pointwise;
    pointwise.reserve(n_centers);
    std::vector<double> row;
    for (std::size_t c = 0; c < n_centers; ++c) {
      row.clear();
      for (std::size_t j = 0; j < L; ++j) {
        if (!est.levels[j].dropped) row.push_back(log_mass[c * L + j]);
      }
      pointwise.push_back(least_squares(xs, row).slope);
    }
    est.pointwise = quantiles(std::move(pointwise));
  }
  return est;
}

double box_entropy(const EmpiricalMeasure& mu, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("box_entropy: eps must be > 0");
  const std::size_t n = mu.size();
  const std::size_t d = mu.dim();
  std::vector<std::int64_t> keys(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      const double cell = std::floor(mu.point(i)[c] / eps);
      if (std::fabs(cell) > 9.0e18) throw std::overflow_error("box_entropy: eps too small for the data range");
      keys[i * d + c] = static_cast<std::int64_t>(cell);
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key_less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(keys.begin() + static_cast<std::ptrdiff_t>(a * d),
                                        keys.begin() + static_cast<std::ptrdiff_t>((a + 1) * d),
                                        keys.begin() + static_cast<std::ptrdiff_t>(b * d),
                                        keys.begin() + static_cast<std::ptrdiff_t>((b + 1) * d));
  };
  std::sort(order.begin(), order.end(), key_less);

  double h = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    long double w = 0.0L;
    while (j < n && !key_less(order[i], order[j])) {
      w += mu.weights()[order[j]];
      ++j;
    }
    const double m = static_cast<double>(w);
    if (m > 0.0) h += m * std::log(m);
    i = j;
  }
  return h;
}

DimensionEstimate box_counting_idim(const EmpiricalMeasure& mu, std::span<const double> ladder) {
  check_ladder(ladder);
  DimensionEstimate est;
  std::vector<double> xs;
  std::vector<double> ys;
  for (double eps : ladder) {
    DimensionLevel lvl;
    lvl.eps = eps;
    const double h = box_entropy(mu, eps);
    lvl.value = ratio(h, eps);
    xs.push_back(std::log(eps));
    ys.push_back(h);
    est.levels.push_back(lvl);
  }
  finish(est, xs, ys);
  return est;
}

void write_dimension_csv(std::ostream& out, const DimensionEstimate& est) {
  out << "eps,value,n_centers_used\n";
  char line[96];
  for (const auto& lvl : est.levels) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%zu\n", lvl.eps, lvl.value, lvl.n_centers_used);
    out << line;
  }
  if (!out) throw std::runtime_error("write_dimension_csv: stream failure");
}

}  // namespace predlab
