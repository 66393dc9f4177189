#include "predlab/predictability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "predlab/rng.hpp"

namespace predlab {

namespace {

double dist2(std::span<const double> a, std::span<const double> b) {
  double d2 = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    d2 += d * d;
  }
  return d2;
}

void check_query(const DelaySeries& series, std::span<const double> y, double eps) {
  if (y.size() != series.k()) throw std::invalid_argument("reference vector has the wrong dimension");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
}

// Least-squares slope of ys against xs.
double ls_slope(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : kNaN;
}

}  // namespace

std::vector<std::size_t> neighbor_indices(const DelaySeries& series, std::span<const double> y,
                                          double eps) {
  check_query(series, y, eps);
  const double eps2 = eps * eps;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.has_successor(i) && dist2(series[i], y) < eps2) out.push_back(i);
  }
  return out;
}

ChiSigma chi_sigma_from_indices(const DelaySeries& series, std::span<const std::size_t> idx) {
  ChiSigma out;
  out.count = idx.size();
  if (idx.empty()) return out;
  const std::size_t k = series.k();
  // Sorting makes the floating-point sums independent of the caller's order.
  std::vector<std::size_t> sorted(idx.begin(), idx.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i : sorted) {
    if (!series.has_successor(i)) throw std::invalid_argument("chi_sigma: index without successor");
  }
  // Offsets from the first successor keep identical successors at exactly zero spread.
  const auto ref = series[sorted.front() + 1];
  std::vector<double> mean(k, 0.0);
  for (std::size_t i : sorted) {
    const auto v = series[i + 1];
    for (std::size_t c = 0; c < k; ++c) mean[c] += v[c] - ref[c];
  }
  const double n = static_cast<double>(sorted.size());
  for (auto& v : mean) v /= n;
  double ss = 0.0;
  for (std::size_t i : sorted) {
    const auto v = series[i + 1];
    for (std::size_t c = 0; c < k; ++c) {
      const double d = v[c] - ref[c] - mean[c];
      ss += d * d;
    }
  }
  out.chi.resize(k);
  for (std::size_t c = 0; c < k; ++c) out.chi[c] = ref[c] + mean[c];
  out.sigma = std::sqrt(ss / n);
  return out;
}

ChiSigma chi_sigma(const DelaySeries& series, std::span<const double> y, double eps) {
  const auto idx = neighbor_indices(series, y, eps);
  return chi_sigma_from_indices(series, idx);
}

std::vector<double> predict_next(const DelaySeries& series, double eps) {
  const auto y = series[series.size() - 1];
  const auto cs = chi_sigma(series, y, eps);
  if (cs.empty()) throw EmptyBallError("predict_next: no vector with a successor in the ball");
  return cs.chi;
}

SuccessorIndex::SuccessorIndex(const DelaySeries& series) : series_(&series) {
  const std::size_t k = series.k();
  std::vector<double> points;
  std::vector<double> payload;
  std::vector<std::size_t> ids;
  points.reserve(series.size() * k);
  payload.reserve(series.size() * k);
  ids.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!series.has_successor(i)) continue;
    const auto y = series[i];
    const auto s = series[i + 1];
    points.insert(points.end(), y.begin(), y.end());
    payload.insert(payload.end(), s.begin(), s.end());
    ids.push_back(i);
  }
  if (ids.empty()) throw std::invalid_argument("SuccessorIndex: no vector has a successor");
  KdTree::Input in;
  in.points = points;
  in.dim = k;
  in.ids = ids;
  in.payload = payload;
  in.payload_dim = k;
  tree_ = std::make_unique<KdTree>(in);
}

std::vector<std::size_t> SuccessorIndex::neighbor_indices(std::span<const double> y,
                                                          double eps) const {
  check_query(*series_, y, eps);
  return tree_->radius_ids(y, eps);
}

ChiSigma SuccessorIndex::chi_sigma(std::span<const double> y, double eps) const {
  check_query(*series_, y, eps);
  const BallMoments m = tree_->ball_moments(y, eps);
  ChiSigma out;
  out.count = m.count;
  if (m.count == 0) return out;
  out.chi = m.mean;
  out.sigma = std::sqrt(m.variance);
  return out;
}

std::vector<double> SigmaEstimate::admissible_sigmas(std::size_t min_count) const {
  std::vector<double> out;
  for (const auto& e : ladder) {
    if (e.count >= min_count) out.push_back(e.sigma);
  }
  return out;
}

std::vector<double> geometric_ladder(double scale, std::size_t levels, double top) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("ladder scale must be > 0");
  if (levels == 0) throw std::invalid_argument("ladder needs at least one level");
  if (!(top > 0.0)) throw std::invalid_argument("ladder top must be > 0");
  std::vector<double> out(levels);
  for (std::size_t j = 0; j < levels; ++j) out[j] = std::ldexp(top, -static_cast<int>(j)) * scale;
  return out;
}

double series_diameter(const DelaySeries& series) {
  const std::size_t k = series.k();
  std::vector<double> lo(k, std::numeric_limits<double>::infinity());
  std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto y = series[i];
    for (std::size_t c = 0; c < k; ++c) {
      lo[c] = std::min(lo[c], y[c]);
      hi[c] = std::max(hi[c], y[c]);
    }
  }
  double d2 = 0.0;
  for (std::size_t c = 0; c < k; ++c) d2 += (hi[c] - lo[c]) * (hi[c] - lo[c]);
  return std::sqrt(d2);
}

std::vector<double> default_ladder(const DelaySeries& series, std::size_t levels, double top) {
  double diam = series_diameter(series);
  // A constant series still needs a usable ladder.
  if (diam == 0.0) diam = 1.0;
  return geometric_ladder(diam, levels, top);
}

void validate_profile_options(const ProfileOptions& opt) {
  if (opt.ladder.empty()) throw std::invalid_argument("ladder is empty");
  for (std::size_t j = 0; j < opt.ladder.size(); ++j) {
    if (!(opt.ladder[j] > 0.0)) throw std::invalid_argument("ladder levels must be > 0");
    if (j > 0 && !(opt.ladder[j] < opt.ladder[j - 1])) {
      throw std::invalid_argument("ladder must be strictly decreasing");
    }
  }
  if (opt.min_count < 2) throw std::invalid_argument("min_count must be >= 2");
  if (!(opt.threshold > 0.0)) throw std::invalid_argument("threshold must be > 0");
}

namespace {

template <class Query>
SigmaEstimate profile_with(std::span<const double> y, const ProfileOptions& opt, Query&& query) {
  validate_profile_options(opt);
  SigmaEstimate est;
  est.y.assign(y.begin(), y.end());
  std::vector<double> log_eps;
  std::vector<double> log_sigma;
  for (std::size_t j = 0; j < opt.ladder.size(); ++j) {
    const ChiSigma cs = query(opt.ladder[j]);
    est.ladder.push_back({opt.ladder[j], cs.count, cs.chi, cs.sigma});
    if (cs.count >= opt.min_count) {
      est.defined = true;
      est.hat_level = j;
      est.sigma_hat = cs.sigma;
      if (cs.sigma > 0.0) {
        log_eps.push_back(std::log(opt.ladder[j]));
        log_sigma.push_back(std::log(cs.sigma));
      }
    }
  }
  if (est.defined) est.predictable = est.sigma_hat < opt.threshold;
  if (log_eps.size() >= 2) est.log_slope = ls_slope(log_eps, log_sigma);
  return est;
}

}  // namespace

SigmaEstimate sigma_profile(const DelaySeries& series, std::span<const double> y,
                            const ProfileOptions& opt) {
  return profile_with(y, opt, [&](double eps) { return chi_sigma(series, y, eps); });
}

SigmaEstimate sigma_profile(const SuccessorIndex& index, std::span<const double> y,
                            const ProfileOptions& opt) {
  return profile_with(y, opt, [&](double eps) { return index.chi_sigma(y, eps); });
}

Quantiles quantiles(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  Quantiles q;
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  q.q10 = at(0.1);
  q.q50 = at(0.5);
  q.q90 = at(0.9);
  return q;
}

PredictabilityReport assess_references(const SuccessorIndex& index,
                                       std::span<const std::size_t> refs,
                                       const ProfileOptions& opt) {
  validate_profile_options(opt);
  PredictabilityReport rep;
  std::vector<double> hats;
  std::vector<double> slopes;
  for (std::size_t i : refs) {
    if (i >= index.series().size()) throw std::out_of_range("reference index outside the series");
    rep.ref_indices.push_back(i);
    rep.estimates.push_back(sigma_profile(index, index.series()[i], opt));
    const auto& est = rep.estimates.back();
    if (est.defined) {
      ++rep.n_defined;
      if (est.predictable) ++rep.n_predictable;
      hats.push_back(est.sigma_hat);
    }
    slopes.push_back(est.log_slope);
  }
  if (rep.n_defined > 0) {
    rep.predictable_fraction =
        static_cast<double>(rep.n_predictable) / static_cast<double>(rep.n_defined);
  }
  rep.sigma_hat = quantiles(hats);
  rep.median_log_slope = quantiles(slopes).q50;
  return rep;
}

std::vector<std::size_t> sample_tail_references(const DelaySeries& series, std::size_t tail_begin,
                                                std::size_t n_refs, std::uint64_t seed) {
  std::vector<std::size_t> pool;
  for (std::size_t i = tail_begin; i < series.size(); ++i) {
    if (series.has_successor(i)) pool.push_back(i);
  }
  if (pool.empty()) throw std::invalid_argument("no reference candidates in the orbit tail");
  CounterRng rng(seed, "tail-references");
  std::vector<std::size_t> out(n_refs);
  for (auto& r : out) r = pool[rng.below(pool.size())];
  return out;
}

PredictabilityReport predictability_report(const SystemConfig& cfg, const Observable& h,
                                           const State& x0, const ReportRequest& req) {
  if (req.n_orbit < req.k + 1 || req.n_refs == 0) {
    throw std::invalid_argument("predictability_report: orbit and reference counts must be positive");
  }
  const auto values = measure_orbit(h, cfg, x0, req.n_orbit, req.burn_in);
  const DelaySeries series(values, req.k);
  const SuccessorIndex index(series);
  ProfileOptions opt;
  opt.ladder = default_ladder(series, req.ladder_levels, req.ladder_top);
  opt.min_count = req.min_count;
  opt.threshold = req.threshold;
  const auto refs = sample_tail_references(series, series.size() / 2, req.n_refs, req.seed);
  return assess_references(index, refs, opt);
}

void write_report_csv(std::ostream& out, const PredictabilityReport& report) {
  out << "ref_idx,eps,count,sigma,chi_norm\n";
  char line[160];
  for (std::size_t r = 0; r < report.estimates.size(); ++r) {
    for (const auto& e : report.estimates[r].ladder) {
      double norm = kNaN;
      if (!e.chi.empty()) {
        double s = 0.0;
        for (double v : e.chi) s += v * v;
        norm = std::sqrt(s);
      }
      std::snprintf(line, sizeof line, "%zu,%.17g,%zu,%.17g,%.17g\n", report.ref_indices[r], e.eps,
                    e.count, e.sigma, norm);
      out << line;
    }
  }
  if (!out) throw std::runtime_error("write_report_csv: stream failure");
}

double CircleHarmonic::operator()(double t) const {
  const double a = 2.0 * std::numbers::pi * t;
  return c + P * std::cos(a) + Q * std::sin(a);
}

double two_atom_sigma(const CircleHarmonic& h, double t0, double alpha) {
  const double psi = std::atan2(h.Q, h.P);
  const double t1 = wrap_circle(psi / std::numbers::pi - t0).t;
  return 0.5 * std::fabs(h(t0 + alpha) - h(t1 + alpha));
}

}  // namespace predlab
