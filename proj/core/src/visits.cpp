#include "predlab/visits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace predlab {

Region region_of(const PolarPoint& z, double delta) {
  if (z.at_infinity || std::fabs(z.r - 1.0) >= delta) return Region::none;
  const double w = wrap_angle(z.phi);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (w < delta || w > kTwoPi - delta) return Region::near_p;
  if (std::fabs(w - std::numbers::pi) < delta) return Region::near_q;
  return Region::none;
}

void VisitTracker::observe(std::size_t n, const PolarPoint& z) {
  observe_region(n, region_of(z, delta_));
}

void VisitTracker::observe_region(std::size_t n, Region r) {
  if (n == 0 || r != current_) {
    if (current_ != Region::none && n > 0) runs_.push_back({current_, run_begin_, n});
    current_ = r;
    run_begin_ = n;
  }
  if (r == Region::near_p) ++in_p_;
  if (r == Region::near_q) ++in_q_;
  seen_ = n + 1;
}

std::size_t VisitTracker::steps_in(Region r) const {
  if (r == Region::near_p) return in_p_;
  if (r == Region::near_q) return in_q_;
  return seen_ - in_p_ - in_q_;
}

std::vector<VisitRecord> VisitTracker::records() const {
  std::vector<const Run*> p_runs;
  std::vector<const Run*> q_runs;
  for (const auto& run : runs_) {
    (run.region == Region::near_p ? p_runs : q_runs).push_back(&run);
  }
  const std::size_t count = std::min(p_runs.size(), q_runs.size());
  std::vector<VisitRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    VisitRecord rec;
    rec.index = i + 1;
    rec.n_minus_p = p_runs[i]->begin;
    rec.n_plus_p = p_runs[i]->end;
    rec.n_minus_q = q_runs[i]->begin;
    rec.n_plus_q = q_runs[i]->end;
    rec.p_first = rec.n_minus_p < rec.n_minus_q;
    out.push_back(rec);
  }
  return out;
}

std::vector<VisitGap> VisitTracker::gaps() const {
  std::vector<VisitGap> out;
  if (runs_.size() < 2) return out;
  // The k-th completed run of either kind belongs to visit pair k/2 + 1.
  for (std::size_t k = 0; k + 1 < runs_.size(); ++k) {
    out.push_back({k / 2 + 1, runs_[k + 1].begin - runs_[k].end});
  }
  return out;
}

std::vector<VisitRecord> visit_statistics(std::span<const PolarPoint> traj, double delta) {
  VisitTracker tracker(delta);
  for (std::size_t n = 0; n < traj.size(); ++n) tracker.observe(n, traj[n]);
  return tracker.records();
}

}  // namespace predlab
