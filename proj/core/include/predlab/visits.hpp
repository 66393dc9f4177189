#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "predlab/manifold.hpp"

namespace predlab {

enum class Region { none, near_p, near_q };

/// U_p = {r in (1-delta, 1+delta), phi in (-delta, delta) mod 2pi}; U_q is the
/// same box around phi = pi.
Region region_of(const PolarPoint& z, double delta);

/// The i-th visits to U_p and U_q. Iterate times are half-open: the orbit is
/// inside during [n_minus, n_plus).
struct VisitRecord {
  std::size_t index = 0;  // i >= 1
  std::size_t n_minus_p = 0;
  std::size_t n_plus_p = 0;
  std::size_t n_minus_q = 0;
  std::size_t n_plus_q = 0;
  bool p_first = true;  // whether the i-th p-visit precedes the i-th q-visit

  std::size_t duration_p() const { return n_plus_p - n_minus_p; }
  std::size_t duration_q() const { return n_plus_q - n_minus_q; }
};

/// Time outside U_p and U_q between two consecutive visits. `after_index` is
/// the record index of the visit that precedes the gap.
struct VisitGap {
  std::size_t after_index = 0;
  std::size_t length = 0;
};

/// Streaming visit bookkeeping; only completed visits are reported.
class VisitTracker {
 public:
  explicit VisitTracker(double delta) : delta_(delta) {}

  void observe(std::size_t n, const PolarPoint& z);
  void observe_region(std::size_t n, Region r);

  std::vector<VisitRecord> records() const;
  std::vector<VisitGap> gaps() const;

  std::size_t steps_in(Region r) const;
  std::size_t steps_seen() const { return seen_; }

 private:
  struct Run {
    Region region;
    std::size_t begin;
    std::size_t end;
  };

  double delta_;
  std::size_t seen_ = 0;
  std::size_t in_p_ = 0;
  std::size_t in_q_ = 0;
  Region current_ = Region::none;
  std::size_t run_begin_ = 0;
  std::vector<Run> runs_;  // completed runs inside U_p or U_q, in time order
};

std::vector<VisitRecord> visit_statistics(std::span<const PolarPoint> traj, double delta);

}  // namespace predlab
