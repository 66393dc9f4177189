#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "predlab/dynamics.hpp"
#include "predlab/observables.hpp"

namespace predlab {

/// Ordered delay vectors y_i in R^k. A series may be split into segments (for
/// example two independent orbits); the last vector of a segment has no
/// successor.
class DelaySeries {
 public:
  /// Sliding windows of length k over one measurement sequence.
  /// Throws std::invalid_argument if k == 0 or measurements.size() < k.
  DelaySeries(std::span<const double> measurements, std::size_t k);

  /// Windows over each segment separately; successors never cross segments.
  static DelaySeries from_segments(const std::vector<std::vector<double>>& segments, std::size_t k);

  /// Arbitrary vectors (row-major, k columns) treated as one segment, so
  /// y_{i+1} is the successor of y_i. The overlap structure is not required.
  static DelaySeries from_vectors(std::vector<double> flat, std::size_t k);

  std::size_t k() const { return k_; }
  std::size_t size() const { return data_.size() / k_; }
  std::size_t source_len() const { return source_len_; }

  std::span<const double> operator[](std::size_t i) const { return {data_.data() + i * k_, k_}; }
  std::span<const double> data() const { return data_; }

  bool has_successor(std::size_t i) const;

  /// Number of segments and the vector index where each one begins.
  const std::vector<std::size_t>& segment_starts() const { return segment_starts_; }

  /// Copy with c added to every vector.
  DelaySeries translated(std::span<const double> c) const;

 private:
  DelaySeries() = default;

  std::size_t k_ = 1;
  std::size_t source_len_ = 0;
  std::vector<double> data_;
  std::vector<std::size_t> segment_starts_;
  std::vector<unsigned char> is_last_;  // 1 where a segment ends
};

DelaySeries delay_series(std::span<const double> measurements, std::size_t k);

/// (h(x), h(Tx), ..., h(T^{k-1}x)). Throws std::invalid_argument if k == 0 or
/// the observable's ambient dimension does not match the system.
std::vector<double> delay_map(const Observable& h, std::size_t k, const SystemConfig& cfg,
                              const State& x);

/// h along the orbit of x0: n values after `burn_in` discarded iterates.
std::vector<double> measure_orbit(const Observable& h, const SystemConfig& cfg, const State& x0,
                                  std::size_t n, std::size_t burn_in = 0);

/// Ambient coordinates along an orbit, row-major with ambient_dim(cfg.id)
/// columns. Lets several observables share one simulation.
std::vector<double> orbit_coordinates(const SystemConfig& cfg, const State& x0, std::size_t n,
                                      std::size_t burn_in = 0);

std::vector<double> apply_observable(const Observable& h, std::span<const double> coords);

/// Header `i,y0,...,y{k-1}`, one row per vector.
void write_series_csv(std::ostream& out, const DelaySeries& series);

}  // namespace predlab
