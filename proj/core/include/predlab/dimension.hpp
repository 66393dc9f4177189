#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "predlab/predictability.hpp"

namespace predlab {

/// Weighted point cloud in R^d.
class EmpiricalMeasure {
 public:
  /// Throws unless weights are non-negative, finite and sum to 1 within 1e-12
  /// and every coordinate is finite.
  EmpiricalMeasure(std::vector<double> points, std::size_t dim, std::vector<double> weights);

  /// Equal weights 1/n.
  static EmpiricalMeasure uniform(std::vector<double> points, std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }
  std::span<const double> points() const { return points_; }
  std::span<const double> weights() const { return weights_; }

  EmpiricalMeasure scaled(double factor) const;

 private:
  std::vector<double> points_;
  std::size_t dim_;
  std::vector<double> weights_;
};

/// n independent draws, each the atom p0 = (1,0,0,1,0) with probability 1/2
/// and otherwise uniform on the marked circle {q} x S^1. Requires n >= 2.
EmpiricalMeasure sample_model_measure(std::size_t n, std::uint64_t seed);

/// n uniform draws from [0, 1] in R^1.
EmpiricalMeasure sample_uniform_segment(std::size_t n, std::uint64_t seed);

/// n copies of one point of R^dim.
EmpiricalMeasure point_mass(std::size_t n, std::size_t dim);

struct DimensionLevel {
  double eps = 0.0;
  double value = kNaN;
  std::size_t n_centers_used = 0;
  bool dropped = false;
};

struct DimensionEstimate {
  std::vector<DimensionLevel> levels;  // decreasing eps
  bool defined = false;
  double estimate = kNaN;
  double slope = kNaN;
  double intercept = kNaN;
  double r_squared = kNaN;
  double min_value = kNaN;  // liminf-style reading over the window
  double max_value = kNaN;  // limsup-style reading over the window
  /// Ball-mass only: quantiles of per-center pointwise dimensions. The upper
  /// one is reported as a Hausdorff-dimension proxy.
  Quantiles pointwise;
};

/// eps = 2^-4 ... 2^-8.
std::vector<double> default_dimension_window();

/// Centers are drawn from mu. A level's value is the average of
/// log mu(B(x, eps)) / log eps; the estimate is the least-squares slope of the
/// average log mu(B(x, eps)) against log eps over the kept levels.
DimensionEstimate ball_mass_dimension(const EmpiricalMeasure& mu, std::span<const double> ladder,
                                      std::size_t n_centers, std::uint64_t seed);

/// H(eps) = sum_C mu(C) log mu(C) over cubes of the lattice (eps Z)^d; the
/// estimate is the slope of H against log eps.
DimensionEstimate box_counting_idim(const EmpiricalMeasure& mu, std::span<const double> ladder);

/// The box-counting sum at one scale.
double box_entropy(const EmpiricalMeasure& mu, double eps);

/// Header `eps,value,n_centers_used`.
void write_dimension_csv(std::ostream& out, const DimensionEstimate& est);

}  // namespace predlab
