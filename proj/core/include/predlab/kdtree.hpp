#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace predlab {

/// Count, weight and payload moments of the points inside an open ball.
struct BallMoments {
  std::size_t count = 0;
  double weight = 0.0;
  std::vector<double> mean;  // payload mean, empty when count == 0
  double variance = 0.0;     // mean squared distance of payloads to `mean`
};

/// Static k-d tree over points in R^d with exact open-ball queries
/// (squared distance strictly below eps^2).
///
/// Every point may carry a weight and a payload vector. Nodes keep running
/// sums of both, so the weight and payload moments of a ball are assembled
/// from whole subtrees without touching their points.
class KdTree {
 public:
  struct Input {
    std::span<const double> points;     // row-major, `dim` columns
    std::size_t dim = 1;
    std::span<const std::size_t> ids;   // reported ids; empty means 0..n-1
    std::span<const double> weights;    // empty means unit weights
    std::span<const double> payload;    // row-major, `payload_dim` columns
    std::size_t payload_dim = 0;
    std::size_t leaf_size = 16;
  };

  explicit KdTree(const Input& in);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t payload_dim() const { return pdim_; }

  /// Ids of points with |x - q| < eps, ascending.
  std::vector<std::size_t> radius_ids(std::span<const double> q, double eps) const;

  std::size_t radius_count(std::span<const double> q, double eps) const;
  double ball_weight(std::span<const double> q, double eps) const;

  /// Balls holding at most this many points get their payload moments
  /// recomputed with a two-pass sum instead of the node aggregates.
  static constexpr std::size_t kExactMomentLimit = 4096;

  BallMoments ball_moments(std::span<const double> q, double eps) const;

 private:
  struct Node {
    std::size_t begin;
    std::size_t end;
    int left = -1;
    int right = -1;
  };

  int build(std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
            std::span<const double> points);
  double min_dist2(int node, std::span<const double> q) const;
  double max_dist2(int node, std::span<const double> q) const;
  double point_dist2(std::size_t pos, std::span<const double> q) const;

  // Calls full(node) for subtrees inside the ball and point(pos) for single
  // points inside the ball.
  template <class Full, class Point>
  void walk(int node, std::span<const double> q, double eps2, Full&& full, Point&& point) const;

  void check_query(std::span<const double> q, double eps) const;

  std::size_t dim_;
  std::size_t pdim_;
  std::size_t leaf_size_;
  bool weighted_;

  std::vector<double> pts_;      // permuted points
  std::vector<std::size_t> ids_; // permuted ids
  std::vector<double> w_;        // permuted weights (if weighted_)
  std::vector<double> pay_;      // permuted payload minus center_
  std::vector<double> center_;   // payload mean over all points

  std::vector<Node> nodes_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<long double> wsum_;
  std::vector<long double> psum_;
  std::vector<long double> psq_;
};

}  // namespace predlab
