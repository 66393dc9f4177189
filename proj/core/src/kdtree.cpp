#include "predlab/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace predlab {

KdTree::KdTree(const Input& in)
    : dim_(in.dim), pdim_(in.payload_dim), leaf_size_(std::max<std::size_t>(1, in.leaf_size)),
      weighted_(!in.weights.empty()) {
  if (dim_ == 0) throw std::invalid_argument("KdTree: dim must be >= 1");
  if (in.points.size() % dim_ != 0) throw std::invalid_argument("KdTree: ragged point data");
  const std::size_t n = in.points.size() / dim_;
  if (n == 0) throw std::invalid_argument("KdTree: no points");
  if (!in.ids.empty() && in.ids.size() != n) throw std::invalid_argument("KdTree: ids size mismatch");
  if (weighted_ && in.weights.size() != n) throw std::invalid_argument("KdTree: weights size mismatch");
  if (in.payload.size() != n * pdim_) throw std::invalid_argument("KdTree: payload size mismatch");

  center_.assign(pdim_, 0.0);
  if (pdim_ > 0) {
    std::vector<long double> acc(pdim_, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < pdim_; ++c) acc[c] += in.payload[i * pdim_ + c];
    }
    for (std::size_t c = 0; c < pdim_; ++c) center_[c] = static_cast<double>(acc[c] / n);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  nodes_.reserve(2 * (n / leaf_size_ + 1));
  build(order, 0, n, in.points);

  pts_.resize(n * dim_);
  ids_.resize(n);
  if (weighted_) w_.resize(n);
  pay_.resize(n * pdim_);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t src = order[pos];
    std::copy_n(in.points.begin() + static_cast<std::ptrdiff_t>(src * dim_), dim_,
                pts_.begin() + static_cast<std::ptrdiff_t>(pos * dim_));
    ids_[pos] = in.ids.empty() ? src : in.ids[src];
    if (weighted_) {
      if (!(in.weights[src] >= 0.0)) throw std::invalid_argument("KdTree: negative weight");
      w_[pos] = in.weights[src];
    }
    for (std::size_t c = 0; c < pdim_; ++c) pay_[pos * pdim_ + c] = in.payload[src * pdim_ + c] - center_[c];
  }

  // Bounding boxes and aggregates, children before parents (nodes were
  // appended in preorder, so a reverse sweep works).
  const std::size_t m = nodes_.size();
  lo_.assign(m * dim_, std::numeric_limits<double>::infinity());
  hi_.assign(m * dim_, -std::numeric_limits<double>::infinity());
  wsum_.assign(m, 0.0L);
  psum_.assign(m * pdim_, 0.0L);
  psq_.assign(m, 0.0L);
  for (std::size_t j = m; j-- > 0;) {
    const Node& nd = nodes_[j];
    double* lo = &lo_[j * dim_];
    double* hi = &hi_[j * dim_];
    if (nd.left < 0) {
      for (std::size_t pos = nd.begin; pos < nd.end; ++pos) {
        for (std::size_t c = 0; c < dim_; ++c) {
          lo[c] = std::min(lo[c], pts_[pos * dim_ + c]);
          hi[c] = std::max(hi[c], pts_[pos * dim_ + c]);
        }
        wsum_[j] += weighted_ ? w_[pos] : 1.0;
        long double sq = 0.0L;
        for (std::size_t c = 0; c < pdim_; ++c) {
          const long double v = pay_[pos * pdim_ + c];
          psum_[j * pdim_ + c] += v;
          sq += v * v;
        }
        psq_[j] += sq;
      }
    } else {
      for (int child : {nd.left, nd.right}) {
        const auto k = static_cast<std::size_t>(child);
        for (std::size_t c = 0; c < dim_; ++c) {
          lo[c] = std::min(lo[c], lo_[k * dim_ + c]);
          hi[c] = std::max(hi[c], hi_[k * dim_ + c]);
        }
        wsum_[j] += wsum_[k];
        for (std::size_t c = 0; c < pdim_; ++c) psum_[j * pdim_ + c] += psum_[k * pdim_ + c];
        psq_[j] += psq_[k];
      }
    }
  }
}

int KdTree::build(std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                  std::span<const double> points) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= leaf_size_) return id;

  std::size_t axis = 0;
  double widest = -1.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = points[order[i] * dim_ + c];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      axis = c;
    }
  }
  // All points coincide: splitting further gains nothing.
  if (widest <= 0.0) return id;

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(begin),
                   order.begin() + static_cast<std::ptrdiff_t>(mid),
                   order.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     return points[a * dim_ + axis] < points[b * dim_ + axis];
                   });
  const int left = build(order, begin, mid, points);
  const int right = build(order, mid, end, points);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double KdTree::min_dist2(int node, std::span<const double> q) const {
  const double* lo = &lo_[static_cast<std::size_t>(node) * dim_];
  const double* hi = &hi_[static_cast<std::size_t>(node) * dim_];
  double d2 = 0.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    double d = 0.0;
    if (q[c] < lo[c]) {
      d = lo[c] - q[c];
    } else if (q[c] > hi[c]) {
      d = q[c] - hi[c];
    }
    d2 += d * d;
  }
  return d2;
}

double KdTree::max_dist2(int node, std::span<const double> q) const {
  const double* lo = &lo_[static_cast<std::size_t>(node) * dim_];
  const double* hi = &hi_[static_cast<std::size_t>(node) * dim_];
  double d2 = 0.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    const double d = std::max(std::fabs(q[c] - lo[c]), std::fabs(hi[c] - q[c]));
    d2 += d * d;
  }
  return d2;
}

double KdTree::point_dist2(std::size_t pos, std::span<const double> q) const {
  double d2 = 0.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    const double d = pts_[pos * dim_ + c] - q[c];
    d2 += d * d;
  }
  return d2;
}

// Floating-point subtraction, squaring and summation are monotone, so the box
// bounds order exactly like the point distances they bound and both the
// pruning and the whole-subtree acceptance agree with a brute-force scan.
template <class Full, class Point>
void KdTree::walk(int node, std::span<const double> q, double eps2, Full&& full,
                  Point&& point) const {
  if (min_dist2(node, q) >= eps2) return;
  if (max_dist2(node, q) < eps2) {
    full(node);
    return;
  }
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  if (nd.left < 0) {
    for (std::size_t pos = nd.begin; pos < nd.end; ++pos) {
      if (point_dist2(pos, q) < eps2) point(pos);
    }
    return;
  }
  walk(nd.left, q, eps2, full, point);
  walk(nd.right, q, eps2, full, point);
}

void KdTree::check_query(std::span<const double> q, double eps) const {
  if (q.size() != dim_) throw std::invalid_argument("KdTree: query has the wrong dimension");
  if (!(eps > 0.0)) throw std::invalid_argument("KdTree: eps must be > 0");
}

std::vector<std::size_t> KdTree::radius_ids(std::span<const double> q, double eps) const {
  check_query(q, eps);
  std::vector<std::size_t> out;
  walk(
      0, q, eps * eps,
      [&](int node) {
        const Node& nd = nodes_[static_cast<std::size_t>(node)];
        out.insert(out.end(), ids_.begin() + static_cast<std::ptrdiff_t>(nd.begin),
                   ids_.begin() + static_cast<std::ptrdiff_t>(nd.end));
      },
      [&](std::size_t pos) { out.push_back(ids_[pos]); });
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t KdTree::radius_count(std::span<const double> q, double eps) const {
  check_query(q, eps);
  std::size_t count = 0;
  walk(
      0, q, eps * eps,
      [&](int node) {
        const Node& nd = nodes_[static_cast<std::size_t>(node)];
        count += nd.end - nd.begin;
      },
      [&](std::size_t) { ++count; });
  return count;
}

double KdTree::ball_weight(std::span<const double> q, double eps) const {
  check_query(q, eps);
  long double w = 0.0L;
  walk(
      0, q, eps * eps, [&](int node) { w += wsum_[static_cast<std::size_t>(node)]; },
      [&](std::size_t pos) { w += weighted_ ? w_[pos] : 1.0; });
  return static_cast<double>(w);
}

BallMoments KdTree::ball_moments(std::span<const double> q, double eps) const {
  check_query(q, eps);
  BallMoments out;
  std::vector<long double> s1(pdim_, 0.0L);
  long double s2 = 0.0L;
  long double w = 0.0L;
  std::size_t count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;  // permuted positions
  walk(
      0, q, eps * eps,
      [&](int node) {
        const auto j = static_cast<std::size_t>(node);
        const Node& nd = nodes_[j];
        count += nd.end - nd.begin;
        w += wsum_[j];
        for (std::size_t c = 0; c < pdim_; ++c) s1[c] += psum_[j * pdim_ + c];
        s2 += psq_[j];
        ranges.emplace_back(nd.begin, nd.end);
      },
      [&](std::size_t pos) {
        ++count;
        w += weighted_ ? w_[pos] : 1.0;
        long double sq = 0.0L;
        for (std::size_t c = 0; c < pdim_; ++c) {
          const long double v = pay_[pos * pdim_ + c];
          s1[c] += v;
          sq += v * v;
        }
        s2 += sq;
        ranges.emplace_back(pos, pos + 1);
      });
  out.count = count;
  out.weight = static_cast<double>(w);
  if (count == 0 || pdim_ == 0) return out;

  out.mean.assign(pdim_, 0.0);
  if (count <= kExactMomentLimit) {
    std::vector<double> m(pdim_, 0.0);
    for (auto [b, e] : ranges) {
      for (std::size_t pos = b; pos < e; ++pos) {
        for (std::size_t c = 0; c < pdim_; ++c) m[c] += pay_[pos * pdim_ + c];
      }
    }
    for (auto& v : m) v /= static_cast<double>(count);
    double ss = 0.0;
    for (auto [b, e] : ranges) {
      for (std::size_t pos = b; pos < e; ++pos) {
        for (std::size_t c = 0; c < pdim_; ++c) {
          const double d = pay_[pos * pdim_ + c] - m[c];
          ss += d * d;
        }
      }
    }
    for (std::size_t c = 0; c < pdim_; ++c) out.mean[c] = center_[c] + m[c];
    out.variance = ss / static_cast<double>(count);
    return out;
  }

  const long double n = static_cast<long double>(count);
  long double mean_sq = 0.0L;
  for (std::size_t c = 0; c < pdim_; ++c) {
    const long double m = s1[c] / n;
    out.mean[c] = static_cast<double>(center_[c] + m);
    mean_sq += m * m;
  }
  out.variance = std::max(0.0, static_cast<double>(s2 / n - mean_sq));
  return out;
}

}  // namespace predlab
