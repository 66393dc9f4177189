#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "predlab/manifold.hpp"
#include "predlab/rng.hpp"

namespace predlab {

/// Exponents of a monomial, one entry per ambient coordinate.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& e);

/// All multi-indices of total degree <= degree, graded then lexicographically
/// descending within each degree: (0,0), (1,0), (0,1), (2,0), (1,1), ...
std::vector<MultiIndex> monomial_basis(std::size_t ambient_dim, int degree);

double monomial_value(const MultiIndex& e, std::span<const double> x);

enum class BaseKind { zero, coordinate, cosine_fiber, sine_fiber };

/// Fixed function that a polynomial perturbation is added to.
struct BaseFunction {
  BaseKind kind = BaseKind::zero;
  std::size_t index = 0;  // coordinate index (0-based) for BaseKind::coordinate

  double evaluate(std::span<const double> x) const;

  /// "zero", "x1".."xN" (1-based), "cosine_fiber", "sine_fiber".
  std::string name() const;
  static BaseFunction parse(std::string_view name);

  friend bool operator==(const BaseFunction&, const BaseFunction&) = default;
};

/// h(x) = base(x) + sum_e c_e x^e over ambient coordinates.
class Observable {
 public:
  Observable(BaseFunction base, std::size_t ambient_dim, int degree_bound);

  static Observable constant(double value, std::size_t ambient_dim);

  const BaseFunction& base() const { return base_; }
  std::size_t ambient_dim() const { return dim_; }
  int degree_bound() const { return degree_; }
  const std::map<MultiIndex, double>& coefficients() const { return coeffs_; }

  /// Throws std::invalid_argument on a wrong-length index, degree above the
  /// bound, or a non-finite coefficient. A zero coefficient removes the term.
  void set_coefficient(const MultiIndex& e, double c);
  double coefficient(const MultiIndex& e) const;

  double evaluate(std::span<const double> x) const;
  double evaluate(const AmbientPoint& x) const { return evaluate(x.view()); }

  /// Euclidean norm of the coefficient vector, counting the base as one unit
  /// coefficient when it is not zero.
  double coefficient_norm() const;

  std::string serialize() const;
  static Observable parse(std::string_view text);

  friend bool operator==(const Observable& a, const Observable& b) {
    return a.base_ == b.base_ && a.dim_ == b.dim_ && a.degree_ == b.degree_ &&
           a.coeffs_ == b.coeffs_;
  }

 private:
  void rebuild_terms();

  BaseFunction base_;
  std::size_t dim_;
  int degree_;
  std::map<MultiIndex, double> coeffs_;

  struct Term {
    std::size_t offset;  // into exponents_
    double coeff;
  };
  std::vector<int> exponents_;
  std::vector<Term> terms_;
};

/// h + sum_j a_j m_j over the degree-bound monomial basis.
Observable perturb(const Observable& h, std::span<const double> amplitudes);

/// Same with a_j uniform in [-scale, scale] drawn from `rng`.
Observable perturb(const Observable& h, double scale, CounterRng& rng);
Observable perturb(const Observable& h, double scale, std::uint64_t seed);

/// 0.1 times the base observable's coefficient norm (at least 0.1).
double default_amplitude_scale(const Observable& h);

struct LipschitzSample {
  double max_quotient = 0.0;  // largest |h(x)-h(y)| / |x-y| seen
  double sup_norm = 0.0;      // largest |h(x)| seen
  std::size_t pairs = 0;
};

/// Difference quotients over random pairs drawn from `points` (row-major,
/// `ambient_dim` columns).
LipschitzSample sample_lipschitz(const Observable& h, std::span<const double> points,
                                 std::size_t n_pairs, CounterRng& rng);

}  // namespace predlab
