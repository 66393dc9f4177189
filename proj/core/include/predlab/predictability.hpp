#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "predlab/dynamics.hpp"
#include "predlab/embedding.hpp"
#include "predlab/kdtree.hpp"
#include "predlab/observables.hpp"

namespace predlab {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Successor statistics over one ball. `count == 0` means the ball held no
/// vector with a successor; then chi is empty and sigma is NaN.
struct ChiSigma {
  std::vector<double> chi;
  double sigma = kNaN;
  std::size_t count = 0;

  bool empty() const { return count == 0; }
};

class EmptyBallError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Indices i with a successor and |y_i - y| < eps, ascending. Brute force.
std::vector<std::size_t> neighbor_indices(const DelaySeries& series, std::span<const double> y,
                                          double eps);

/// Mean and RMS spread of {y_{i+1} : i in idx}. Order of idx does not matter.
ChiSigma chi_sigma_from_indices(const DelaySeries& series, std::span<const std::size_t> idx);

ChiSigma chi_sigma(const DelaySeries& series, std::span<const double> y, double eps);

/// Mean successor of the vectors within eps of the last vector.
/// Throws EmptyBallError when nothing in the ball has a successor.
std::vector<double> predict_next(const DelaySeries& series, double eps);

/// Tree over the vectors that have successors, carrying the successors as
/// payload. Answers the same queries as the brute-force functions.
class SuccessorIndex {
 public:
  explicit SuccessorIndex(const DelaySeries& series);

  const DelaySeries& series() const { return *series_; }

  std::vector<std::size_t> neighbor_indices(std::span<const double> y, double eps) const;
  ChiSigma chi_sigma(std::span<const double> y, double eps) const;

 private:
  const DelaySeries* series_;
  std::unique_ptr<KdTree> tree_;
};

struct LadderEntry {
  double eps = 0.0;
  std::size_t count = 0;
  std::vector<double> chi;
  double sigma = kNaN;
};

struct SigmaEstimate {
  std::vector<double> y;
  std::vector<LadderEntry> ladder;  // decreasing eps
  bool defined = false;             // some level reached min_count
  std::size_t hat_level = 0;        // ladder position of sigma_hat
  double sigma_hat = kNaN;
  bool predictable = false;
  double log_slope = kNaN;  // d log sigma / d log eps over admissible levels

  /// Sigma values of the admissible levels, largest eps first.
  std::vector<double> admissible_sigmas(std::size_t min_count) const;
};

struct ProfileOptions {
  std::vector<double> ladder;
  std::size_t min_count = 20;
  double threshold = 1e-3;
};

/// eps_j = top * 2^-j * scale for j = 0..levels-1.
std::vector<double> geometric_ladder(double scale, std::size_t levels = 8, double top = 0.2);

/// Diagonal of the bounding box of the series.
double series_diameter(const DelaySeries& series);

std::vector<double> default_ladder(const DelaySeries& series, std::size_t levels = 8,
                                   double top = 0.2);

/// Throws std::invalid_argument unless the ladder is strictly decreasing and
/// positive and min_count >= 2.
void validate_profile_options(const ProfileOptions& opt);

SigmaEstimate sigma_profile(const DelaySeries& series, std::span<const double> y,
                            const ProfileOptions& opt);
SigmaEstimate sigma_profile(const SuccessorIndex& index, std::span<const double> y,
                            const ProfileOptions& opt);

struct Quantiles {
  double q10 = kNaN;
  double q50 = kNaN;
  double q90 = kNaN;
};

/// Linear-interpolation quantiles of the finite values; NaN when none.
Quantiles quantiles(std::vector<double> values);

struct PredictabilityReport {
  std::vector<std::size_t> ref_indices;
  std::vector<SigmaEstimate> estimates;
  std::size_t n_defined = 0;
  std::size_t n_predictable = 0;
  double predictable_fraction = kNaN;  // among defined estimates
  Quantiles sigma_hat;
  double median_log_slope = kNaN;
};

/// References y = series[i] for each i in refs, processed in order.
PredictabilityReport assess_references(const SuccessorIndex& index,
                                       std::span<const std::size_t> refs,
                                       const ProfileOptions& opt);

/// `n_refs` indices drawn uniformly (with replacement) from the vectors that
/// have successors in [tail_begin, size).
std::vector<std::size_t> sample_tail_references(const DelaySeries& series, std::size_t tail_begin,
                                                std::size_t n_refs, std::uint64_t seed);

struct ReportRequest {
  std::size_t k = 1;
  std::size_t n_orbit = 100000;
  std::size_t burn_in = 0;
  std::size_t n_refs = 200;
  std::size_t ladder_levels = 8;
  double ladder_top = 0.2;
  std::size_t min_count = 20;
  double threshold = 1e-3;
  std::uint64_t seed = 1;
};

/// Simulates the orbit of x0, builds the delay series of h and assesses
/// references from the second half of the orbit.
PredictabilityReport predictability_report(const SystemConfig& cfg, const Observable& h,
                                           const State& x0, const ReportRequest& req);

/// Header `ref_idx,eps,count,sigma,chi_norm`.
void write_report_csv(std::ostream& out, const PredictabilityReport& report);

/// Restriction of an observable to a circle, c + P cos 2 pi t + Q sin 2 pi t.
struct CircleHarmonic {
  double c = 0.0;
  double P = 0.0;
  double Q = 0.0;

  double operator()(double t) const;
};

/// Reads c, P, Q off `h` composed with `embed`; throws if h is not a first
/// harmonic along the circle (checked at several angles to 1e-9).
template <class Embed>
CircleHarmonic circle_harmonic(const Observable& h, Embed&& embed);

/// Limit of sigma_eps at y = h(t0) for the delay-1 series of a circle rotation
/// by alpha: the level set of a first harmonic is the pair {t0, t1}, both
/// carry equal conditional mass, and sigma is half the successor gap.
double two_atom_sigma(const CircleHarmonic& h, double t0, double alpha);

template <class Embed>
CircleHarmonic circle_harmonic(const Observable& h, Embed&& embed) {
  auto at = [&](double t) { return h.evaluate(embed(t).view()); };
  CircleHarmonic out;
  const double a = at(0.0);
  const double b = at(0.5);
  out.c = 0.5 * (a + b);
  out.P = 0.5 * (a - b);
  out.Q = at(0.25) - out.c;
  for (double t : {0.1, 0.37, 0.61, 0.83}) {
    if (std::fabs(at(t) - out(t)) > 1e-9) {
      throw std::invalid_argument("circle_harmonic: observable is not a first harmonic on the circle");
    }
  }
  return out;
}

}  // namespace predlab
