#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "predlab/manifold.hpp"

namespace predlab {

enum class SystemId { rotation, circle_g, spiral_f, skew_T, model_T0, henon, ikeda };

std::string_view to_string(SystemId id);
SystemId parse_system_id(std::string_view name);

/// Golden rotation number (sqrt(5) - 1) / 2.
inline constexpr double kGoldenAlpha = 0.6180339887498949;

struct SystemConfig {
  SystemId id = SystemId::spiral_f;
  double alpha = kGoldenAlpha;  // rotation angle in turns
  double kappa = 0.05;          // spiral perturbation strength
  double delta = 0.1;           // half-width of U_p and U_q
  std::map<std::string, double> map_params;

  /// Throws std::invalid_argument if kappa, delta or alpha are out of range.
  void validate() const;

  /// Named map parameter with a fallback default.
  double param(const std::string& name, double fallback) const;
};

struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
};

using State = std::variant<CirclePoint, PolarPoint, ProductPoint, PlanarPoint>;

/// Raised when an orbit leaves the finite numbers.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// ---- elementary maps -------------------------------------------------------

CirclePoint rotation_step(CirclePoint t, double alpha);

/// g(t) = t + sin^2(pi t) / 100 mod 1; unique fixed point 0.
CirclePoint g_step(CirclePoint t);

/// Radial part of the spiral map, R(r) = r + kappa r (1-r)^3 / (1 + r^4).
double R_map(double r, double kappa);

/// Angular drift profile, realised as sin^2(phi).
double theta_fn(double phi);

/// Standard C-infinity step: 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x);

/// Plateau function, identically 1 on [1/2, 3/2]. Requires r > 0.
double eta_fn(double r);

/// Angular part of the spiral map, Phi(r, phi) = phi + kappa theta(phi) + (1-r)^2 eta(r).
double Phi_map(double r, double phi, double kappa);

/// The spiral diffeomorphism of S^2. The origin and infinity are fixed.
PolarPoint f_step(const PolarPoint& z, double kappa);

/// Smooth bumps selecting h_z = g near p and h_z = R_alpha near q.
struct FiberWeights {
  double toward_g = 0.0;         // 1 on U_p, 0 off the 2*delta box around p
  double toward_rotation = 0.0;  // 1 on U_q, 0 off the 2*delta box around q
};
FiberWeights fiber_weights(const PolarPoint& z, double delta);

CirclePoint fiber_map(const PolarPoint& z, CirclePoint t, const SystemConfig& cfg);

/// T(z, t) = (f(z), h_z(t)).
ProductPoint skew_step(const ProductPoint& x, const SystemConfig& cfg);

/// The isolated fixed point p0 = (p, 0) of the model system.
inline constexpr ProductPoint kModelAtom{kFixedP, CirclePoint{0.0}};

/// Model point on the marked circle {q} x S^1.
ProductPoint model_circle_point(double t);

bool is_model_atom(const ProductPoint& x);
bool is_on_model_circle(const ProductPoint& x);

/// p0 is fixed, the marked circle is rotated by alpha. Anything else throws.
ProductPoint model_T0_step(const ProductPoint& x, double alpha);

PlanarPoint henon_step(PlanarPoint p, double a, double b);

struct IkedaParams {
  double c0 = 1.0;
  double c1 = 0.4;
  double c2 = 0.9;
  double c3 = 6.0;
};
PlanarPoint ikeda_step(PlanarPoint p, const IkedaParams& params);

// ---- system dispatch --------------------------------------------------------

/// Throws std::invalid_argument unless `x` has the state type of `cfg.id`.
void check_state_kind(const SystemConfig& cfg, const State& x);

CirclePoint advance(const SystemConfig& cfg, CirclePoint x);
PolarPoint advance(const SystemConfig& cfg, const PolarPoint& x);
ProductPoint advance(const SystemConfig& cfg, const ProductPoint& x);
PlanarPoint advance(const SystemConfig& cfg, PlanarPoint x);

State step(const SystemConfig& cfg, const State& x);

bool is_finite(const CirclePoint& x);
bool is_finite(const PolarPoint& x);
bool is_finite(const ProductPoint& x);
bool is_finite(const PlanarPoint& x);

/// Calls visit(i, x_i) for i = 0..n-1 after discarding `burn_in` iterates.
/// Throws DivergenceError carrying the absolute iterate index.
template <class S, class Visit>
void iterate_orbit(const SystemConfig& cfg, S x, std::size_t n, std::size_t burn_in,
                   Visit&& visit) {
  check_state_kind(cfg, State{x});
  std::size_t absolute = 0;
  for (; absolute < burn_in; ++absolute) {
    x = advance(cfg, x);
    if (!is_finite(x)) {
      throw DivergenceError(absolute + 1, "orbit diverged during burn-in");
    }
  }
  for (std::size_t i = 0; i < n; ++i, ++absolute) {
    visit(i, static_cast<const S&>(x));
    if (i + 1 == n) break;
    x = advance(cfg, x);
    if (!is_finite(x)) {
      throw DivergenceError(absolute + 1, "orbit diverged");
    }
  }
}

/// n states starting after `burn_in` iterates of x0. Requires n >= 1.
std::vector<State> trajectory(const SystemConfig& cfg, const State& x0, std::size_t n,
                              std::size_t burn_in = 0);

template <class S>
std::vector<S> typed_trajectory(const SystemConfig& cfg, const S& x0, std::size_t n,
                                std::size_t burn_in = 0) {
  if (n == 0) throw std::invalid_argument("trajectory: n must be >= 1");
  std::vector<S> out;
  out.reserve(n);
  iterate_orbit(cfg, x0, n, burn_in, [&](std::size_t, const S& x) { out.push_back(x); });
  return out;
}

// ---- ambient coordinates ----------------------------------------------------

/// Coordinates on which observables act: R^5 for circle, sphere and product
/// states, R^2 for planar maps.
struct StateCoordinates {
  std::array<double, kAmbientDim> values{};
  std::size_t dim = kAmbientDim;

  std::span<const double> view() const { return {values.data(), dim}; }
};

/// Ambient dimension used by observables of the given system.
std::size_t ambient_dim(SystemId id);

StateCoordinates coordinates(const CirclePoint& x);  // embedded as {q} x S^1
StateCoordinates coordinates(const PolarPoint& x);   // fiber coordinate t = 0
StateCoordinates coordinates(const ProductPoint& x);
StateCoordinates coordinates(const PlanarPoint& x);
StateCoordinates coordinates(const State& x);

}  // namespace predlab
