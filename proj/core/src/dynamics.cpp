#include "predlab/dynamics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace predlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFiberStrength = 0.01;
constexpr double kModelTolerance = 1e-12;

constexpr std::array<std::string_view, 7> kSystemNames = {
    "rotation", "circle_g", "spiral_f", "skew_T", "model_T0", "henon", "ikeda"};

}  // namespace

std::string_view to_string(SystemId id) { return kSystemNames[static_cast<std::size_t>(id)]; }

SystemId parse_system_id(std::string_view name) {
  for (std::size_t i = 0; i < kSystemNames.size(); ++i) {
    if (kSystemNames[i] == name) return static_cast<SystemId>(i);
  }
  throw std::invalid_argument("unknown system: " + std::string(name));
}

void SystemConfig::validate() const {
  if (!(kappa > 0.0 && kappa <= 0.1)) {
    throw std::invalid_argument("kappa must lie in (0, 0.1]");
  }
  if (!(delta > 0.0 && delta <= 0.2)) {
    throw std::invalid_argument("delta must lie in (0, 0.2]");
  }
  if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
}

double SystemConfig::param(const std::string& name, double fallback) const {
  auto it = map_params.find(name);
  return it == map_params.end() ? fallback : it->second;
}

CirclePoint rotation_step(CirclePoint t, double alpha) { return wrap_circle(t.t + alpha); }

CirclePoint g_step(CirclePoint t) {
  const double s = std::sin(kPi * t.t);
  return wrap_circle(t.t + kFiberStrength * s * s);
}

double R_map(double r, double kappa) {
  if (!(r >= 0.0)) throw std::invalid_argument("R_map: r must be >= 0");
  const double u = 1.0 - r;
  const double r2 = r * r;
  return r + kappa * r * (u * u * u) / (1.0 + r2 * r2);
}

double theta_fn(double phi) {
  const double s = std::sin(phi);
  return s * s;
}

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

double eta_fn(double r) {
  if (!(r > 0.0)) throw std::invalid_argument("eta_fn: r must be > 0");
  const double inner = smooth_step((0.5 - r) / 0.25) * (1.0 / r);
  const double outer = smooth_step(r - 1.5) * r;
  return std::exp(-inner) * std::exp(-outer);
}

double Phi_map(double r, double phi, double kappa) {
  const double u = 1.0 - r;
  return phi + kappa * theta_fn(phi) + u * u * eta_fn(r);
}

PolarPoint f_step(const PolarPoint& z, double kappa) {
  if (z.at_infinity || z.r == 0.0) return z;
  return PolarPoint{R_map(z.r, kappa), Phi_map(z.r, z.phi, kappa), false};
}

FiberWeights fiber_weights(const PolarPoint& z, double delta) {
  if (z.at_infinity || z.r == 0.0) return {};
  const double radial = smooth_step(2.0 - std::fabs(z.r - 1.0) / delta);
  if (radial == 0.0) return {};
  const double near_p = smooth_step(2.0 - std::fabs(angle_offset(z.phi, 0.0)) / delta);
  const double near_q = smooth_step(2.0 - std::fabs(angle_offset(z.phi, kPi)) / delta);
  return {radial * near_p, radial * near_q};
}

CirclePoint fiber_map(const PolarPoint& z, CirclePoint t, const SystemConfig& cfg) {
  const FiberWeights w = fiber_weights(z, cfg.delta);
  const double s = std::sin(kPi * t.t);
  return wrap_circle(t.t + w.toward_g * kFiberStrength * s * s + w.toward_rotation * cfg.alpha);
}

ProductPoint skew_step(const ProductPoint& x, const SystemConfig& cfg) {
  return ProductPoint{f_step(x.base, cfg.kappa), fiber_map(x.base, x.fiber, cfg)};
}

ProductPoint model_circle_point(double t) { return ProductPoint{kFixedQ, wrap_circle(t)}; }

bool is_model_atom(const ProductPoint& x) {
  return !x.base.at_infinity && std::fabs(x.base.r - 1.0) <= kModelTolerance &&
         std::fabs(angle_offset(x.base.phi, 0.0)) <= kModelTolerance &&
         circle_distance(x.fiber, CirclePoint{0.0}) <= kModelTolerance;
}

bool is_on_model_circle(const ProductPoint& x) {
  return !x.base.at_infinity && std::fabs(x.base.r - 1.0) <= kModelTolerance &&
         std::fabs(angle_offset(x.base.phi, kPi)) <= kModelTolerance;
}

ProductPoint model_T0_step(const ProductPoint& x, double alpha) {
  if (is_model_atom(x)) return x;
  if (is_on_model_circle(x)) return ProductPoint{x.base, rotation_step(x.fiber, alpha)};
  throw std::invalid_argument("model_T0_step: point is neither p0 nor on the marked circle");
}

PlanarPoint henon_step(PlanarPoint p, double a, double b) {
  return PlanarPoint{1.0 - a * p.x * p.x + p.y, b * p.x};
}

PlanarPoint ikeda_step(PlanarPoint p, const IkedaParams& c) {
  const double w = c.c1 - c.c3 / (1.0 + p.x * p.x + p.y * p.y);
  const double cw = std::cos(w);
  const double sw = std::sin(w);
  return PlanarPoint{c.c0 + c.c2 * (p.x * cw - p.y * sw), c.c2 * (p.x * sw + p.y * cw)};
}

void check_state_kind(const SystemConfig& cfg, const State& x) {
  bool ok = false;
  switch (cfg.id) {
    case SystemId::rotation:
    case SystemId::circle_g:
      ok = std::holds_alternative<CirclePoint>(x);
      break;
    case SystemId::spiral_f:
      ok = std::holds_alternative<PolarPoint>(x);
      break;
    case SystemId::skew_T:
    case SystemId::model_T0:
      ok = std::holds_alternative<ProductPoint>(x);
      break;
    case SystemId::henon:
    case SystemId::ikeda:
      ok = std::holds_alternative<PlanarPoint>(x);
      break;
  }
  if (!ok) {
    throw std::invalid_argument("state type does not match system " +
                                std::string(to_string(cfg.id)));
  }
}

CirclePoint advance(const SystemConfig& cfg, CirclePoint x) {
  if (cfg.id == SystemId::rotation) return rotation_step(x, cfg.alpha);
  if (cfg.id == SystemId::circle_g) return g_step(x);
  throw std::invalid_argument("circle state used with a non-circle system");
}

PolarPoint advance(const SystemConfig& cfg, const PolarPoint& x) {
  if (cfg.id != SystemId::spiral_f) {
    throw std::invalid_argument("polar state used with a non-spiral system");
  }
  return f_step(x, cfg.kappa);
}

ProductPoint advance(const SystemConfig& cfg, const ProductPoint& x) {
  if (cfg.id == SystemId::skew_T) return skew_step(x, cfg);
  if (cfg.id == SystemId::model_T0) return model_T0_step(x, cfg.alpha);
  throw std::invalid_argument("product state used with a non-product system");
}

PlanarPoint advance(const SystemConfig& cfg, PlanarPoint x) {
  if (cfg.id == SystemId::henon) {
    return henon_step(x, cfg.param("a", 1.4), cfg.param("b", 0.3));
  }
  if (cfg.id == SystemId::ikeda) {
    IkedaParams c;
    c.c0 = cfg.param("c0", c.c0);
    c.c1 = cfg.param("c1", c.c1);
    c.c2 = cfg.param("c2", c.c2);
    c.c3 = cfg.param("c3", c.c3);
    return ikeda_step(x, c);
  }
  throw std::invalid_argument("planar state used with a non-planar system");
}

State step(const SystemConfig& cfg, const State& x) {
  check_state_kind(cfg, x);
  return std::visit([&](const auto& s) -> State { return advance(cfg, s); }, x);
}

bool is_finite(const CirclePoint& x) { return std::isfinite(x.t); }
bool is_finite(const PolarPoint& x) {
  return x.at_infinity || (std::isfinite(x.r) && std::isfinite(x.phi));
}
bool is_finite(const ProductPoint& x) { return is_finite(x.base) && is_finite(x.fiber); }
bool is_finite(const PlanarPoint& x) { return std::isfinite(x.x) && std::isfinite(x.y); }

std::vector<State> trajectory(const SystemConfig& cfg, const State& x0, std::size_t n,
                              std::size_t burn_in) {
  if (n == 0) throw std::invalid_argument("trajectory: n must be >= 1");
  std::vector<State> out;
  out.reserve(n);
  std::visit(
      [&](const auto& start) {
        using S = std::decay_t<decltype(start)>;
        iterate_orbit(cfg, start, n, burn_in,
                      [&](std::size_t, const S& x) { out.emplace_back(x); });
      },
      x0);
  return out;
}

std::size_t ambient_dim(SystemId id) {
  return (id == SystemId::henon || id == SystemId::ikeda) ? 2 : kAmbientDim;
}

StateCoordinates coordinates(const CirclePoint& x) {
  return coordinates(ProductPoint{kFixedQ, x});
}

StateCoordinates coordinates(const PolarPoint& x) {
  return coordinates(ProductPoint{x, CirclePoint{0.0}});
}

StateCoordinates coordinates(const ProductPoint& x) {
  StateCoordinates c;
  c.values = embed_ambient(x).coords;
  c.dim = kAmbientDim;
  return c;
}

StateCoordinates coordinates(const PlanarPoint& x) {
  StateCoordinates c;
  c.values[0] = x.x;
  c.values[1] = x.y;
  c.dim = 2;
  return c;
}

StateCoordinates coordinates(const State& x) {
  return std::visit([](const auto& s) { return coordinates(s); }, x);
}

}  // namespace predlab
