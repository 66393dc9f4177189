#include "predlab/manifold.hpp"

#include <cmath>
#include <stdexcept>

namespace predlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

PolarPoint make_polar(double r, double phi) {
  if (!(r >= 0.0) || !std::isfinite(r) || !std::isfinite(phi)) {
    throw std::invalid_argument("make_polar: need finite r >= 0 and finite phi");
  }
  return PolarPoint{r, r == 0.0 ? 0.0 : phi, false};
}

CirclePoint wrap_circle(double t) {
  if (!std::isfinite(t)) {
    throw std::invalid_argument("wrap_circle: non-finite angle");
  }
  double w = t - std::floor(t);
  // t slightly below an integer can round up to exactly 1.0
  if (w >= 1.0) w = 0.0;
  return CirclePoint{w};
}

double circle_distance(CirclePoint a, CirclePoint b) {
  const double d = std::fabs(a.t - b.t);
  return d > 0.5 ? 1.0 - d : d;
}

double wrap_angle(double phi) {
  double w = phi - kTwoPi * std::floor(phi / kTwoPi);
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double angle_offset(double phi, double center) {
  double d = wrap_angle(phi - center + std::numbers::pi) - std::numbers::pi;
  return d;
}

std::array<double, 3> embed_sphere(const PolarPoint& z) {
  if (z.at_infinity) return {0.0, 0.0, 1.0};
  const double x = z.r * std::cos(z.phi);
  const double y = z.r * std::sin(z.phi);
  const double s = z.r * z.r;
  const double denom = s + 1.0;
  return {2.0 * x / denom, 2.0 * y / denom, (s - 1.0) / denom};
}

AmbientPoint embed_ambient(const ProductPoint& p) {
  const auto sphere = embed_sphere(p.base);
  const double angle = kTwoPi * p.fiber.t;
  return AmbientPoint{{sphere[0], sphere[1], sphere[2], std::cos(angle), std::sin(angle)}};
}

double ambient_distance(const AmbientPoint& a, const AmbientPoint& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kAmbientDim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace predlab
