#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <span>

namespace predlab {

/// Angle coordinate on R/Z, always in [0, 1).
struct CirclePoint {
  double t = 0.0;
};

/// A point of S^2 = R^2 + {inf} in polar coordinates.
///
/// `phi` is kept unwrapped (it only grows along spiral orbits) and is reduced
/// mod 2*pi when a chart value is needed. Finite points with r == 0 carry
/// phi == 0; when `at_infinity` is set, r and phi are ignored.
struct PolarPoint {
  double r = 0.0;
  double phi = 0.0;
  bool at_infinity = false;

  static PolarPoint infinity() { return PolarPoint{0.0, 0.0, true}; }
  static PolarPoint origin() { return PolarPoint{}; }

  bool is_origin() const { return !at_infinity && r == 0.0; }
};

/// Builds a finite polar point, canonicalising the angle at the origin.
PolarPoint make_polar(double r, double phi);

/// State on S^2 x S^1.
struct ProductPoint {
  PolarPoint base;
  CirclePoint fiber;
};

inline constexpr std::size_t kAmbientDim = 5;

/// Image of a ProductPoint in R^5: (x1, x2, x3) on the unit sphere via inverse
/// stereographic projection, (x4, x5) = (cos 2*pi*t, sin 2*pi*t).
struct AmbientPoint {
  std::array<double, kAmbientDim> coords{};

  std::span<const double> view() const { return coords; }
  double operator[](std::size_t i) const { return coords[i]; }
};

/// The two fixed points of the spiral map on the unit circle.
inline constexpr PolarPoint kFixedP{1.0, 0.0, false};
inline constexpr PolarPoint kFixedQ{1.0, std::numbers::pi, false};

/// Reduces t mod 1. Throws std::invalid_argument on non-finite input.
CirclePoint wrap_circle(double t);

/// Rotation-invariant arc metric on R/Z; the result lies in [0, 0.5].
double circle_distance(CirclePoint a, CirclePoint b);

/// Reduces an angle to [0, 2*pi).
double wrap_angle(double phi);

/// Signed angular offset of `phi` from `center`, reduced to [-pi, pi).
double angle_offset(double phi, double center);

AmbientPoint embed_ambient(const ProductPoint& p);

/// Sphere part only: (x1, x2, x3).
std::array<double, 3> embed_sphere(const PolarPoint& z);

double ambient_distance(const AmbientPoint& a, const AmbientPoint& b);

}  // namespace predlab
