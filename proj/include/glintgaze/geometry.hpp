#pragma once

// Geometry primitives shared by the whole pipeline. Everything here is
// header-only, templated on the scalar type, and free of side effects.
//
// Units: meters for 3D quantities, pixels for image quantities, radians for
// angles.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "glintgaze/errors.hpp"

namespace glintgaze {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

using Vector3d = Vector3<double>;
using Vector2d = Vector2<double>;

/// Half-line (or infinite line, depending on the consumer) with a unit
/// direction.
template <typename Scalar>
struct Ray {
  Vector3<Scalar> origin = Vector3<Scalar>::Zero();
  Vector3<Scalar> direction = Vector3<Scalar>::UnitZ();

  Ray() = default;
  Ray(const Vector3<Scalar>& o, const Vector3<Scalar>& d) : origin(o), direction(d.normalized()) {}

  Vector3<Scalar> at(Scalar t) const { return origin + t * direction; }
};

template <typename Scalar>
struct Sphere {
  Vector3<Scalar> center = Vector3<Scalar>::Zero();
  Scalar radius = Scalar(1);
};

/// Infinite image line through two distinct pixels.
template <typename Scalar>
struct Line2 {
  Vector2<Scalar> a;
  Vector2<Scalar> b;

  Line2(const Vector2<Scalar>& p, const Vector2<Scalar>& q) : a(p), b(q) {
    if ((b - a).norm() <= Scalar(1e-9)) {
      throw GazeError(ErrorCode::kSingularGeometry, "Line2 endpoints coincide");
    }
  }

  Vector2<Scalar> direction() const { return (b - a).normalized(); }
};

using Rayd = Ray<double>;
using Sphered = Sphere<double>;
using Line2d = Line2<double>;

/// Mirror reflection of a propagation direction about a surface normal:
/// r = d - 2 (d.n) n.
template <typename Derived1, typename Derived2>
auto reflect_direction(const Eigen::MatrixBase<Derived1>& incoming,
                       const Eigen::MatrixBase<Derived2>& normal) {
  using Scalar = typename Derived1::Scalar;
  Vector3<Scalar> out = incoming - Scalar(2) * incoming.dot(normal) * normal;
  return out;
}

/// Nearer non-negative entry parameter of a ray into a sphere, or nullopt on
/// a miss. A tangent ray returns its single root.
template <typename Scalar>
std::optional<Scalar> ray_sphere_intersect(const Ray<Scalar>& ray, const Sphere<Scalar>& sphere) {
  const Vector3<Scalar> oc = ray.origin - sphere.center;
  const Scalar b = ray.direction.dot(oc);
  const Scalar c = oc.squaredNorm() - sphere.radius * sphere.radius;
  const Scalar disc = b * b - c;
  if (disc < Scalar(0)) return std::nullopt;
  const Scalar root = std::sqrt(disc);
  // Numerically stable pair of roots of t^2 + 2 b t + c = 0.
  Scalar t0;
  Scalar t1;
  if (root == Scalar(0)) {
    t0 = t1 = -b;
  } else {
    const Scalar q = -(b + std::copysign(root, b));
    t0 = q;
    t1 = c / q;
    if (t0 > t1) std::swap(t0, t1);
  }
  if (t0 >= Scalar(0)) return t0;
  if (t1 >= Scalar(0)) return t1;
  return std::nullopt;
}

/// Perpendicular distance from a point to the infinite line through
/// `line.origin` along `line.direction`.
template <typename Scalar>
Scalar point_to_line3_distance(const Vector3<Scalar>& p, const Ray<Scalar>& line) {
  const Vector3<Scalar> v = p - line.origin;
  return (v - v.dot(line.direction) * line.direction).norm();
}

template <typename Scalar>
Scalar point_to_line2_distance(const Vector2<Scalar>& p, const Line2<Scalar>& line) {
  const Vector2<Scalar> ab = line.b - line.a;
  const Vector2<Scalar> ap = p - line.a;
  return std::abs(ab.x() * ap.y() - ab.y() * ap.x()) / ab.norm();
}

template <typename Scalar>
struct LineIntersection {
  Vector2<Scalar> point;
  Scalar condition_number;
};

inline constexpr double kMaxLineConditionNumber = 1e8;

/// Global minimizer of the summed squared distances to a set of image lines,
/// from the normal equations sum(I - d d^T) p = sum(I - d d^T) a.
template <typename Scalar>
LineIntersection<Scalar> intersect_lines2_lsq(std::span<const Line2<Scalar>> lines) {
  if (lines.size() < 2) {
    throw GazeError(ErrorCode::kInsufficientLines, "at least two lines are required");
  }
  // Work relative to the first anchor so large pixel offsets do not cost
  // precision.
  const Vector2<Scalar> anchor = lines.front().a;
  Eigen::Matrix<Scalar, 2, 2> normal = Eigen::Matrix<Scalar, 2, 2>::Zero();
  Vector2<Scalar> rhs = Vector2<Scalar>::Zero();
  for (const auto& line : lines) {
    const Vector2<Scalar> d = line.direction();
    const Eigen::Matrix<Scalar, 2, 2> proj =
        Eigen::Matrix<Scalar, 2, 2>::Identity() - d * d.transpose();
    normal += proj;
    rhs += proj * (line.a - anchor);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 2, 2>> eig(normal, Eigen::EigenvaluesOnly);
  const Scalar lo = eig.eigenvalues()(0);
  const Scalar hi = eig.eigenvalues()(1);
  const Scalar cond = lo > Scalar(0) ? hi / lo : std::numeric_limits<Scalar>::infinity();
  if (!(cond <= Scalar(kMaxLineConditionNumber))) {
    throw GazeError(ErrorCode::kSingularGeometry, "image lines are (nearly) parallel");
  }
  const Scalar det = normal(0, 0) * normal(1, 1) - normal(0, 1) * normal(1, 0);
  Vector2<Scalar> p;
  p.x() = (normal(1, 1) * rhs.x() - normal(0, 1) * rhs.y()) / det;
  p.y() = (normal(0, 0) * rhs.y() - normal(1, 0) * rhs.x()) / det;
  return {anchor + p, cond};
}

/// Angle between two vectors, robust near 0 and pi.
template <typename Derived1, typename Derived2>
typename Derived1::Scalar angle_between(const Eigen::MatrixBase<Derived1>& a,
                                        const Eigen::MatrixBase<Derived2>& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace glintgaze
