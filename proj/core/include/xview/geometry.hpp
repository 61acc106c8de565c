#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace xview {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Rigid world->camera transform: x_cam = R * x_world + t.
///
/// The world frame is x = south, y = down, z = east. The camera frame is
/// x = image right, y = image down, z = forward.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  static Pose identity() { return {}; }

  Vec3 apply(const Vec3& x_world) const { return R * x_world + t; }
  Vec3 inverse_apply(const Vec3& x_cam) const { return R.transpose() * (x_cam - t); }

  /// Camera center in world coordinates.
  Vec3 center() const { return -R.transpose() * t; }
  /// Optical axis (+z of the camera) in world coordinates.
  Vec3 forward() const { return R.row(2).transpose(); }
  /// Image-down direction (+y of the camera) in world coordinates.
  Vec3 down() const { return R.row(1).transpose(); }
  Vec3 right() const { return R.row(0).transpose(); }

  Pose inverse() const { return {R.transpose(), -R.transpose() * t}; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = R;
    m.topRightCorner<3, 1>() = t;
    return m;
  }

  static Pose from_center(const Mat3& R, const Vec3& center) { return {R, -R * center}; }

  /// Orthonormality and det(R) = 1, both within `tol`.
  bool is_valid(double tol = 1e-9) const {
    const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho < tol && std::abs(R.determinant() - 1.0) < tol && t.allFinite();
  }
};

/// Similarity transform x -> s * R * x + t.
struct Similarity {
  double s = 1.0;
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return s * (R * x) + t; }
  Vec3 inverse_apply(const Vec3& y) const { return R.transpose() * (y - t) / s; }
};

/// Rotation by `angle` radians about the unit `axis` (right-handed).
inline Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// Geodesic distance on SO(3) in radians.
inline double rotation_angle(const Mat3& a, const Mat3& b) {
  // sin from the skew part, cos from the trace: accurate near 0 where acos is not.
  const Mat3 m = a * b.transpose();
  const Vec3 w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  return std::atan2(0.5 * w.norm(), 0.5 * (m.trace() - 1.0));
}

/// Angle between two vectors in radians; both must be non-zero.
inline double vector_angle(const Vec3& a, const Vec3& b) {
  // atan2 form stays accurate near 0 and pi, unlike acos of the dot product.
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace xview
