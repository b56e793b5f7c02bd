#pragma once

#include <span>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "fedloc/rng.hpp"

namespace fedloc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Rotation = Eigen::Matrix3d;

/// Names a coordinate frame: a service map frame, the device VIO frame, or
/// the simulation world frame.
using FrameId = std::string;

/// Rigid transform acting on column vectors: x_parent = R * x_local + t.
class Pose {
 public:
  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  Pose(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static Pose identity() { return Pose(); }
  /// Quaternion given as (w, x, y, z); it is normalized before use.
  static Pose from_quaternion(const Eigen::Quaterniond& q, const Vec3& t);
  static Pose from_matrix(const Mat4& m);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  /// Unit quaternion with w >= 0. When w == 0 the first non-zero vector
  /// component is made positive so the representation stays unique.
  Eigen::Quaterniond quaternion() const;
  Mat4 matrix() const;

  Vec3 apply(const Vec3& point) const { return rotation_ * point + translation_; }

  Pose operator*(const Pose& rhs) const;
  Pose inverse() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

Pose translate(double x, double y, double z);
Pose rot_x(double radians);
Pose rot_y(double radians);
Pose rot_z(double radians);
Mat3 axis_angle(const Vec3& axis, double radians);

/// a * b; `b` is applied first. The rotation is re-projected onto SO(3) if
/// orthonormality drift exceeds 1e-12.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// Angle of the relative rotation r1^T r2, in [0, pi].
double rotation_angle(const Rotation& r1, const Rotation& r2);
double rotation_angle(const Pose& p1, const Pose& p2);
double translation_distance(const Pose& p1, const Pose& p2);

bool is_rotation(const Mat3& m, double tol = 1e-9);
/// Nearest rotation in Frobenius norm (SVD with determinant correction).
Rotation project_to_so3(const Mat3& m);

/// Arithmetic mean of translations and chordal L2 mean of rotations.
/// Throws Error("empty input") on an empty list.
Pose chordal_mean(std::span<const Pose> poses);

struct NoiseModel {
  double sigma_t = 0.0;          // m, RMS norm of the translation offset
  double sigma_r = 0.0;          // rad
  double p_outlier = 0.0;
  double outlier_t_range = 0.0;  // m, per axis
  double outlier_r_range = 0.0;  // rad

  static NoiseModel none() { return {}; }
  /// Throws Error naming the bad field.
  void validate() const;
};

/// Perturbed pose together with the error that was injected.
struct Perturbation {
  Pose pose;
  double translation_error = 0.0;
  double rotation_error = 0.0;
  bool outlier = false;
};

/// Translation offset added in the parent frame, rotation offset applied on
/// the left (also in the parent frame). Draw count is fixed per call.
Perturbation perturb_detailed(const Pose& p, const NoiseModel& noise, Rng& rng);
Pose perturb(const Pose& p, const NoiseModel& noise, Rng& rng);

}  // namespace fedloc
