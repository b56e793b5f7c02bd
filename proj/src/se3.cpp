#include "fedloc/se3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "fedloc/error.hpp"

namespace fedloc {

namespace {

constexpr double kDriftTolerance = 1e-12;

double orthonormality_drift(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Vec3 random_unit_vector(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 v(normal(rng), normal(rng), normal(rng));
  const double n = v.norm();
  if (n < 1e-12) return Vec3::UnitX();
  return v / n;
}

}  // namespace

Pose Pose::from_quaternion(const Eigen::Quaterniond& q, const Vec3& t) {
  return Pose(q.normalized().toRotationMatrix(), t);
}

Pose Pose::from_matrix(const Mat4& m) {
  return Pose(m.block<3, 3>(0, 0), m.block<3, 1>(0, 3));
}

Eigen::Quaterniond Pose::quaternion() const {
  Eigen::Quaterniond q(rotation_);
  q.normalize();
  bool flip = q.w() < 0.0;
  if (q.w() == 0.0) {
    const Vec3 v = q.vec();
    for (int i = 0; i < 3; ++i) {
      if (v[i] != 0.0) {
        flip = v[i] < 0.0;
        break;
      }
    }
  }
  if (flip) q.coeffs() = -q.coeffs();
  return q;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = rotation_;
  m.block<3, 1>(0, 3) = translation_;
  return m;
}

Pose Pose::operator*(const Pose& rhs) const {
  Mat3 r = rotation_ * rhs.rotation_;
  if (orthonormality_drift(r) > kDriftTolerance) r = project_to_so3(r);
  return Pose(r, rotation_ * rhs.translation_ + translation_);
}

Pose Pose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return Pose(rt, -(rt * translation_));
}

Pose translate(double x, double y, double z) { return Pose(Mat3::Identity(), Vec3(x, y, z)); }

Mat3 axis_angle(const Vec3& axis, double radians) {
  return Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
}

Pose rot_x(double radians) { return Pose(axis_angle(Vec3::UnitX(), radians), Vec3::Zero()); }
Pose rot_y(double radians) { return Pose(axis_angle(Vec3::UnitY(), radians), Vec3::Zero()); }
Pose rot_z(double radians) { return Pose(axis_angle(Vec3::UnitZ(), radians), Vec3::Zero()); }

Pose compose(const Pose& a, const Pose& b) { return a * b; }
Pose inverse(const Pose& p) { return p.inverse(); }

double rotation_angle(const Rotation& r1, const Rotation& r2) {
  // atan2 keeps precision near zero, where acos of the trace does not.
  const Mat3 r = r1.transpose() * r2;
  const Vec3 s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * s.norm(), 0.5 * (r.trace() - 1.0));
}

double rotation_angle(const Pose& p1, const Pose& p2) {
  return rotation_angle(p1.rotation(), p2.rotation());
}

double translation_distance(const Pose& p1, const Pose& p2) {
  return (p1.translation() - p2.translation()).norm();
}

bool is_rotation(const Mat3& m, double tol) {
  return orthonormality_drift(m) <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Rotation project_to_so3(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return u * d * v.transpose();
}

Pose chordal_mean(std::span<const Pose> poses) {
  if (poses.empty()) throw Error("empty input");
  if (poses.size() == 1) return poses.front();
  Mat3 rsum = Mat3::Zero();
  Vec3 tsum = Vec3::Zero();
  for (const Pose& p : poses) {
    rsum += p.rotation();
    tsum += p.translation();
  }
  const double n = static_cast<double>(poses.size());
  return Pose(project_to_so3(rsum / n), tsum / n);
}

void NoiseModel::validate() const {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) throw Error(std::string("invalid noise model: ") + name);
  };
  check(sigma_t, "sigma_t");
  check(sigma_r, "sigma_r");
  check(outlier_t_range, "outlier_t_range");
  check(outlier_r_range, "outlier_r_range");
  if (!(p_outlier >= 0.0 && p_outlier <= 1.0)) throw Error("invalid noise model: p_outlier");
}

Perturbation perturb_detailed(const Pose& p, const NoiseModel& noise, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool outlier = unit(rng) < noise.p_outlier;

  std::normal_distribution<double> standard(0.0, 1.0);
  Vec3 dt;
  double angle = 0.0;
  if (outlier) {
    for (int i = 0; i < 3; ++i) dt[i] = (2.0 * unit(rng) - 1.0) * noise.outlier_t_range;
    angle = unit(rng) * noise.outlier_r_range;
  } else {
    const double per_axis = noise.sigma_t / std::sqrt(3.0);
    for (int i = 0; i < 3; ++i) dt[i] = standard(rng) * per_axis;
    angle = std::abs(standard(rng) * noise.sigma_r);
  }
  const Vec3 axis = random_unit_vector(rng);

  Perturbation out;
  out.outlier = outlier;
  out.translation_error = dt.norm();
  if (angle == 0.0) {
    out.pose = Pose(p.rotation(), p.translation() + dt);
  } else {
    Mat3 r = axis_angle(axis, angle) * p.rotation();
    if (orthonormality_drift(r) > kDriftTolerance) r = project_to_so3(r);
    out.pose = Pose(r, p.translation() + dt);
    const double wrapped = std::fmod(angle, 2.0 * std::numbers::pi);
    out.rotation_error = wrapped > std::numbers::pi ? 2.0 * std::numbers::pi - wrapped : wrapped;
  }
  return out;
}

Pose perturb(const Pose& p, const NoiseModel& noise, Rng& rng) {
  return perturb_detailed(p, noise, rng).pose;
}

}  // namespace fedloc
