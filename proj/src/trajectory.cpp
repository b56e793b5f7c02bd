#include "fedloc/trajectory.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "fedloc/error.hpp"

namespace fedloc {

namespace {

// Second singular value of the cross-covariance relative to the first; below
// this the rotation about the dominant axis is unconstrained.
constexpr double kDegenerateRatio = 1e-9;

void check_matched(const Trajectory& ref, const Trajectory& est) {
  if (ref.size() != est.size() || ref.size() < 3) throw Error("insufficient correspondences");
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (std::abs(ref.samples()[i].t - est.samples()[i].t) > 1e-9) {
      throw Error("timestamp mismatch at index " + std::to_string(i));
    }
  }
}

}  // namespace

Trajectory::Trajectory(FrameId frame, std::vector<TimedPose> samples) : frame_(std::move(frame)) {
  samples_.reserve(samples.size());
  for (const TimedPose& s : samples) push_back(s.t, s.pose);
}

void Trajectory::push_back(double t, const Pose& pose) {
  if (!std::isfinite(t)) throw Error("non-finite timestamp");
  if (!samples_.empty() && !(t > samples_.back().t)) throw Error("timestamps must strictly increase");
  samples_.push_back({t, pose});
}

std::vector<Vec3> Trajectory::positions() const {
  std::vector<Vec3> out;
  out.reserve(samples_.size());
  for (const TimedPose& s : samples_) out.push_back(s.pose.translation());
  return out;
}

Pose align_points(std::span<const Vec3> ref, std::span<const Vec3> est) {
  if (ref.size() != est.size() || ref.size() < 3) throw Error("insufficient correspondences");

  Vec3 ref_mean = Vec3::Zero();
  Vec3 est_mean = Vec3::Zero();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref_mean += ref[i];
    est_mean += est[i];
  }
  const double n = static_cast<double>(ref.size());
  ref_mean /= n;
  est_mean /= n;

  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    cov += (est[i] - est_mean) * (ref[i] - ref_mean).transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= kDegenerateRatio * sv[0]) throw DegenerateTrajectory();

  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Mat3 r = v * d * u.transpose();
  return Pose(r, ref_mean - r * est_mean);
}

Pose align_rigid(const Trajectory& ref, const Trajectory& est) {
  check_matched(ref, est);
  const auto r = ref.positions();
  const auto e = est.positions();
  return align_points(r, e);
}

double aligned_rmse(std::span<const Vec3> ref, std::span<const Vec3> est, const Pose& alignment) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    sum += (ref[i] - alignment.apply(est[i])).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(ref.size()));
}

double ate_points(std::span<const Vec3> ref, std::span<const Vec3> est) {
  return aligned_rmse(ref, est, align_points(ref, est));
}

double ate(const Trajectory& ref, const Trajectory& est) {
  check_matched(ref, est);
  const auto r = ref.positions();
  const auto e = est.positions();
  return ate_points(r, e);
}

RelativePoseError rpe(const Trajectory& ref, const Trajectory& est, std::size_t delta) {
  if (delta == 0 || ref.size() != est.size() || ref.size() < delta + 1) {
    throw Error("insufficient samples");
  }
  const std::size_t pairs = ref.size() - delta;
  double t_sum = 0.0;
  double r_sum = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const Pose ref_rel = ref.pose(i).inverse() * ref.pose(i + delta);
    const Pose est_rel = est.pose(i).inverse() * est.pose(i + delta);
    const Pose err = ref_rel.inverse() * est_rel;
    t_sum += err.translation().squaredNorm();
    const double a = rotation_angle(Mat3::Identity(), err.rotation());
    r_sum += a * a;
  }
  const double n = static_cast<double>(pairs);
  return {std::sqrt(t_sum / n), std::sqrt(r_sum / n)};
}

}  // namespace fedloc
