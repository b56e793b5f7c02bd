#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedloc/se3.hpp"

namespace fedloc {

struct TimedPose {
  double t = 0.0;
  Pose pose;
};

/// Time-ordered poses expressed in a single frame.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(FrameId frame) : frame_(std::move(frame)) {}
  Trajectory(FrameId frame, std::vector<TimedPose> samples);

  /// Throws Error if `t` does not strictly increase or is not finite.
  void push_back(double t, const Pose& pose);

  const FrameId& frame() const { return frame_; }
  const std::vector<TimedPose>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Pose& pose(std::size_t i) const { return samples_[i].pose; }

  std::vector<Vec3> positions() const;

 private:
  FrameId frame_;
  std::vector<TimedPose> samples_;
};

/// Rigid transform T minimizing sum |ref_i - T est_i|^2 (no scale).
/// Throws Error("insufficient correspondences") for fewer than three pairs or
/// mismatched lengths, DegenerateTrajectory for collinear input.
Pose align_points(std::span<const Vec3> ref, std::span<const Vec3> est);
Pose align_rigid(const Trajectory& ref, const Trajectory& est);

/// Position RMSE after applying `alignment` to est.
double aligned_rmse(std::span<const Vec3> ref, std::span<const Vec3> est, const Pose& alignment);

double ate_points(std::span<const Vec3> ref, std::span<const Vec3> est);
double ate(const Trajectory& ref, const Trajectory& est);

struct RelativePoseError {
  double translation = 0.0;  // m, RMSE
  double rotation = 0.0;     // rad, RMSE
};

/// Throws Error("insufficient samples") unless both trajectories have the
/// same length of at least delta + 1.
RelativePoseError rpe(const Trajectory& ref, const Trajectory& est, std::size_t delta);

}  // namespace fedloc
