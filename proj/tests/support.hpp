#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "fedloc/rng.hpp"
#include "fedloc/se3.hpp"

namespace fedloc::testing {

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

inline Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Pose random_pose(Rng& rng, double t_scale = 10.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> a(0.0, std::numbers::pi);
  return Pose(axis_angle(random_unit(rng), a(rng)), Vec3(u(rng), u(rng), u(rng)) * t_scale);
}

}  // namespace fedloc::testing
