#include <doctest.h>

#include <array>
#include <vector>

#include "fedloc/error.hpp"
#include "fedloc/trajectory.hpp"
#include "support.hpp"

using namespace fedloc;
using fedloc::testing::random_pose;

namespace {

Trajectory random_trajectory(Rng& rng, std::size_t n) {
  Trajectory t("ref");
  for (std::size_t i = 0; i < n; ++i) t.push_back(static_cast<double>(i), random_pose(rng, 5.0));
  return t;
}

Trajectory transformed(const Trajectory& ref, const Pose& T, FrameId frame = "est") {
  Trajectory out(std::move(frame));
  for (const auto& s : ref.samples()) out.push_back(s.t, T * s.pose);
  return out;
}

// Compass search over SE(3) minimizing the aligned RMSE; independent of the
// closed-form solver.
double brute_force_ate(const std::vector<Vec3>& ref, const std::vector<Vec3>& est) {
  auto cost = [&](const std::array<double, 6>& x) {
    const Vec3 w(x[0], x[1], x[2]);
    const double angle = w.norm();
    const Mat3 R = angle > 0 ? axis_angle(w / angle, angle) : Mat3::Identity();
    double s = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      s += (R * est[i] + Vec3(x[3], x[4], x[5]) - ref[i]).squaredNorm();
    }
    return std::sqrt(s / static_cast<double>(ref.size()));
  };
  std::array<double, 6> x{};
  double best = cost(x);
  for (double step = 0.5; step > 1e-12; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int d = 0; d < 6; ++d) {
        for (double sign : {1.0, -1.0}) {
          auto y = x;
          y[static_cast<std::size_t>(d)] += sign * step;
          const double c = cost(y);
          if (c < best) {
            best = c;
            x = y;
            improved = true;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("trajectory") {
  TEST_CASE("timestamps must increase") {
    Trajectory t("a");
    t.push_back(0.0, Pose::identity());
    CHECK_THROWS_AS(t.push_back(0.0, Pose::identity()), Error);
    CHECK_THROWS_AS(t.push_back(std::nan(""), Pose::identity()), Error);
  }

  TEST_CASE("align identity") {
    Rng rng(1);
    const auto ref = random_trajectory(rng, 6);
    const Pose T = align_rigid(ref, ref);
    CHECK((T.matrix() - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("align recovers random rigid transforms") {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
      const auto ref = random_trajectory(rng, 3 + static_cast<std::size_t>(i % 5));
      const Pose T0 = random_pose(rng, 20.0);
      const auto est = transformed(ref, T0);
      const Pose T = align_rigid(ref, est);
      // est = T0 * ref, so the alignment mapping est onto ref is inverse(T0).
      CHECK(((T * T0).matrix() - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(ate(ref, est) < 1e-9);
    }
  }

  TEST_CASE("collinear points are degenerate") {
    Trajectory ref("r");
    Trajectory est("e");
    for (int i = 0; i < 3; ++i) {
      ref.push_back(i, translate(i, 0, 0));
      est.push_back(i, translate(2.0 * i, 1, 0));
    }
    CHECK_THROWS_WITH_AS(align_rigid(ref, est), "degenerate trajectory", DegenerateTrajectory);
  }

  TEST_CASE("too few or mismatched samples") {
    Trajectory a("a");
    Trajectory b("b");
    a.push_back(0, Pose::identity());
    a.push_back(1, translate(1, 0, 0));
    b.push_back(0, Pose::identity());
    b.push_back(1, translate(1, 0, 0));
    CHECK_THROWS_AS(align_rigid(a, b), Error);
    a.push_back(2, translate(0, 1, 0));
    b.push_back(2.5, translate(0, 1, 0));
    CHECK_THROWS_AS(align_rigid(a, b), Error);
  }

  TEST_CASE("ate examples") {
    Rng rng(3);
    const auto ref = random_trajectory(rng, 8);
    CHECK(ate(ref, ref) < 1e-12);
    CHECK(ate(ref, transformed(ref, random_pose(rng))) < 1e-9);

    const std::vector<Vec3> r{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    std::vector<Vec3> e = r;
    e[0].x() += 0.3;
    const double closed_form = ate_points(r, e);
    CHECK(closed_form == doctest::Approx(brute_force_ate(r, e)).epsilon(1e-9));
    // Frozen from an independent Nelder-Mead minimization over SE(3).
    CHECK(closed_form == doctest::Approx(0.1315360207073694).epsilon(1e-9));
  }

  TEST_CASE("ate is invariant to a rigid offset of the estimate") {
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
      const auto ref = random_trajectory(rng, 6);
      Trajectory noisy("e");
      NoiseModel n;
      n.sigma_t = 0.2;
      for (const auto& s : ref.samples()) noisy.push_back(s.t, perturb(s.pose, n, rng));
      const double a = ate(ref, noisy);
      CHECK(ate(ref, transformed(noisy, random_pose(rng))) == doctest::Approx(a).epsilon(1e-9));
    }
  }

  TEST_CASE("rpe") {
    Rng rng(5);
    const auto ref = random_trajectory(rng, 11);
    auto zero = rpe(ref, ref, 1);
    CHECK(zero.translation < 1e-12);
    CHECK(zero.rotation < 1e-6);
    const auto moved = rpe(ref, transformed(ref, random_pose(rng)), 2);
    CHECK(moved.translation < 1e-9);

    // World-frame +0.1 m shift of one interior sample touches two relative pairs.
    Trajectory est("e");
    for (std::size_t i = 0; i < ref.size(); ++i) {
      est.push_back(ref.samples()[i].t, i == 5 ? translate(0.1, 0, 0) * ref.pose(i) : ref.pose(i));
    }
    const double n_pairs = static_cast<double>(ref.size() - 1);
    CHECK(rpe(ref, est, 1).translation == doctest::Approx(std::sqrt(2 * 0.01 / n_pairs)).epsilon(1e-9));
    CHECK_THROWS_WITH_AS(rpe(ref, ref, 11), "insufficient samples", Error);
  }
}
