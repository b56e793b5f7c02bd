#include <doctest.h>

#include <vector>

#include "fedloc/error.hpp"
#include "fedloc/se3.hpp"
#include "support.hpp"

using namespace fedloc;
using fedloc::testing::deg;
using fedloc::testing::random_pose;

namespace {

bool near(const Pose& a, const Pose& b, double tol = 1e-12) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

TEST_SUITE("se3") {
  TEST_CASE("compose") {
    Rng rng(1);
    const Pose p = random_pose(rng);
    CHECK(near(compose(Pose::identity(), p), p));
    CHECK(near(compose(translate(1, 0, 0), translate(0, 2, 0)), translate(1, 2, 0)));

    // Explicit homogeneous product.
    Mat4 rz = Mat4::Identity();
    rz.topLeftCorner<2, 2>() << 0, -1, 1, 0;
    Mat4 tx = Mat4::Identity();
    tx(0, 3) = 1.0;
    const Eigen::Vector4d oracle = rz * tx * Eigen::Vector4d(0, 0, 0, 1);
    const Vec3 got = compose(rot_z(deg(90)), translate(1, 0, 0)).apply(Vec3::Zero());
    CHECK((got - oracle.head<3>()).norm() < 1e-12);
    CHECK((got - Vec3(0, 1, 0)).norm() < 1e-12);
  }

  TEST_CASE("compose matches matrix product") {
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
      const Pose a = random_pose(rng);
      const Pose b = random_pose(rng);
      CHECK(((a * b).matrix() - a.matrix() * b.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("inverse") {
    CHECK(near(inverse(Pose::identity()), Pose::identity()));
    CHECK(near(inverse(translate(1, 2, 3)), translate(-1, -2, -3)));
    CHECK(near(inverse(rot_z(deg(90))), rot_z(deg(-90))));
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      const Pose p = random_pose(rng);
      CHECK(near(p * p.inverse(), Pose::identity(), 1e-12));
    }
  }

  TEST_CASE("rotation angle") {
    CHECK(rotation_angle(Mat3::Identity(), Mat3::Identity()) == doctest::Approx(0.0));
    CHECK(rotation_angle(Pose::identity(), rot_z(deg(180))) == doctest::Approx(std::numbers::pi));
    CHECK(rotation_angle(rot_z(deg(30)), rot_z(deg(75))) == doctest::Approx(0.785398).epsilon(1e-6));
  }

  TEST_CASE("translation distance") {
    Rng rng(4);
    const Pose p = random_pose(rng);
    CHECK(translation_distance(p, p) == 0.0);
    CHECK(translation_distance(translate(0, 0, 0), translate(3, 4, 0)) == doctest::Approx(5.0));
    CHECK(translation_distance(translate(1, 1, 1), translate(2, 2, 2)) == doctest::Approx(1.732051).epsilon(1e-6));
  }

  TEST_CASE("quaternion round trip") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      const Pose p = random_pose(rng);
      const auto q = p.quaternion();
      CHECK(q.w() >= 0.0);
      CHECK(near(Pose::from_quaternion(q, p.translation()), p, 1e-12));
    }
  }

  TEST_CASE("projection and validity") {
    CHECK(is_rotation(rot_x(0.3).rotation()));
    Mat3 m = rot_y(0.7).rotation();
    m(0, 1) += 1e-3;
    CHECK_FALSE(is_rotation(m));
    CHECK(is_rotation(project_to_so3(m)));
    Mat3 reflect = Mat3::Identity();
    reflect(2, 2) = -1.0;
    CHECK(is_rotation(project_to_so3(reflect)));
  }

  TEST_CASE("chordal mean") {
    Rng rng(6);
    const Pose p = random_pose(rng);
    const std::vector<Pose> one{p};
    CHECK(near(chordal_mean(one), p));
    const std::vector<Pose> two{p, p};
    CHECK(near(chordal_mean(two), p, 1e-12));
    const std::vector<Pose> sym{Pose(rot_z(deg(20)).rotation(), Vec3(1, 0, 0)),
                                Pose(rot_z(deg(-20)).rotation(), Vec3(3, 0, 0))};
    const Pose m = chordal_mean(sym);
    CHECK(rotation_angle(m.rotation(), Mat3::Identity()) < 1e-12);
    CHECK((m.translation() - Vec3(2, 0, 0)).norm() < 1e-12);
    CHECK_THROWS_WITH_AS(chordal_mean(std::span<const Pose>{}), "empty input", Error);
  }

  TEST_CASE("perturb") {
    Rng rng(7);
    const Pose p = random_pose(rng);
    Rng a(42);
    CHECK(near(perturb(p, NoiseModel::none(), a), p, 0.0));

    NoiseModel n;
    n.sigma_t = 0.2;
    n.sigma_r = deg(2);
    Rng r1(9);
    Rng r2(9);
    CHECK(near(perturb(p, n, r1), perturb(p, n, r2), 0.0));

    // Folded-normal oracle: E|x| for x ~ N(0, (0.2^2/3) I3) is 0.2*sqrt(8/(3 pi)) = 0.1843.
    NoiseModel t_only;
    t_only.sigma_t = 0.2;
    Rng seed42(42);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) sum += translation_distance(perturb(p, t_only, seed42), p);
    const double mean = sum / 10000.0;
    CHECK(mean >= 0.15);
    CHECK(mean <= 0.22);
  }

  TEST_CASE("perturb reports injected error") {
    NoiseModel n;
    n.sigma_t = 0.3;
    n.sigma_r = deg(5);
    Rng rng(11);
    const Pose p = random_pose(rng);
    for (int i = 0; i < 200; ++i) {
      const auto d = perturb_detailed(p, n, rng);
      CHECK(d.translation_error == doctest::Approx(translation_distance(d.pose, p)).epsilon(1e-9));
      CHECK(d.rotation_error == doctest::Approx(rotation_angle(d.pose, p)).epsilon(1e-6));
    }
  }

  TEST_CASE("outliers stay in range") {
    NoiseModel n;
    n.p_outlier = 1.0;
    n.outlier_t_range = 2.0;
    n.outlier_r_range = deg(30);
    Rng rng(12);
    for (int i = 0; i < 500; ++i) {
      const auto d = perturb_detailed(Pose::identity(), n, rng);
      CHECK(d.outlier);
      CHECK(d.pose.translation().cwiseAbs().maxCoeff() <= 2.0);
    }
  }

  TEST_CASE("noise validation") {
    NoiseModel n;
    n.sigma_t = -1.0;
    CHECK_THROWS_AS(n.validate(), Error);
    n = {};
    n.p_outlier = 1.5;
    CHECK_THROWS_AS(n.validate(), Error);
  }
}
