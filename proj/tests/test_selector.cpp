#include <doctest.h>

#include <vector>

#include "fedloc/error.hpp"
#include "fedloc/selector.hpp"
#include "support.hpp"

using namespace fedloc;
using fedloc::testing::random_pose;

namespace {

// Device path: a gentle curve, so alignment is well-posed.
std::vector<Pose> device_path(std::size_t n) {
  std::vector<Pose> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i);
    out.push_back(Pose(rot_z(0.2 * s).rotation(), Vec3(s, 0.3 * s * s, 0.1 * s)));
  }
  return out;
}

CandidateTrack make_track(const std::string& id, const std::vector<Pose>& vio, const Pose& frame,
                          const NoiseModel& noise, Rng& rng) {
  CandidateTrack t{id, {}};
  for (std::size_t i = 0; i < vio.size(); ++i) {
    t.push({static_cast<double>(i), vio[i], perturb(frame * vio[i], noise, rng), 0.9}, 0);
  }
  return t;
}

}  // namespace

TEST_SUITE("selector") {
  TEST_CASE("noiseless candidate ranks first") {
    NoiseModel loud;
    loud.sigma_t = 1.0;
    int wins = 0;
    for (int trial = 0; trial < 100; ++trial) {
      Rng rng(derive_seed(5, static_cast<std::uint64_t>(trial)));
      const auto vio = device_path(5);
      std::vector<CandidateTrack> tracks;
      tracks.push_back(make_track("svc-e", vio, random_pose(rng), NoiseModel::none(), rng));
      for (const char* id : {"svc-a", "svc-b", "svc-c", "svc-d"}) {
        tracks.push_back(make_track(id, vio, random_pose(rng), loud, rng));
      }
      const auto ranking = rank_services(tracks);
      wins += ranking.front().service_id == "svc-e" ? 1 : 0;
      CHECK(ranking.front().rank == 1);
    }
    CHECK(wins >= 99);
  }

  TEST_CASE("insufficient observations names the track") {
    Rng rng(1);
    auto vio = device_path(2);
    std::vector<CandidateTrack> tracks{make_track("short", vio, Pose(), NoiseModel::none(), rng)};
    CHECK_THROWS_WITH_AS(rank_services(tracks), "insufficient observations: short", Error);
  }

  TEST_CASE("ties break by service id") {
    Rng rng(2);
    const auto vio = device_path(4);
    std::vector<CandidateTrack> tracks{make_track("zeta", vio, translate(1, 0, 0), NoiseModel::none(), rng),
                                       make_track("alpha", vio, translate(1, 0, 0), NoiseModel::none(), rng)};
    const auto ranking = rank_services(tracks);
    CHECK(ranking[0].service_id == "alpha");
    CHECK(ranking[1].service_id == "zeta");
    CHECK(ranking[1].rank == 2);
  }

  TEST_CASE("degenerate tracks rank last") {
    Rng rng(3);
    std::vector<Pose> line;
    for (int i = 0; i < 4; ++i) line.push_back(translate(i, 0, 0));
    std::vector<CandidateTrack> tracks{make_track("aaa", line, Pose(), NoiseModel::none(), rng),
                                       make_track("bbb", device_path(4), Pose(), NoiseModel::none(), rng)};
    const auto ranking = rank_services(tracks);
    CHECK(ranking[0].service_id == "bbb");
    CHECK(ranking[1].ate_score == kUnrankable);
    CHECK(device_score(kUnrankable, 0.5) == 0.0);
  }

  TEST_CASE("track window") {
    CandidateTrack t{"x", {}};
    for (int i = 0; i < 15; ++i) t.push({static_cast<double>(i), Pose(), Pose(), std::nullopt}, 10);
    CHECK(t.pairs.size() == 10);
    CHECK(t.pairs.front().t == 5.0);
  }

  TEST_CASE("reputation") {
    ServiceReputation r{"m"};
    for (int i = 0; i < 3; ++i) r = update_reputation(r, 0.49, 0.99, 0.3, 3);
    CHECK(r.blacklisted);

    ServiceReputation s{"h"};
    s = update_reputation(s, 0.1, 0.6, 0.3, 3);
    s = update_reputation(s, 0.1, 0.6, 0.3, 3);
    CHECK(s.discrepancy_streak == 2);
    s = update_reputation(s, 0.5, 0.6, 0.3, 3);
    CHECK(s.discrepancy_streak == 0);
    CHECK_FALSE(s.blacklisted);

    // Blacklisting is permanent for the session.
    r = update_reputation(r, 0.99, 0.99, 0.3, 3);
    CHECK(r.blacklisted);
  }

  TEST_CASE("device score") {
    CHECK(device_score(0.0, 0.5) == 1.0);
    CHECK(device_score(0.5, 0.5) == doctest::Approx(std::exp(-1.0)));
  }

  TEST_CASE("rediscovery trigger") {
    const std::vector<double> high{0.9, 0.9};
    const std::vector<double> low{0.2, 0.1};
    const std::vector<double> short_history{0.2};
    const std::vector<double> recovered{0.1, 0.1, 0.8};
    CHECK_FALSE(needs_rediscovery(high, 0.4, 2));
    CHECK(needs_rediscovery(low, 0.4, 2));
    CHECK_FALSE(needs_rediscovery(short_history, 0.4, 2));
    CHECK_FALSE(needs_rediscovery(recovered, 0.4, 2));
  }
}
