#include "fedloc/selector.hpp"

#include <algorithm>
#include <cmath>

#include "fedloc/error.hpp"
#include "fedloc/trajectory.hpp"

namespace fedloc {

void CandidateTrack::push(const TrackPair& pair, std::size_t window) {
  pairs.push_back(pair);
  if (window > 0 && pairs.size() > window) {
    pairs.erase(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(pairs.size() - window));
  }
}

std::vector<RankEntry> rank_services(std::span<const CandidateTrack> tracks) {
  for (const auto& track : tracks) {
    if (track.pairs.size() < kMinTrackPairs) {
      throw Error("insufficient observations: " + track.service_id);
    }
  }

  std::vector<RankEntry> out;
  out.reserve(tracks.size());
  std::vector<Vec3> vio;
  std::vector<Vec3> svc;
  for (const auto& track : tracks) {
    vio.clear();
    svc.clear();
    for (const auto& p : track.pairs) {
      vio.push_back(p.vio_pose.translation());
      svc.push_back(p.service_pose.translation());
    }
    double score = kUnrankable;
    try {
      score = ate_points(vio, svc);
    } catch (const DegenerateTrajectory&) {
    }
    out.push_back({track.service_id, score, 0});
  }

  std::sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.ate_score != b.ate_score) return a.ate_score < b.ate_score;
    return a.service_id < b.service_id;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
  return out;
}

double device_score(double ate_score, double lambda_ate) {
  if (!std::isfinite(ate_score)) return 0.0;
  return std::exp(-ate_score / lambda_ate);
}

ServiceReputation update_reputation(ServiceReputation rep, double device_score,
                                    double server_confidence, double delta, int streak_limit) {
  if (std::abs(device_score - server_confidence) > delta) {
    ++rep.discrepancy_streak;
  } else {
    rep.discrepancy_streak = 0;
  }
  if (rep.discrepancy_streak >= streak_limit) rep.blacklisted = true;
  return rep;
}

bool needs_rediscovery(std::span<const double> confidence_history, double tau, int window) {
  if (window < 1 || confidence_history.size() < static_cast<std::size_t>(window)) return false;
  return std::all_of(confidence_history.end() - window, confidence_history.end(),
                     [tau](double c) { return c < tau; });
}

}  // namespace fedloc
