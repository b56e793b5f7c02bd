#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedloc/se3.hpp"

namespace fedloc {

/// One localized image: the device tracking pose at capture time and the
/// service's answer for it.
struct TrackPair {
  double t = 0.0;
  Pose vio_pose;      // device frame
  Pose service_pose;  // service frame
  std::optional<double> server_confidence;
};

struct CandidateTrack {
  std::string service_id;
  std::vector<TrackPair> pairs;

  /// Appends and keeps only the newest `window` pairs (0 keeps everything).
  void push(const TrackPair& pair, std::size_t window);
};

inline constexpr double kUnrankable = std::numeric_limits<double>::infinity();

struct RankEntry {
  std::string service_id;
  double ate_score = 0.0;  // m; kUnrankable for degenerate tracks
  int rank = 1;
};

struct ServiceReputation {
  std::string service_id;
  int discrepancy_streak = 0;
  bool blacklisted = false;
};

struct SelectorConfig {
  double delta = 0.3;             // allowed |device score - server confidence|
  int streak_limit = 3;
  double tau = 0.4;               // rediscovery confidence threshold
  int rediscovery_window = 2;
  double lambda_ate = 0.2;        // m
  std::size_t track_window = 10;  // pairs kept per candidate
};

inline constexpr std::size_t kMinTrackPairs = 3;

/// Aligns each service trajectory onto the device trajectory and ranks by
/// ATE, ascending, ties by service id. Degenerate tracks rank last.
/// Throws Error("insufficient observations: <id>") for tracks under 3 pairs.
std::vector<RankEntry> rank_services(std::span<const CandidateTrack> tracks);

/// Device-side score for a service: exp(-ate / lambda), 0 for unrankable.
double device_score(double ate_score, double lambda_ate);

ServiceReputation update_reputation(ServiceReputation rep, double device_score,
                                    double server_confidence, double delta, int streak_limit);

/// True iff the newest `window` confidences are all below tau.
bool needs_rediscovery(std::span<const double> confidence_history, double tau, int window);

}  // namespace fedloc
