#pragma once

#include <atomic>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fedloc/protocol.hpp"
#include "fedloc/se3.hpp"

namespace fedloc {

/// Disk on the world ground plane covered by a service map.
struct CoverageRegion {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;              // m
  double similarity_falloff = 2.0;  // m, distance at which similarity reaches 0

  double distance(const Vec2& p) const { return (p - center).norm(); }
  bool contains(const Vec2& p) const { return distance(p) <= radius; }
};

enum class ConfidenceMode { kHonest, kMalicious, kAbsent };

std::string_view to_string(ConfidenceMode m);
ConfidenceMode parse_confidence_mode(std::string_view s);

struct ServiceDescriptor {
  std::string service_id;
  std::string domain_name;
  std::string endpoint;
  FrameId frame;
  Pose frame_transform_from_world;  // T_{V<-W}; simulation ground truth
  CoverageRegion coverage;
  NoiseModel noise;
  ConfidenceMode confidence_mode = ConfidenceMode::kHonest;
  double similarity_noise = 0.0;      // sigma_s
  double recognizer_threshold = 0.5;  // tau_p

  // Honest confidence model: exp(-(e_t/lambda_t + e_r/lambda_r)) + N(0, jitter).
  double confidence_lambda_t = 0.25;
  double confidence_lambda_r = 5.0 * std::numbers::pi / 180.0;
  double confidence_jitter = 0.02;
  double malicious_confidence = 0.99;

  double latency = 0.0;  // s, simulated response time

  /// Throws Error naming the first invalid field.
  void validate() const;
  ServiceRecord record() const { return {service_id, domain_name, endpoint, frame}; }
};

/// Per-service observable counters; safe to update from concurrent handlers.
struct ServiceCounters {
  std::atomic<std::int64_t> requests{0};
  std::atomic<std::int64_t> pose_estimations{0};
  std::atomic<std::int64_t> out_of_coverage{0};
  std::atomic<std::int64_t> errors{0};
};

/// Discovery slack added to every coverage radius (models GPS error).
inline constexpr double kDefaultDiscoverySlack = 10.0;

/// Services whose coverage (inflated by `slack`) contains the query point,
/// filtered by domain suffix, optionally down-sampled to max_services with a
/// stream derived from `seed`, ordered by distance then service id.
std::vector<ServiceDescriptor> registry_query(const RegistryQuery& q,
                                              std::span<const ServiceDescriptor> registry,
                                              std::uint64_t seed,
                                              double slack = kDefaultDiscoverySlack);

/// Spatial registry mapping ground-plane locations to services.
class Registry {
 public:
  Registry(std::vector<ServiceDescriptor> services, std::uint64_t seed,
           double slack = kDefaultDiscoverySlack);

  RegistryResult query(const RegistryQuery& q) const;
  const std::vector<ServiceDescriptor>& services() const { return services_; }
  std::int64_t query_count() const { return queries_.load(); }

 private:
  std::vector<ServiceDescriptor> services_;
  std::uint64_t seed_;
  double slack_;
  mutable std::atomic<std::int64_t> queries_{0};
};

/// Linear-falloff place similarity plus Gaussian noise, clamped to [0, 1].
/// Always consumes exactly one normal draw.
double place_similarity(const ServiceDescriptor& svc, const Vec2& world_pos, Rng& rng);

/// Service-side chain: place gate, pose estimate, confidence. No pose
/// estimation happens (and the counter is untouched) for gated queries.
/// Queries outside the mapped disk that pass the gate produce a false match:
/// a pose drawn uniformly from the service's own coverage.
LocalizeResponse handle_localize(const ServiceDescriptor& svc, const LocalizeRequest& req, Rng& rng,
                                 ServiceCounters* counters = nullptr);

/// A simulated service instance. The noise stream of each query is derived
/// from (scenario_seed, service_id, query_id) only.
class VpsService {
 public:
  VpsService(ServiceDescriptor descriptor, std::uint64_t scenario_seed);

  LocalizeResponse handle(const LocalizeRequest& req) const;

  const ServiceDescriptor& descriptor() const { return descriptor_; }
  const ServiceCounters& counters() const { return counters_; }

 private:
  ServiceDescriptor descriptor_;
  std::uint64_t scenario_seed_;
  mutable ServiceCounters counters_;
};

/// Ground-plane position of a world pose.
inline Vec2 ground_position(const Pose& world_pose) {
  return world_pose.translation().head<2>();
}

}  // namespace fedloc
