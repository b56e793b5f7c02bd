#include "fedloc/federation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "fedloc/error.hpp"

namespace fedloc {

namespace {

bool matches_suffix(const std::string& domain, const std::string& entry) {
  const std::string suffix = (!entry.empty() && entry.front() == '.') ? entry : "." + entry;
  return domain.ends_with(suffix);
}

bool request_is_valid(const LocalizeRequest& req) {
  if (req.query_id.empty() || !std::isfinite(req.timestamp)) return false;
  double qn = 0.0;
  for (double v : req.pose.q) {
    if (!std::isfinite(v)) return false;
    qn += v * v;
  }
  for (double v : req.pose.t) {
    if (!std::isfinite(v)) return false;
  }
  return std::abs(std::sqrt(qn) - 1.0) < 1e-6;
}

}  // namespace

std::string_view to_string(ConfidenceMode m) {
  switch (m) {
    case ConfidenceMode::kHonest: return "honest";
    case ConfidenceMode::kMalicious: return "malicious";
    case ConfidenceMode::kAbsent: return "absent";
  }
  return "honest";
}

ConfidenceMode parse_confidence_mode(std::string_view s) {
  if (s == "honest") return ConfidenceMode::kHonest;
  if (s == "malicious") return ConfidenceMode::kMalicious;
  if (s == "absent") return ConfidenceMode::kAbsent;
  throw Error("invalid confidence_mode: " + std::string(s));
}

void ServiceDescriptor::validate() const {
  auto fail = [this](const std::string& field) {
    throw Error("invalid service " + service_id + ": " + field);
  };
  if (service_id.empty()) fail("service_id");
  if (domain_name.find('.') == std::string::npos) fail("domain_name");
  if (endpoint.empty()) fail("endpoint");
  if (frame.empty()) fail("frame");
  if (!is_rotation(frame_transform_from_world.rotation(), 1e-6)) fail("frame_transform_from_world");
  if (!(coverage.radius > 0.0)) fail("coverage.radius");
  if (!(coverage.similarity_falloff >= coverage.radius)) fail("coverage.similarity_falloff");
  noise.validate();
  if (!(similarity_noise >= 0.0)) fail("similarity_noise");
  if (!(recognizer_threshold >= 0.0) || !std::isfinite(recognizer_threshold)) fail("recognizer_threshold");
  if (!(confidence_lambda_t > 0.0) || !(confidence_lambda_r > 0.0)) fail("confidence lambda");
  if (!(confidence_jitter >= 0.0)) fail("confidence_jitter");
  if (!(malicious_confidence >= 0.0 && malicious_confidence <= 1.0)) fail("malicious_confidence");
  if (!(latency >= 0.0)) fail("latency");
}

std::vector<ServiceDescriptor> registry_query(const RegistryQuery& q,
                                              std::span<const ServiceDescriptor> registry,
                                              std::uint64_t seed, double slack) {
  if (q.max_services && *q.max_services < 1) throw Error("invalid max_services");
  const Vec2 gps(q.gps[0], q.gps[1]);

  std::vector<ServiceDescriptor> hits;
  for (const auto& svc : registry) {
    if (svc.coverage.distance(gps) > svc.coverage.radius + slack) continue;
    if (q.tld_whitelist) {
      const auto& list = *q.tld_whitelist;
      if (std::none_of(list.begin(), list.end(),
                       [&](const std::string& e) { return matches_suffix(svc.domain_name, e); })) {
        continue;
      }
    }
    hits.push_back(svc);
  }

  auto by_distance = [&gps](const ServiceDescriptor& a, const ServiceDescriptor& b) {
    const double da = a.coverage.distance(gps);
    const double db = b.coverage.distance(gps);
    if (da != db) return da < db;
    return a.service_id < b.service_id;
  };
  std::sort(hits.begin(), hits.end(), by_distance);

  if (q.max_services && hits.size() > static_cast<std::size_t>(*q.max_services)) {
    Rng rng(derive_seed(derive_seed(seed, std::bit_cast<std::uint64_t>(q.gps[0])),
                        std::bit_cast<std::uint64_t>(q.gps[1])));
    std::shuffle(hits.begin(), hits.end(), rng);
    hits.resize(static_cast<std::size_t>(*q.max_services));
    std::sort(hits.begin(), hits.end(), by_distance);
  }
  return hits;
}

Registry::Registry(std::vector<ServiceDescriptor> services, std::uint64_t seed, double slack)
    : services_(std::move(services)), seed_(seed), slack_(slack) {
  std::set<std::string> ids;
  for (const auto& s : services_) {
    s.validate();
    if (!ids.insert(s.service_id).second) throw Error("duplicate service_id: " + s.service_id);
  }
}

RegistryResult Registry::query(const RegistryQuery& q) const {
  ++queries_;
  RegistryResult out;
  for (const auto& s : registry_query(q, services_, seed_, slack_)) out.services.push_back(s.record());
  return out;
}

double place_similarity(const ServiceDescriptor& svc, const Vec2& world_pos, Rng& rng) {
  std::normal_distribution<double> standard(0.0, 1.0);
  const double base =
      std::clamp(1.0 - svc.coverage.distance(world_pos) / svc.coverage.similarity_falloff, 0.0, 1.0);
  return std::clamp(base + svc.similarity_noise * standard(rng), 0.0, 1.0);
}

LocalizeResponse handle_localize(const ServiceDescriptor& svc, const LocalizeRequest& req, Rng& rng,
                                 ServiceCounters* counters) {
  if (counters) ++counters->requests;
  LocalizeResponse resp;
  resp.query_id = req.query_id;
  resp.service_id = svc.service_id;
  resp.frame = svc.frame;

  if (!request_is_valid(req)) {
    if (counters) ++counters->errors;
    resp.status = Status::kError;
    return resp;
  }

  const Pose device_world = req.pose.to_pose();
  const Vec2 ground = ground_position(device_world);
  if (place_similarity(svc, ground, rng) < svc.recognizer_threshold) {
    if (counters) ++counters->out_of_coverage;
    resp.status = Status::kOutOfCoverage;
    return resp;
  }

  if (counters) ++counters->pose_estimations;
  const Pose truth = svc.frame_transform_from_world * device_world;
  Pose estimate;
  double e_t = 0.0;
  double e_r = 0.0;
  if (svc.coverage.contains(ground)) {
    const Perturbation p = perturb_detailed(truth, svc.noise, rng);
    estimate = p.pose;
    e_t = p.translation_error;
    e_r = p.rotation_error;
  } else {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r = svc.coverage.radius * std::sqrt(unit(rng));
    const double bearing = 2.0 * std::numbers::pi * unit(rng);
    const double yaw = 2.0 * std::numbers::pi * unit(rng);
    const Vec3 position(svc.coverage.center.x() + r * std::cos(bearing),
                        svc.coverage.center.y() + r * std::sin(bearing),
                        device_world.translation().z());
    const Pose fake_world(axis_angle(Vec3::UnitZ(), yaw) * device_world.rotation(), position);
    estimate = svc.frame_transform_from_world * fake_world;
    e_t = translation_distance(estimate, truth);
    e_r = rotation_angle(estimate, truth);
  }
  resp.status = Status::kOk;
  resp.pose = WirePose::from_pose(estimate);

  switch (svc.confidence_mode) {
    case ConfidenceMode::kHonest: {
      std::normal_distribution<double> standard(0.0, 1.0);
      const double base = std::exp(-(e_t / svc.confidence_lambda_t + e_r / svc.confidence_lambda_r));
      resp.confidence = std::clamp(base + svc.confidence_jitter * standard(rng), 0.0, 1.0);
      break;
    }
    case ConfidenceMode::kMalicious:
      resp.confidence = svc.malicious_confidence;
      break;
    case ConfidenceMode::kAbsent:
      break;
  }
  return resp;
}

VpsService::VpsService(ServiceDescriptor descriptor, std::uint64_t scenario_seed)
    : descriptor_(std::move(descriptor)), scenario_seed_(scenario_seed) {
  descriptor_.validate();
}

LocalizeResponse VpsService::handle(const LocalizeRequest& req) const {
  Rng rng = query_stream(scenario_seed_, descriptor_.service_id, req.query_id);
  return handle_localize(descriptor_, req, rng, &counters_);
}

}  // namespace fedloc
