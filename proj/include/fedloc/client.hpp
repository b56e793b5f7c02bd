#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fedloc/protocol.hpp"
#include "fedloc/selector.hpp"
#include "fedloc/stitcher.hpp"
#include "fedloc/transport.hpp"

namespace fedloc {

struct VioModel {
  double drift_t_per_m = 0.0;  // m of translation drift (std dev) per m travelled
  double drift_r_per_m = 0.0;  // rad per m travelled

  void validate() const;
};

/// Applies one relative motion, perturbed in proportion to the distance
/// travelled, to the current drifted pose.
Pose vio_step(const Pose& current, const VioModel& model, const Pose& true_motion, double distance,
              Rng& rng);

/// Device tracking surrogate. Starts at identity: the device frame D is the
/// camera pose at session start.
class VioTracker {
 public:
  VioTracker(VioModel model, std::uint64_t seed) : model_(model), rng_(seed) { model_.validate(); }

  const Pose& pose() const { return pose_; }
  const Pose& step(const Pose& true_motion, double distance) {
    pose_ = vio_step(pose_, model_, true_motion, distance, rng_);
    return pose_;
  }

 private:
  VioModel model_;
  Rng rng_;
  Pose pose_;
};

struct ClientConfig {
  double cycle_interval = 1.0;   // s
  double timeout_fraction = 0.5;  // per-request timeout as a fraction of the cycle
  int max_broadcast = 5;
  std::optional<std::vector<std::string>> tld_whitelist;
  SelectorConfig selector;
  int stitch_k = 5;
  int stitch_max_new = 10;         // new-frame observations used when refining
  std::size_t stitch_history = 20;  // observations kept per frame
  FrameId anchor_frame = "device";

  void validate() const;
  double request_timeout() const { return timeout_fraction * cycle_interval; }
};

/// What the device knows at image capture time. `image_pose` is forwarded to
/// services as the query and never interpreted by the client.
struct DeviceSample {
  double t = 0.0;
  Pose vio_pose;
  Pose image_pose;
  Vec2 gps = Vec2::Zero();
};

struct CycleOutcome {
  int cycle = 0;
  double t = 0.0;
  std::optional<std::string> selected_service;
  bool provisional = false;
  bool fix = false;
  Pose app_pose;  // anchor frame
  std::optional<FrameId> frame;
  std::optional<double> ate_selected;
  std::optional<double> confidence;
  int stitch_updates = 0;
  bool discovery = false;
  int requests_sent = 0;
  int ok_responses = 0;
  std::vector<RankEntry> ranking;
  std::vector<std::string> newly_blacklisted;
  double compute_ms = 0.0;  // ranking + stitching + frame mapping
};

/// One device session: discovery, broadcast, selection, reputation and
/// stitching. All state mutation happens on the calling thread; requests fan
/// out concurrently and are joined in service-id order.
class ClientSession {
 public:
  ClientSession(ClientConfig config, std::shared_ptr<const Transport> transport,
                std::string session_id);

  CycleOutcome localization_cycle(const DeviceSample& sample);

  const FrameGraph& frame_graph() const { return graph_; }
  const std::optional<std::string>& current_service() const { return current_; }
  const std::map<std::string, ServiceReputation>& reputations() const { return reputations_; }
  bool is_blacklisted(const std::string& service_id) const;
  std::int64_t registry_queries() const { return registry_queries_; }
  std::int64_t requests_sent() const { return requests_sent_; }
  std::vector<std::string> candidates() const;

 private:
  struct Reply {
    ServiceRecord record;
    LocalizeResponse response;
  };

  void discover(const DeviceSample& sample, CycleOutcome& out);
  std::vector<Reply> broadcast(const std::vector<ServiceRecord>& targets, const DeviceSample& sample,
                               int cycle);
  void select(const std::vector<Reply>& ok, CycleOutcome& out);
  int stitch(const FrameId& frame);
  void remember_observation(const StitchObservation& obs);

  ClientConfig config_;
  std::shared_ptr<const Transport> transport_;
  std::string session_id_;

  int cycle_ = 0;
  std::optional<std::string> current_;
  bool provisional_ = false;
  std::map<std::string, ServiceRecord> candidates_;
  std::map<std::string, CandidateTrack> tracks_;
  std::map<std::string, ServiceReputation> reputations_;
  std::vector<double> confidence_history_;

  FrameGraph graph_;
  std::map<FrameId, std::deque<StitchObservation>> observations_;
  std::map<FrameId, FrameId> stitch_parent_;
  std::optional<FrameId> last_fix_frame_;
  std::optional<std::pair<Pose, Pose>> last_fix_;  // (app pose, vio pose)

  std::int64_t registry_queries_ = 0;
  std::int64_t requests_sent_ = 0;
};

}  // namespace fedloc
