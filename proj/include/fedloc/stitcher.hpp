#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "fedloc/se3.hpp"

namespace fedloc {

/// Camera pose at one instant, seen both by device tracking and by a service.
struct StitchObservation {
  Pose device_pose;   // in the device frame D
  Pose service_pose;  // in service_frame
  FrameId service_frame;
  double confidence = 0.0;
  double timestamp = 0.0;
};

/// `transform` maps coordinates expressed in `from_frame` into `to_frame`.
struct TransformEstimate {
  FrameId from_frame;
  FrameId to_frame;
  Pose transform;
  int sample_count = 1;

  TransformEstimate inverted() const {
    return {to_frame, from_frame, transform.inverse(), sample_count};
  }
};

/// Relative transform between the origins of obs1's and obs2's service
/// frames: C_1 * D_1^-1 * D_2 * C_2^-1. Maps obs2.service_frame coordinates
/// into obs1.service_frame. Throws Error("degenerate pair") if both
/// observations come from the same frame.
TransformEstimate pairwise_transform(const StitchObservation& obs1, const StitchObservation& obs2);

/// Averages the cross product of the k best previous-frame observations
/// (highest confidence, then most recent) with every new-frame observation.
/// Throws Error("no observations") if either list is empty.
TransformEstimate estimate_transform(std::span<const StitchObservation> prev_obs,
                                     std::span<const StitchObservation> new_obs, int k = 5);

/// Observation pairing a device pose with itself in the device frame. Using
/// it as the previous side of estimate_transform yields the transform from
/// the new frame into the device frame.
StitchObservation anchor_observation(const FrameId& device_frame, const Pose& device_pose,
                                     double timestamp);

/// Directed transform edges between frames; every stored edge has its inverse
/// stored alongside it.
class FrameGraph {
 public:
  /// Inserts the estimate, or replaces the stored one when the new estimate has
  /// at least as many samples. Returns true if the graph changed.
  bool update(const TransformEstimate& est);

  std::optional<TransformEstimate> edge(const FrameId& from, const FrameId& to) const;
  bool has_frame(const FrameId& frame) const { return adjacency_.contains(frame); }
  bool connected(const FrameId& from, const FrameId& to) const;
  std::size_t edge_count() const { return edges_.size(); }

  /// Fewest-edge path, neighbours expanded in lexicographic order. Throws
  /// Error("frames not connected").
  std::vector<FrameId> path(const FrameId& from, const FrameId& to) const;
  /// T_{to <- from}.
  Pose transform(const FrameId& from, const FrameId& to) const;

 private:
  std::optional<std::vector<FrameId>> find_path(const FrameId& from, const FrameId& to) const;

  std::map<std::pair<FrameId, FrameId>, TransformEstimate> edges_;
  std::map<FrameId, std::set<FrameId>> adjacency_;
};

FrameGraph update_graph(FrameGraph graph, const TransformEstimate& est);

/// Re-expresses a pose given in `from` in frame `to`.
Pose to_frame(const Pose& p, const FrameId& from, const FrameId& to, const FrameGraph& graph);

}  // namespace fedloc
