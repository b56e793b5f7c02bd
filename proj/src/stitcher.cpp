#include "fedloc/stitcher.hpp"

#include <algorithm>
#include <deque>

#include "fedloc/error.hpp"

namespace fedloc {

TransformEstimate pairwise_transform(const StitchObservation& obs1, const StitchObservation& obs2) {
  if (obs1.service_frame == obs2.service_frame) throw Error("degenerate pair");
  const Pose device_delta = obs1.device_pose.inverse() * obs2.device_pose;
  const Pose t = obs1.service_pose * device_delta * obs2.service_pose.inverse();
  return {obs2.service_frame, obs1.service_frame, t, 1};
}

TransformEstimate estimate_transform(std::span<const StitchObservation> prev_obs,
                                     std::span<const StitchObservation> new_obs, int k) {
  if (prev_obs.empty() || new_obs.empty()) throw Error("no observations");
  if (k < 1) throw Error("k must be positive");
  const FrameId& prev_frame = prev_obs.front().service_frame;
  const FrameId& new_frame = new_obs.front().service_frame;
  for (const auto& o : prev_obs) {
    if (o.service_frame != prev_frame) throw Error("mixed frames in previous observations");
  }
  for (const auto& o : new_obs) {
    if (o.service_frame != new_frame) throw Error("mixed frames in new observations");
  }

  std::vector<const StitchObservation*> best;
  best.reserve(prev_obs.size());
  for (const auto& o : prev_obs) best.push_back(&o);
  std::stable_sort(best.begin(), best.end(), [](const auto* a, const auto* b) {
    if (a->confidence != b->confidence) return a->confidence > b->confidence;
    return a->timestamp > b->timestamp;
  });
  if (best.size() > static_cast<std::size_t>(k)) best.resize(static_cast<std::size_t>(k));

  std::vector<Pose> samples;
  samples.reserve(best.size() * new_obs.size());
  for (const auto* p : best) {
    for (const auto& n : new_obs) samples.push_back(pairwise_transform(*p, n).transform);
  }
  return {new_frame, prev_frame, chordal_mean(samples), static_cast<int>(samples.size())};
}

StitchObservation anchor_observation(const FrameId& device_frame, const Pose& device_pose,
                                     double timestamp) {
  return {device_pose, device_pose, device_frame, 1.0, timestamp};
}

bool FrameGraph::update(const TransformEstimate& est) {
  if (est.from_frame.empty() || est.to_frame.empty()) throw Error("empty frame id");
  if (est.from_frame == est.to_frame) throw Error("self edge");
  if (est.sample_count < 1) throw Error("sample_count must be positive");

  const auto key = std::make_pair(est.from_frame, est.to_frame);
  if (auto it = edges_.find(key); it != edges_.end() && est.sample_count < it->second.sample_count) {
    return false;
  }
  edges_[key] = est;
  edges_[{est.to_frame, est.from_frame}] = est.inverted();
  adjacency_[est.from_frame].insert(est.to_frame);
  adjacency_[est.to_frame].insert(est.from_frame);
  return true;
}

std::optional<TransformEstimate> FrameGraph::edge(const FrameId& from, const FrameId& to) const {
  if (auto it = edges_.find({from, to}); it != edges_.end()) return it->second;
  return std::nullopt;
}

std::optional<std::vector<FrameId>> FrameGraph::find_path(const FrameId& from,
                                                          const FrameId& to) const {
  if (from == to) return std::vector<FrameId>{from};
  if (!adjacency_.contains(from) || !adjacency_.contains(to)) return std::nullopt;

  std::map<FrameId, FrameId> parent;
  std::deque<FrameId> queue{from};
  parent.emplace(from, from);
  while (!queue.empty()) {
    const FrameId cur = queue.front();
    queue.pop_front();
    for (const FrameId& next : adjacency_.at(cur)) {
      if (parent.contains(next)) continue;
      parent.emplace(next, cur);
      if (next == to) {
        std::vector<FrameId> path{to};
        for (FrameId f = to; f != from;) {
          f = parent.at(f);
          path.push_back(f);
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(next);
    }
  }
  return std::nullopt;
}

bool FrameGraph::connected(const FrameId& from, const FrameId& to) const {
  return find_path(from, to).has_value();
}

std::vector<FrameId> FrameGraph::path(const FrameId& from, const FrameId& to) const {
  auto p = find_path(from, to);
  if (!p) throw Error("frames not connected");
  return *p;
}

Pose FrameGraph::transform(const FrameId& from, const FrameId& to) const {
  const auto p = path(from, to);
  Pose t = Pose::identity();
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    t = edges_.at({p[i], p[i + 1]}).transform * t;
  }
  return t;
}

FrameGraph update_graph(FrameGraph graph, const TransformEstimate& est) {
  graph.update(est);
  return graph;
}

Pose to_frame(const Pose& p, const FrameId& from, const FrameId& to, const FrameGraph& graph) {
  if (from == to) return p;
  return graph.transform(from, to) * p;
}

}  // namespace fedloc
