#include "fedloc/client.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

#include "fedloc/error.hpp"

namespace fedloc {

void VioModel::validate() const {
  if (!(drift_t_per_m >= 0.0) || !(drift_r_per_m >= 0.0)) throw Error("invalid vio model");
}

Pose vio_step(const Pose& current, const VioModel& model, const Pose& true_motion, double distance,
              Rng& rng) {
  if (!(distance >= 0.0)) throw Error("distance must be non-negative");
  NoiseModel noise;
  noise.sigma_t = model.drift_t_per_m * distance;
  noise.sigma_r = model.drift_r_per_m * distance;
  return current * perturb(true_motion, noise, rng);
}

void ClientConfig::validate() const {
  if (!(cycle_interval > 0.0)) throw Error("invalid client config: cycle_interval");
  if (!(timeout_fraction > 0.0)) throw Error("invalid client config: timeout_fraction");
  if (max_broadcast < 1) throw Error("invalid client config: max_broadcast");
  if (stitch_k < 1) throw Error("invalid client config: stitch_k");
  if (stitch_max_new < 1) throw Error("invalid client config: stitch_max_new");
  if (stitch_history < 1) throw Error("invalid client config: stitch_history");
  if (selector.rediscovery_window < 1) throw Error("invalid client config: rediscovery_window");
  if (selector.streak_limit < 1) throw Error("invalid client config: streak_limit");
  if (!(selector.lambda_ate > 0.0)) throw Error("invalid client config: lambda_ate");
  if (selector.track_window != 0 && selector.track_window < kMinTrackPairs) {
    throw Error("invalid client config: track_window");
  }
  if (anchor_frame.empty()) throw Error("invalid client config: anchor_frame");
}

ClientSession::ClientSession(ClientConfig config, std::shared_ptr<const Transport> transport,
                             std::string session_id)
    : config_(std::move(config)), transport_(std::move(transport)), session_id_(std::move(session_id)) {
  config_.validate();
  if (!transport_) throw Error("client requires a transport");
}

bool ClientSession::is_blacklisted(const std::string& service_id) const {
  auto it = reputations_.find(service_id);
  return it != reputations_.end() && it->second.blacklisted;
}

std::vector<std::string> ClientSession::candidates() const {
  std::vector<std::string> out;
  for (const auto& [id, rec] : candidates_) out.push_back(id);
  return out;
}

void ClientSession::discover(const DeviceSample& sample, CycleOutcome& out) {
  out.discovery = true;
  ++registry_queries_;
  RegistryQuery q;
  q.gps = {sample.gps.x(), sample.gps.y()};
  q.tld_whitelist = config_.tld_whitelist;

  candidates_.clear();
  tracks_.clear();
  confidence_history_.clear();
  provisional_ = true;

  RegistryResult result;
  try {
    auto reply = transport_->exchange(LoopbackTransport::kRegistryEndpoint,
                                      frame_payload(encode_message(q)), config_.request_timeout());
    if (reply) {
      FrameReader reader;
      reader.feed(*reply);
      if (auto payload = reader.next()) {
        Message msg = decode_message(*payload);
        if (auto* r = std::get_if<RegistryResult>(&msg)) result = std::move(*r);
      }
    }
  } catch (const Error&) {
    // Registry unreachable or garbled: no candidates this cycle.
  }

  for (const auto& rec : result.services) {
    if (is_blacklisted(rec.service_id)) continue;
    if (candidates_.size() >= static_cast<std::size_t>(config_.max_broadcast)) break;
    candidates_.emplace(rec.service_id, rec);
  }
  if (current_ && !candidates_.contains(*current_)) current_.reset();
}

std::vector<ClientSession::Reply> ClientSession::broadcast(const std::vector<ServiceRecord>& targets,
                                                           const DeviceSample& sample, int cycle) {
  LocalizeRequest req;
  req.query_id = session_id_ + ":" + std::to_string(cycle);
  req.pose = WirePose::from_pose(sample.image_pose);
  req.timestamp = sample.t;
  const std::string frame = frame_payload(encode_message(req));
  const double timeout = config_.request_timeout();

  std::vector<std::future<std::optional<std::string>>> pending;
  pending.reserve(targets.size());
  for (const auto& rec : targets) {
    pending.push_back(std::async(std::launch::async, [this, &rec, &frame, timeout] {
      return transport_->exchange(rec.endpoint, frame, timeout);
    }));
  }
  requests_sent_ += static_cast<std::int64_t>(targets.size());

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
  std::vector<Reply> replies;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (pending[i].wait_until(deadline) != std::future_status::ready) continue;
    try {
      auto bytes = pending[i].get();
      if (!bytes) continue;
      FrameReader reader;
      reader.feed(*bytes);
      auto payload = reader.next();
      if (!payload) continue;
      Message msg = decode_message(*payload);
      auto* resp = std::get_if<LocalizeResponse>(&msg);
      if (!resp || resp->query_id != req.query_id || resp->service_id != targets[i].service_id) continue;
      replies.push_back({targets[i], std::move(*resp)});
    } catch (const Error&) {
    }
  }
  std::sort(replies.begin(), replies.end(),
            [](const Reply& a, const Reply& b) { return a.record.service_id < b.record.service_id; });
  return replies;
}

void ClientSession::remember_observation(const StitchObservation& obs) {
  auto& buf = observations_[obs.service_frame];
  buf.push_back(obs);
  while (buf.size() > config_.stitch_history) buf.pop_front();
}

void ClientSession::select(const std::vector<Reply>& ok, CycleOutcome& out) {
  const SelectorConfig& sel = config_.selector;
  std::vector<CandidateTrack> eligible;
  for (const auto& r : ok) {
    const auto& track = tracks_.at(r.record.service_id);
    if (track.pairs.size() >= kMinTrackPairs) eligible.push_back(track);
  }

  bool ranked_choice = false;
  if (!eligible.empty()) {
    out.ranking = rank_services(eligible);
    for (const auto& entry : out.ranking) {
      auto reply = std::find_if(ok.begin(), ok.end(),
                                [&](const Reply& r) { return r.record.service_id == entry.service_id; });
      // No evidence either way from a degenerate track or a silent server.
      if (!reply->response.confidence || !std::isfinite(entry.ate_score)) continue;
      auto [it, inserted] = reputations_.try_emplace(entry.service_id, ServiceReputation{entry.service_id});
      const bool was = it->second.blacklisted;
      it->second = update_reputation(it->second, device_score(entry.ate_score, sel.lambda_ate),
                                     *reply->response.confidence, sel.delta, sel.streak_limit);
      if (it->second.blacklisted && !was) {
        out.newly_blacklisted.push_back(entry.service_id);
        candidates_.erase(entry.service_id);
        observations_.erase(reply->record.frame);
        tracks_.erase(entry.service_id);
        if (current_ == entry.service_id) current_.reset();
      }
    }
    for (const auto& entry : out.ranking) {
      if (is_blacklisted(entry.service_id) || !std::isfinite(entry.ate_score)) continue;
      if (current_ != entry.service_id) confidence_history_.clear();
      current_ = entry.service_id;
      provisional_ = false;
      out.ate_selected = entry.ate_score;
      ranked_choice = true;
      break;
    }
  }

  if (!ranked_choice) {
    const Reply* best = nullptr;
    for (const auto& r : ok) {
      if (is_blacklisted(r.record.service_id)) continue;
      const double c = r.response.confidence.value_or(-1.0);
      if (!best || c > best->response.confidence.value_or(-1.0)) best = &r;
    }
    if (best) {
      if (current_ != best->record.service_id) confidence_history_.clear();
      current_ = best->record.service_id;
      provisional_ = true;
    }
  }
}

int ClientSession::stitch(const FrameId& frame) {
  const FrameId& anchor = config_.anchor_frame;
  auto obs_it = observations_.find(frame);
  if (frame == anchor || obs_it == observations_.end() || obs_it->second.empty()) return 0;

  const auto& buffer = obs_it->second;
  const std::size_t n_new = std::min(buffer.size(), static_cast<std::size_t>(config_.stitch_max_new));
  const std::vector<StitchObservation> fresh(buffer.end() - static_cast<std::ptrdiff_t>(n_new),
                                             buffer.end());

  FrameId parent;
  const bool connected = graph_.connected(frame, anchor);
  if (!connected) {
    const bool use_last = last_fix_frame_ && *last_fix_frame_ != frame &&
                          graph_.connected(*last_fix_frame_, anchor) &&
                          observations_.contains(*last_fix_frame_);
    parent = use_last ? *last_fix_frame_ : anchor;
    stitch_parent_[frame] = parent;
  } else if (auto it = stitch_parent_.find(frame); it != stitch_parent_.end()) {
    parent = it->second;
  } else {
    return 0;
  }

  std::vector<StitchObservation> prev;
  if (parent == anchor) {
    prev.push_back(anchor_observation(anchor, fresh.front().device_pose, fresh.front().timestamp));
  } else {
    const auto& p = observations_.at(parent);
    prev.assign(p.begin(), p.end());
  }

  if (connected) {
    const auto existing = graph_.edge(frame, parent);
    const auto k = std::min(prev.size(), static_cast<std::size_t>(config_.stitch_k));
    if (!existing || static_cast<int>(k * fresh.size()) <= existing->sample_count) return 0;
  }
  return graph_.update(estimate_transform(prev, fresh, config_.stitch_k)) ? 1 : 0;
}

CycleOutcome ClientSession::localization_cycle(const DeviceSample& sample) {
  CycleOutcome out;
  out.cycle = cycle_++;
  out.t = sample.t;
  const SelectorConfig& sel = config_.selector;

  if (!current_ || needs_rediscovery(confidence_history_, sel.tau, sel.rediscovery_window)) {
    discover(sample, out);
  }

  std::vector<ServiceRecord> targets;
  if (current_ && !provisional_ && candidates_.contains(*current_)) {
    targets.push_back(candidates_.at(*current_));
  } else {
    for (const auto& [id, rec] : candidates_) targets.push_back(rec);
  }
  out.requests_sent = static_cast<int>(targets.size());
  const auto replies = broadcast(targets, sample, out.cycle);

  std::vector<Reply> ok;
  for (const auto& r : replies) {
    const std::string& id = r.record.service_id;
    if (r.response.status == Status::kOutOfCoverage) {
      candidates_.erase(id);
      tracks_.erase(id);
      if (current_ == id) current_.reset();
    } else if (r.response.status == Status::kOk) {
      ok.push_back(r);
      const Pose service_pose = r.response.pose->to_pose();
      auto& track = tracks_[id];
      track.service_id = id;
      track.push({sample.t, sample.vio_pose, service_pose, r.response.confidence}, sel.track_window);
      remember_observation({sample.vio_pose, service_pose, r.record.frame,
                            r.response.confidence.value_or(0.0), sample.t});
    }
  }
  out.ok_responses = static_cast<int>(ok.size());

  const auto started = std::chrono::steady_clock::now();
  select(ok, out);

  const Reply* chosen = nullptr;
  if (current_) {
    for (const auto& r : ok) {
      if (r.record.service_id == *current_) chosen = &r;
    }
  }
  out.selected_service = current_;
  out.provisional = current_ && provisional_;

  if (chosen) {
    const FrameId& frame = chosen->record.frame;
    out.frame = frame;
    out.confidence = chosen->response.confidence;
    if (chosen->response.confidence) {
      confidence_history_.push_back(*chosen->response.confidence);
      const auto keep = static_cast<std::size_t>(sel.rediscovery_window);
      if (confidence_history_.size() > keep) {
        confidence_history_.erase(confidence_history_.begin(),
                                  confidence_history_.end() - static_cast<std::ptrdiff_t>(keep));
      }
    }
    out.stitch_updates = stitch(frame);
    if (graph_.connected(frame, config_.anchor_frame)) {
      out.app_pose = to_frame(chosen->response.pose->to_pose(), frame, config_.anchor_frame, graph_);
      out.fix = true;
      last_fix_frame_ = frame;
      last_fix_ = {out.app_pose, sample.vio_pose};
    }
  }
  if (!out.fix) {
    out.app_pose = last_fix_ ? last_fix_->first * last_fix_->second.inverse() * sample.vio_pose
                             : sample.vio_pose;
  }
  out.compute_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace fedloc
