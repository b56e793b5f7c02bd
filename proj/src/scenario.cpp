#include "fedloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "fedloc/error.hpp"
#include "fedloc/trajectory.hpp"

namespace fedloc {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Pose ground_pose(const Vec2& xy, double yaw, double height) {
  return Pose(axis_angle(Vec3::UnitZ(), yaw), Vec3(xy.x(), xy.y(), height));
}

Vec2 sample_disk(const Vec2& center, double radius, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double a = 2.0 * std::numbers::pi * unit(rng);
  return center + r * Vec2(std::cos(a), std::sin(a));
}

std::size_t cycle_count(const ScenarioConfig& cfg) {
  return static_cast<std::size_t>(std::floor(cfg.duration / cfg.client.cycle_interval + 1e-9)) + 1;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double pct_or_nan(const std::vector<double>& v, double q) {
  return v.empty() ? std::nan("") : percentile(v, q);
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("percentile of empty input");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

double DevicePath::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    total += (waypoints[i].position - waypoints[i - 1].position).norm();
  }
  return total;
}

Pose DevicePath::pose_at(double t) const {
  if (waypoints.empty()) throw Error("no waypoints");
  double remaining = std::max(0.0, t) * speed;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const Vec2 a = waypoints[i - 1].position;
    const Vec2 b = waypoints[i].position;
    const double seg = (b - a).norm();
    if (remaining < seg) {
      return ground_pose(a + (b - a) * (remaining / seg), waypoints[i - 1].heading, height);
    }
    remaining -= seg;
  }
  return ground_pose(waypoints.back().position, waypoints.back().heading, height);
}

std::string MetricsReport::cycles_csv() const {
  std::string out = "cycle,t,selected_service,provisional,fix,ate_selected,confidence,stitch_updates,pos_err_m,rot_err_rad\n";
  for (const auto& r : rows) {
    out += std::to_string(r.cycle) + ',' + fmt_double(r.t) + ',' + r.selected_service + ',' +
           (r.provisional ? "1" : "0") + ',' + (r.fix ? "1" : "0") + ',' +
           (r.ate_selected ? fmt_double(*r.ate_selected) : "") + ',' +
           (r.confidence ? fmt_double(*r.confidence) : "") + ',' + std::to_string(r.stitch_updates) + ',' +
           fmt_double(r.pos_err_m) + ',' + fmt_double(r.rot_err_rad) + '\n';
  }
  return out;
}

std::vector<double> switch_discontinuities(const MetricsReport& report) {
  const auto& tr = report.trace;
  std::vector<double> out;
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (!report.rows[i].fix) continue;
    if (prev && tr.frames[*prev] != tr.frames[i]) {
      const Vec3 app_step = tr.app_poses[i].translation() - tr.app_poses[*prev].translation();
      const Vec3 true_step = tr.ground_truth[i].translation() - tr.ground_truth[*prev].translation();
      out.push_back((app_step - true_step).norm());
    }
    prev = i;
  }
  return out;
}

MetricsReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  auto transport = std::make_shared<LoopbackTransport>();
  auto registry = std::make_shared<Registry>(cfg.services, derive_seed(cfg.seed, "registry"));
  transport->attach_registry(registry);
  std::vector<std::shared_ptr<VpsService>> services;
  for (const auto& d : cfg.services) {
    services.push_back(std::make_shared<VpsService>(d, cfg.seed));
    transport->attach_service(services.back());
  }

  ClientSession session(cfg.client, transport, "session");
  VioTracker vio(cfg.vio, derive_seed(cfg.seed, "vio"));

  const Pose start = cfg.device_path.pose_at(0.0);
  const Pose device_from_world = start.inverse();
  Pose prev_world = start;

  MetricsReport report;
  RunTrace& tr = report.trace;
  std::map<std::string, int> selected_cycles;
  const std::size_t n_cycles = cycle_count(cfg);
  for (std::size_t k = 0; k < n_cycles; ++k) {
    const double t = static_cast<double>(k) * cfg.client.cycle_interval;
    const Pose world = cfg.device_path.pose_at(t);
    if (k > 0) {
      vio.step(prev_world.inverse() * world, (world.translation() - prev_world.translation()).norm());
    }
    prev_world = world;

    const DeviceSample sample{t, vio.pose(), world, ground_position(world)};
    const CycleOutcome out = session.localization_cycle(sample);
    const Pose truth = device_from_world * world;

    CycleRow row;
    row.cycle = out.cycle;
    row.t = t;
    row.selected_service = out.selected_service.value_or("");
    row.provisional = out.provisional;
    row.fix = out.fix;
    row.ate_selected = out.ate_selected;
    row.confidence = out.confidence;
    row.stitch_updates = out.stitch_updates;
    row.pos_err_m = translation_distance(out.app_pose, truth);
    row.rot_err_rad = rotation_angle(out.app_pose, truth);
    report.rows.push_back(row);

    tr.app_poses.push_back(out.app_pose);
    tr.ground_truth.push_back(truth);
    tr.frames.push_back(out.fix ? out.frame : std::nullopt);
    tr.compute_ms.push_back(out.compute_ms);
    tr.requests_per_cycle.push_back(out.requests_sent);
    tr.discovery.push_back(out.discovery);
    for (const auto& id : out.newly_blacklisted) {
      tr.blacklisted.push_back(id);
      tr.blacklisted_at.emplace(id, out.cycle);
    }
    if (out.selected_service) ++selected_cycles[*out.selected_service];
  }

  for (const auto& s : services) {
    tr.service_requests[s->descriptor().service_id] = s->counters().requests.load();
    tr.service_pose_estimations[s->descriptor().service_id] = s->counters().pose_estimations.load();
  }
  tr.registry_queries = session.registry_queries();
  tr.requests_sent = session.requests_sent();

  std::vector<double> pos_err;
  std::vector<double> rot_err;
  int provisional = 0;
  int stitch_updates = 0;
  for (const auto& r : report.rows) {
    if (r.fix) {
      pos_err.push_back(r.pos_err_m);
      rot_err.push_back(r.rot_err_rad);
    }
    provisional += r.provisional ? 1 : 0;
    stitch_updates += r.stitch_updates;
  }
  double sq = 0.0;
  for (double e : pos_err) sq += e * e;

  const auto jumps = switch_discontinuities(report);
  // Fixed cycles before the first frame switch.
  std::vector<double> single_service_err;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (!report.rows[i].fix) continue;
    if (tr.frames[i] != tr.frames.front() && tr.frames.front()) break;
    if (!tr.frames.front()) {
      // First cycle had no fix; anchor on the first fixed frame instead.
      const auto first = std::find_if(tr.frames.begin(), tr.frames.end(), [](const auto& f) { return f.has_value(); });
      if (tr.frames[i] != *first) break;
    }
    single_service_err.push_back(report.rows[i].pos_err_m);
  }

  json blacklisted = json::object();
  for (const auto& [id, cycle] : tr.blacklisted_at) blacklisted[id] = cycle;
  json requests = json::object();
  json estimations = json::object();
  for (const auto& [id, n] : tr.service_requests) requests[id] = n;
  for (const auto& [id, n] : tr.service_pose_estimations) estimations[id] = n;
  json selected = json::object();
  for (const auto& [id, n] : selected_cycles) selected[id] = n;

  report.summary = {
      {"name", cfg.name},
      {"seed", cfg.seed},
      {"cycles", report.rows.size()},
      {"fixed_cycles", pos_err.size()},
      {"provisional_cycles", provisional},
      {"ate_m", pos_err.empty() ? json(nullptr) : json(std::sqrt(sq / static_cast<double>(pos_err.size())))},
      {"pos_err_median_m", nullable(pct_or_nan(pos_err, 50))},
      {"pos_err_p95_m", nullable(pct_or_nan(pos_err, 95))},
      {"rot_err_median_rad", nullable(pct_or_nan(rot_err, 50))},
      {"registry_queries", tr.registry_queries},
      {"localize_requests", tr.requests_sent},
      {"service_requests", requests},
      {"pose_estimations", estimations},
      {"stitch_updates", stitch_updates},
      {"frame_graph_edges", session.frame_graph().edge_count()},
      {"frame_switches", jumps.size()},
      {"switch_discontinuity_m", jumps},
      {"single_service_median_pos_err_m", nullable(pct_or_nan(single_service_err, 50))},
      {"blacklisted", blacklisted},
      {"selected_cycles", selected},
  };
  return report;
}

// --- tables -------------------------------------------------------------

std::string Table::csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + fmt_double(row[i]);
    out += '\n';
  }
  return out;
}

std::size_t Table::col(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error("no column " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

// --- stitch convergence --------------------------------------------------

namespace {

// Ground-plane random walk at fixed step length, steered back toward the
// center of a disk when it would leave 90% of the radius.
struct Walker {
  Vec2 pos = Vec2::Zero();
  double heading = 0.0;

  void wander(const Vec2& center, double radius, double step, Rng& rng) {
    std::normal_distribution<double> standard(0.0, 1.0);
    heading += 0.6 * standard(rng);
    Vec2 next = pos + step * Vec2(std::cos(heading), std::sin(heading));
    if ((next - center).norm() > 0.9 * radius) {
      const Vec2 to_center = center - pos;
      heading = std::atan2(to_center.y(), to_center.x()) + 0.3 * standard(rng);
      next = pos + step * Vec2(std::cos(heading), std::sin(heading));
    }
    pos = next;
  }

  void start(const Vec2& center, double radius, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    pos = sample_disk(center, 0.5 * radius, rng);
    heading = 2.0 * std::numbers::pi * unit(rng);
  }
};

}  // namespace

ExperimentResult experiment_stitch_convergence(const ScenarioConfig& cfg, int n_trials, int max_obs) {
  cfg.validate();
  if (cfg.services.size() < 2) throw Error("stitch experiment requires at least two services");
  if (n_trials < 1 || max_obs < 1) throw Error("stitch experiment requires positive trials and max_obs");

  const ServiceDescriptor& first = cfg.services[0];
  const ServiceDescriptor& second = cfg.services[1];
  const Pose truth = first.frame_transform_from_world * second.frame_transform_from_world.inverse();
  const int k = cfg.client.stitch_k;
  const double height = cfg.device_path.height;
  const double step = cfg.device_path.speed * cfg.client.cycle_interval;

  std::vector<std::vector<double>> t_err(static_cast<std::size_t>(max_obs) + 1);
  std::vector<std::vector<double>> r_err(static_cast<std::size_t>(max_obs) + 1);

  for (int trial = 0; trial < n_trials; ++trial) {
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    Rng rng(seed);
    const VpsService v1(first, seed);
    const VpsService v2(second, seed);
    VioTracker vio(cfg.vio, derive_seed(seed, "vio"));

    Walker walker;
    walker.start(first.coverage.center, first.coverage.radius, rng);
    Pose last_world = ground_pose(walker.pos, walker.heading, height);
    auto move = [&] {
      const Pose world = ground_pose(walker.pos, walker.heading, height);
      vio.step(last_world.inverse() * world, (world.translation() - last_world.translation()).norm());
      last_world = world;
    };

    std::vector<StitchObservation> prev;
    std::vector<StitchObservation> next;
    int query = 0;
    // One cycle per call: localize where the device stands, then walk on.
    auto visit = [&](const VpsService& svc, std::vector<StitchObservation>& into) {
      const auto& c = svc.descriptor().coverage;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const double t = static_cast<double>(query);
        const LocalizeRequest req{"trial" + std::to_string(trial) + ":" + std::to_string(query++),
                                  WirePose::from_pose(last_world), t};
        const auto resp = svc.handle(req);
        const Pose vio_pose = vio.pose();
        walker.wander(c.center, c.radius, step, rng);
        move();
        if (resp.status != Status::kOk) continue;
        into.push_back({vio_pose, resp.pose->to_pose(), svc.descriptor().frame, resp.confidence.value_or(0.0), t});
        return;
      }
      throw Error("service " + svc.descriptor().service_id + " rejects every query in its coverage");
    };
    // The prior frame keeps a history; estimate_transform picks its k best.
    const auto history = std::max<std::size_t>(static_cast<std::size_t>(k), cfg.client.stitch_history);
    for (std::size_t i = 0; i < history; ++i) visit(v1, prev);
    // Transit to the second map's coverage in cycle-length steps.
    const Vec2 target = sample_disk(second.coverage.center, 0.5 * second.coverage.radius, rng);
    while ((target - walker.pos).norm() > step) {
      const Vec2 dir = (target - walker.pos).normalized();
      walker.heading = std::atan2(dir.y(), dir.x());
      walker.pos += step * dir;
      move();
    }
    for (int i = 0; i < max_obs; ++i) visit(v2, next);

    t_err[0].push_back(translation_distance(Pose::identity(), truth));
    r_err[0].push_back(rotation_angle(Pose::identity(), truth));
    for (int m = 1; m <= max_obs; ++m) {
      const auto est = estimate_transform(prev, std::span(next).first(static_cast<std::size_t>(m)), k);
      t_err[static_cast<std::size_t>(m)].push_back(translation_distance(est.transform, truth));
      r_err[static_cast<std::size_t>(m)].push_back(rotation_angle(est.transform, truth));
    }
  }

  ExperimentResult res;
  res.name = "stitch";
  res.table.columns = {"obs_count", "t_err_median_m", "t_err_p5_m", "t_err_p95_m",
                       "r_err_median_rad", "r_err_p5_rad", "r_err_p95_rad"};
  for (std::size_t m = 0; m < t_err.size(); ++m) {
    res.table.rows.push_back({static_cast<double>(m), percentile(t_err[m], 50), percentile(t_err[m], 5),
                              percentile(t_err[m], 95), percentile(r_err[m], 50), percentile(r_err[m], 5),
                              percentile(r_err[m], 95)});
  }
  json rows = json::array();
  for (const auto& r : res.table.rows) {
    json o;
    for (std::size_t i = 0; i < r.size(); ++i) o[res.table.columns[i]] = r[i];
    rows.push_back(o);
  }
  res.summary = {{"experiment", "stitch"},
                 {"name", cfg.name},
                 {"seed", cfg.seed},
                 {"trials", n_trials},
                 {"max_obs", max_obs},
                 {"stitch_k", k},
                 {"prior_observations", std::max<std::size_t>(static_cast<std::size_t>(k), cfg.client.stitch_history)},
                 {"stitch_error_by_obs", rows}};
  return res;
}

// --- selector ------------------------------------------------------------

ExperimentResult experiment_selector(const ScenarioConfig& cfg, int n_trials) {
  cfg.validate();
  if (n_trials < 1) throw Error("selector experiment requires positive trials");
  const ServiceDescriptor& correct = cfg.services.front();
  const std::size_t n_cycles = cycle_count(cfg);
  const std::size_t n_services = cfg.services.size();
  const double step = cfg.device_path.speed * cfg.client.cycle_interval;
  const std::size_t window = cfg.client.selector.track_window;

  std::vector<std::vector<double>> ranks(n_cycles + 1);
  std::vector<std::vector<double>> true_ate(n_cycles + 1);
  std::vector<std::vector<double>> false_ate(n_cycles + 1);
  std::vector<double> rank1_by_cycle(n_cycles + 1, 0.0);

  for (int trial = 0; trial < n_trials; ++trial) {
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    Rng rng(seed);
    std::vector<std::unique_ptr<VpsService>> services;
    for (const auto& d : cfg.services) services.push_back(std::make_unique<VpsService>(d, seed));
    VioTracker vio(cfg.vio, derive_seed(seed, "vio"));

    const Vec2 center = correct.coverage.center;
    const double radius = correct.coverage.radius;
    Walker walker;
    walker.start(center, radius, rng);
    Pose last_world = ground_pose(walker.pos, walker.heading, cfg.device_path.height);

    std::vector<CandidateTrack> tracks(n_services);
    for (std::size_t s = 0; s < n_services; ++s) tracks[s].service_id = cfg.services[s].service_id;

    for (std::size_t c = 0; c < n_cycles; ++c) {
      if (c > 0) walker.wander(center, radius, step, rng);
      const Pose world = ground_pose(walker.pos, walker.heading, cfg.device_path.height);
      if (c > 0) {
        vio.step(last_world.inverse() * world, (world.translation() - last_world.translation()).norm());
      }
      last_world = world;

      const double t = static_cast<double>(c) * cfg.client.cycle_interval;
      const LocalizeRequest req{"trial" + std::to_string(trial) + ":" + std::to_string(c),
                                WirePose::from_pose(world), t};
      for (std::size_t s = 0; s < n_services; ++s) {
        const auto resp = services[s]->handle(req);
        if (resp.status == Status::kOk) {
          tracks[s].push({t, vio.pose(), resp.pose->to_pose(), resp.confidence}, window);
        }
      }

      std::vector<CandidateTrack> eligible;
      for (const auto& tr : tracks) {
        if (tr.pairs.size() >= kMinTrackPairs) eligible.push_back(tr);
      }
      if (c + 1 < kMinTrackPairs) continue;
      double rank = static_cast<double>(n_services);
      if (!eligible.empty()) {
        for (const auto& e : rank_services(eligible)) {
          if (e.service_id == correct.service_id) {
            rank = e.rank;
            if (std::isfinite(e.ate_score)) true_ate[c + 1].push_back(e.ate_score);
          } else if (std::isfinite(e.ate_score)) {
            false_ate[c + 1].push_back(e.ate_score);
          }
        }
      }
      ranks[c + 1].push_back(rank);
      if (rank == 1.0) rank1_by_cycle[c + 1] += 1.0;
    }
  }

  ExperimentResult res;
  res.name = "selector";
  res.table.columns = {"cycle", "mean_rank", "rank_std", "rank1_rate",
                       "true_ate_p5_m", "true_ate_median_m", "true_ate_p95_m",
                       "false_ate_p5_m", "false_ate_median_m", "false_ate_p95_m"};
  json rows = json::array();
  for (std::size_t c = kMinTrackPairs; c <= n_cycles; ++c) {
    std::vector<double> row{static_cast<double>(c),
                            mean(ranks[c]),
                            stddev(ranks[c]),
                            rank1_by_cycle[c] / static_cast<double>(n_trials),
                            pct_or_nan(true_ate[c], 5),
                            pct_or_nan(true_ate[c], 50),
                            pct_or_nan(true_ate[c], 95),
                            pct_or_nan(false_ate[c], 5),
                            pct_or_nan(false_ate[c], 50),
                            pct_or_nan(false_ate[c], 95)};
    json o;
    for (std::size_t i = 0; i < row.size(); ++i) o[res.table.columns[i]] = nullable(row[i]);
    rows.push_back(o);
    res.table.rows.push_back(std::move(row));
  }
  res.summary = {{"experiment", "selector"},
                 {"name", cfg.name},
                 {"seed", cfg.seed},
                 {"trials", n_trials},
                 {"services", n_services},
                 {"correct_service", correct.service_id},
                 {"rank_by_cycle", rows}};
  return res;
}

// --- recognizer ----------------------------------------------------------

ExperimentResult experiment_recognizer(const ScenarioConfig& cfg, int n_queries) {
  cfg.validate();
  const std::size_t n = cfg.services.size();
  if (n < 2) throw Error("recognizer experiment requires at least two services");
  if (n_queries < static_cast<int>(2 * n)) throw Error("recognizer experiment requires more queries");
  const int per_side = n_queries / static_cast<int>(2 * n);

  std::vector<double> sweep;
  for (int i = 0; i <= 10; ++i) sweep.push_back(0.1 * i);
  sweep.push_back(1.01);

  ExperimentResult res;
  res.name = "recognizer";
  const std::vector<std::string> columns = {"service_index", "tau_p", "in_queries", "in_accept_rate",
                                            "out_queries", "out_reject_rate", "accepted", "pose_estimations"};
  res.table.columns = columns;
  Table sweep_table;
  sweep_table.columns = columns;
  json per_service = json::array();

  for (std::size_t s = 0; s < n; ++s) {
    const ServiceDescriptor& svc = cfg.services[s];
    Rng rng(derive_seed(cfg.seed, svc.service_id));
    std::uniform_real_distribution<double> yaw(-std::numbers::pi, std::numbers::pi);
    std::vector<LocalizeRequest> inside;
    std::vector<LocalizeRequest> outside;
    for (int q = 0; q < per_side; ++q) {
      const Pose w = ground_pose(sample_disk(svc.coverage.center, svc.coverage.radius, rng), yaw(rng),
                                 cfg.device_path.height);
      inside.push_back({"in:" + std::to_string(q), WirePose::from_pose(w), static_cast<double>(q)});
    }
    for (int q = 0; q < per_side; ++q) {
      // Round-robin over the other services' coverage.
      const std::size_t other = (s + 1 + static_cast<std::size_t>(q) % (n - 1)) % n;
      const auto& c = cfg.services[other].coverage;
      const Pose w = ground_pose(sample_disk(c.center, c.radius, rng), yaw(rng), cfg.device_path.height);
      outside.push_back({"out:" + std::to_string(q), WirePose::from_pose(w), static_cast<double>(q)});
    }

    auto evaluate = [&](double tau) {
      ServiceDescriptor d = svc;
      d.recognizer_threshold = tau;
      const VpsService instance(d, cfg.seed);
      int in_ok = 0;
      int out_rejected = 0;
      for (const auto& r : inside) in_ok += instance.handle(r).status == Status::kOk ? 1 : 0;
      for (const auto& r : outside) out_rejected += instance.handle(r).status == Status::kOutOfCoverage ? 1 : 0;
      const double accepted = in_ok + (per_side - out_rejected);
      return std::vector<double>{static_cast<double>(s),
                                 tau,
                                 static_cast<double>(per_side),
                                 static_cast<double>(in_ok) / per_side,
                                 static_cast<double>(per_side),
                                 static_cast<double>(out_rejected) / per_side,
                                 accepted,
                                 static_cast<double>(instance.counters().pose_estimations.load())};
    };

    auto row = evaluate(svc.recognizer_threshold);
    per_service.push_back({{"service_id", svc.service_id},
                           {"tau_p", svc.recognizer_threshold},
                           {"in_accept_rate", row[3]},
                           {"out_reject_rate", row[5]},
                           {"accepted", row[6]},
                           {"pose_estimations", row[7]}});
    res.table.rows.push_back(std::move(row));
    for (double tau : sweep) sweep_table.rows.push_back(evaluate(tau));
  }
  res.extra_tables.push_back(std::move(sweep_table));
  res.extra_names.push_back("recognizer_sweep");
  res.summary = {{"experiment", "recognizer"},
                 {"name", cfg.name},
                 {"seed", cfg.seed},
                 {"queries", per_side * 2 * static_cast<int>(n)},
                 {"services", per_service}};
  return res;
}

// --- output --------------------------------------------------------------

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

}  // namespace

void write_run(const MetricsReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "cycles.csv", report.cycles_csv());
  write_file(out_dir / "summary.json", report.summary_json());
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / (result.name + ".csv"), result.table.csv());
  for (std::size_t i = 0; i < result.extra_tables.size(); ++i) {
    write_file(out_dir / (result.extra_names[i] + ".csv"), result.extra_tables[i].csv());
  }
  write_file(out_dir / "summary.json", result.summary.dump(2) + "\n");
}

}  // namespace fedloc
