#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fedloc/error.hpp"
#include "fedloc/scenario.hpp"

namespace fedloc {

namespace {

using nlohmann::json;

// Reads fields from one JSON object and rejects keys nobody asked for, so a
// typo in a config fails loudly instead of silently using a default.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw Error(where_ + ": expected an object");
  }
  ~Fields() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) throw Error(where_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw Error(where_ + ": missing key '" + key + "'");
    return obj_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw Error(where_ + ": '" + key + "' must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw Error(where_ + ": '" + key + "' must be an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    return has(key) ? integer(key) : fallback;
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw Error(where_ + ": '" + key + "' must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  Vec2 vec2(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw Error(where_ + ": '" + key + "' must be [x, y]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  const std::string& where() const { return where_; }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

Pose parse_pose(const json& j, const std::string& where) {
  Fields f(j, where);
  const json& t = f.at("t");
  if (!t.is_array() || t.size() != 3) throw Error(where + ": 't' must be [x, y, z]");
  const Vec3 translation(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
  if (f.has("q")) {
    const json& q = f.at("q");
    if (!q.is_array() || q.size() != 4) throw Error(where + ": 'q' must be [w, x, y, z]");
    return Pose::from_quaternion(
        Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()),
        translation);
  }
  const double yaw = f.number("yaw", 0.0);
  return Pose(axis_angle(Vec3::UnitZ(), yaw), translation);
}

NoiseModel parse_noise(const json& j, const std::string& where) {
  Fields f(j, where);
  NoiseModel n;
  n.sigma_t = f.number("sigma_t", 0.0);
  n.sigma_r = f.number("sigma_r", 0.0);
  n.p_outlier = f.number("p_outlier", 0.0);
  n.outlier_t_range = f.number("outlier_t_range", 0.0);
  n.outlier_r_range = f.number("outlier_r_range", 0.0);
  return n;
}

ServiceDescriptor parse_service(const json& j, std::size_t index) {
  Fields f(j, "services[" + std::to_string(index) + "]");
  ServiceDescriptor s;
  s.service_id = f.string("service_id");
  s.domain_name = f.string("domain_name");
  s.endpoint = f.string("endpoint", s.service_id);
  s.frame = f.string("frame", s.service_id);
  if (f.has("frame_transform_from_world")) {
    s.frame_transform_from_world = parse_pose(f.at("frame_transform_from_world"),
                                              f.where() + ".frame_transform_from_world");
  }
  {
    Fields c(f.at("coverage"), f.where() + ".coverage");
    s.coverage.center = c.vec2("center");
    s.coverage.radius = c.number("radius");
    s.coverage.similarity_falloff = c.number("similarity_falloff", 2.0 * s.coverage.radius);
  }
  if (f.has("noise")) s.noise = parse_noise(f.at("noise"), f.where() + ".noise");
  s.confidence_mode = parse_confidence_mode(f.string("confidence_mode", "honest"));
  s.similarity_noise = f.number("similarity_noise", s.similarity_noise);
  s.recognizer_threshold = f.number("recognizer_threshold", s.recognizer_threshold);
  s.confidence_lambda_t = f.number("confidence_lambda_t", s.confidence_lambda_t);
  s.confidence_lambda_r = f.number("confidence_lambda_r", s.confidence_lambda_r);
  s.confidence_jitter = f.number("confidence_jitter", s.confidence_jitter);
  s.malicious_confidence = f.number("malicious_confidence", s.malicious_confidence);
  s.latency = f.number("latency", s.latency);
  return s;
}

ClientConfig parse_client(const json& j) {
  Fields f(j, "client");
  ClientConfig c;
  c.cycle_interval = f.number("cycle_interval", c.cycle_interval);
  c.timeout_fraction = f.number("timeout_fraction", c.timeout_fraction);
  c.max_broadcast = static_cast<int>(f.integer("max_broadcast", c.max_broadcast));
  if (f.has("tld_whitelist")) {
    std::vector<std::string> list;
    for (const auto& s : f.at("tld_whitelist")) list.push_back(s.get<std::string>());
    c.tld_whitelist = std::move(list);
  }
  c.selector.tau = f.number("tau_confidence", c.selector.tau);
  c.selector.rediscovery_window = static_cast<int>(f.integer("rediscovery_window", c.selector.rediscovery_window));
  c.selector.delta = f.number("delta", c.selector.delta);
  c.selector.streak_limit = static_cast<int>(f.integer("streak_limit", c.selector.streak_limit));
  c.selector.lambda_ate = f.number("lambda_ate", c.selector.lambda_ate);
  c.selector.track_window = static_cast<std::size_t>(
      f.integer("track_window", static_cast<std::int64_t>(c.selector.track_window)));
  c.stitch_k = static_cast<int>(f.integer("stitch_k", c.stitch_k));
  c.stitch_max_new = static_cast<int>(f.integer("stitch_max_new", c.stitch_max_new));
  c.stitch_history = static_cast<std::size_t>(
      f.integer("stitch_history", static_cast<std::int64_t>(c.stitch_history)));
  c.anchor_frame = f.string("anchor_frame", c.anchor_frame);
  return c;
}

ScenarioConfig parse_config_json(const json& j);

json pose_json(const Pose& p) {
  const auto w = WirePose::from_pose(p);
  return {{"t", w.t}, {"q", w.q}};
}

}  // namespace

void ScenarioConfig::validate() const {
  if (services.empty()) throw Error("invalid config: at least one service required");
  std::set<std::string> ids;
  std::set<std::string> endpoints;
  for (const auto& s : services) {
    s.validate();
    if (!ids.insert(s.service_id).second) throw Error("invalid config: duplicate service_id " + s.service_id);
    if (!endpoints.insert(s.endpoint).second) throw Error("invalid config: duplicate endpoint " + s.endpoint);
    if (s.frame == client.anchor_frame) throw Error("invalid config: service frame equals anchor frame");
  }
  if (device_path.waypoints.empty()) throw Error("no waypoints");
  if (device_path.waypoints.size() < 2) throw Error("invalid config: at least two waypoints required");
  if (!(device_path.speed > 0.0)) throw Error("invalid config: device_path.speed");
  if (!std::isfinite(device_path.height)) throw Error("invalid config: device_path.height");
  if (!(duration > 0.0)) throw Error("invalid config: duration");
  if (!(world.max.x() > world.min.x() && world.max.y() > world.min.y())) throw Error("invalid config: world");
  vio.validate();
  client.validate();
}

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig cfg;
  try {
    cfg = parse_config_json(j);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

namespace {

ScenarioConfig parse_config_json(const json& j) {
  Fields f(j, "config");
  ScenarioConfig cfg;
  cfg.name = f.string("name", "");
  const json& seed = f.at("seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) throw Error("config: 'seed' must be an integer");
  cfg.seed = seed.get<std::uint64_t>();
  if (f.has("world")) {
    Fields w(f.at("world"), "world");
    cfg.world.min = w.vec2("min");
    cfg.world.max = w.vec2("max");
  }
  const json& services = f.at("services");
  if (!services.is_array()) throw Error("config: 'services' must be a list");
  for (std::size_t i = 0; i < services.size(); ++i) cfg.services.push_back(parse_service(services[i], i));
  {
    Fields p(f.at("device_path"), "device_path");
    const json& wps = p.at("waypoints");
    if (!wps.is_array()) throw Error("device_path: 'waypoints' must be a list");
    for (std::size_t i = 0; i < wps.size(); ++i) {
      Fields w(wps[i], "waypoints[" + std::to_string(i) + "]");
      cfg.device_path.waypoints.push_back({w.vec2("position"), w.number("heading", 0.0)});
    }
    cfg.device_path.speed = p.number("speed", cfg.device_path.speed);
    cfg.device_path.height = p.number("height", cfg.device_path.height);
  }
  if (f.has("vio")) {
    Fields v(f.at("vio"), "vio");
    cfg.vio.drift_t_per_m = v.number("drift_t_per_m", 0.0);
    cfg.vio.drift_r_per_m = v.number("drift_r_per_m", 0.0);
  }
  if (f.has("client")) cfg.client = parse_client(f.at("client"));
  cfg.duration = f.number("duration");
  return cfg;
}

}  // namespace

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const ScenarioConfig& cfg) {
  json services = json::array();
  for (const auto& s : cfg.services) {
    services.push_back({
        {"service_id", s.service_id},
        {"domain_name", s.domain_name},
        {"endpoint", s.endpoint},
        {"frame", s.frame},
        {"frame_transform_from_world", pose_json(s.frame_transform_from_world)},
        {"coverage",
         {{"center", {s.coverage.center.x(), s.coverage.center.y()}},
          {"radius", s.coverage.radius},
          {"similarity_falloff", s.coverage.similarity_falloff}}},
        {"noise",
         {{"sigma_t", s.noise.sigma_t},
          {"sigma_r", s.noise.sigma_r},
          {"p_outlier", s.noise.p_outlier},
          {"outlier_t_range", s.noise.outlier_t_range},
          {"outlier_r_range", s.noise.outlier_r_range}}},
        {"confidence_mode", std::string(to_string(s.confidence_mode))},
        {"similarity_noise", s.similarity_noise},
        {"recognizer_threshold", s.recognizer_threshold},
        {"confidence_lambda_t", s.confidence_lambda_t},
        {"confidence_lambda_r", s.confidence_lambda_r},
        {"confidence_jitter", s.confidence_jitter},
        {"malicious_confidence", s.malicious_confidence},
        {"latency", s.latency},
    });
  }
  json waypoints = json::array();
  for (const auto& w : cfg.device_path.waypoints) {
    waypoints.push_back({{"position", {w.position.x(), w.position.y()}}, {"heading", w.heading}});
  }
  const auto& c = cfg.client;
  json client = {
      {"cycle_interval", c.cycle_interval},
      {"timeout_fraction", c.timeout_fraction},
      {"max_broadcast", c.max_broadcast},
      {"tau_confidence", c.selector.tau},
      {"rediscovery_window", c.selector.rediscovery_window},
      {"delta", c.selector.delta},
      {"streak_limit", c.selector.streak_limit},
      {"lambda_ate", c.selector.lambda_ate},
      {"track_window", c.selector.track_window},
      {"stitch_k", c.stitch_k},
      {"stitch_max_new", c.stitch_max_new},
      {"stitch_history", c.stitch_history},
      {"anchor_frame", c.anchor_frame},
  };
  if (c.tld_whitelist) client["tld_whitelist"] = *c.tld_whitelist;
  return {
      {"name", cfg.name},
      {"seed", cfg.seed},
      {"world", {{"min", {cfg.world.min.x(), cfg.world.min.y()}}, {"max", {cfg.world.max.x(), cfg.world.max.y()}}}},
      {"services", services},
      {"device_path", {{"waypoints", waypoints}, {"speed", cfg.device_path.speed}, {"height", cfg.device_path.height}}},
      {"vio", {{"drift_t_per_m", cfg.vio.drift_t_per_m}, {"drift_r_per_m", cfg.vio.drift_r_per_m}}},
      {"client", client},
      {"duration", cfg.duration},
  };
}

}  // namespace fedloc
