#include "fedloc/protocol.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "fedloc/error.hpp"

namespace fedloc {

namespace {

using nlohmann::json;

void put_number(std::string& out, double v) {
  if (!std::isfinite(v)) throw Error("cannot encode non-finite number");
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
  // Keep a fraction or exponent so the value reads back as a double
  // (preserves -0.0).
  if (std::string_view(buf, static_cast<std::size_t>(n)).find_first_of(".e") == std::string_view::npos) {
    out += ".0";
  }
}

void put_string(std::string& out, std::string_view s) { out += json(std::string(s)).dump(); }

void put_key(std::string& out, std::string_view key, bool& first) {
  if (!first) out += ',';
  first = false;
  put_string(out, key);
  out += ':';
}

template <std::size_t N>
void put_array(std::string& out, const std::array<double, N>& a) {
  out += '[';
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out += ',';
    put_number(out, a[i]);
  }
  out += ']';
}

void put_pose(std::string& out, const WirePose& p) {
  out += "{\"t\":";
  put_array(out, p.t);
  out += ",\"q\":";
  put_array(out, p.q);
  out += '}';
}

struct Encoder {
  std::string out;

  void operator()(const LocalizeRequest& m) {
    bool first = true;
    out += '{';
    put_key(out, "type", first);
    put_string(out, "localize_request");
    put_key(out, "query_id", first);
    put_string(out, m.query_id);
    put_key(out, "pose", first);
    put_pose(out, m.pose);
    put_key(out, "timestamp", first);
    put_number(out, m.timestamp);
    out += '}';
  }

  void operator()(const LocalizeResponse& m) {
    bool first = true;
    out += '{';
    put_key(out, "type", first);
    put_string(out, "localize_response");
    put_key(out, "query_id", first);
    put_string(out, m.query_id);
    put_key(out, "status", first);
    put_string(out, to_string(m.status));
    if (m.pose) {
      put_key(out, "pose", first);
      put_pose(out, *m.pose);
    }
    if (m.confidence) {
      put_key(out, "confidence", first);
      put_number(out, *m.confidence);
    }
    put_key(out, "service_id", first);
    put_string(out, m.service_id);
    put_key(out, "frame", first);
    put_string(out, m.frame);
    out += '}';
  }

  void operator()(const RegistryQuery& m) {
    bool first = true;
    out += '{';
    put_key(out, "type", first);
    put_string(out, "registry_query");
    put_key(out, "gps", first);
    put_array(out, m.gps);
    if (m.tld_whitelist) {
      put_key(out, "tld_whitelist", first);
      out += '[';
      for (std::size_t i = 0; i < m.tld_whitelist->size(); ++i) {
        if (i) out += ',';
        put_string(out, (*m.tld_whitelist)[i]);
      }
      out += ']';
    }
    if (m.max_services) {
      put_key(out, "max_services", first);
      out += std::to_string(*m.max_services);
    }
    out += '}';
  }

  void operator()(const RegistryResult& m) {
    bool first = true;
    out += '{';
    put_key(out, "type", first);
    put_string(out, "registry_result");
    put_key(out, "services", first);
    out += '[';
    for (std::size_t i = 0; i < m.services.size(); ++i) {
      if (i) out += ',';
      const auto& s = m.services[i];
      bool f = true;
      out += '{';
      put_key(out, "service_id", f);
      put_string(out, s.service_id);
      put_key(out, "domain_name", f);
      put_string(out, s.domain_name);
      put_key(out, "endpoint", f);
      put_string(out, s.endpoint);
      put_key(out, "frame", f);
      put_string(out, s.frame);
      out += '}';
    }
    out += "]}";
  }
};

// --- decoding ---

const json& require(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DecodeError(key, "missing " + key);
  return *it;
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw DecodeError(key, "invalid " + key);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw DecodeError(key, "non-finite " + key);
  return d;
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw DecodeError(key, "invalid " + key);
  return v.get<std::string>();
}

template <std::size_t N>
std::array<double, N> get_array(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != N) throw DecodeError(key, "invalid " + key);
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = get_number(v[i], key);
  return out;
}

WirePose get_pose(const json& v) {
  if (!v.is_object()) throw DecodeError("pose", "invalid pose");
  WirePose p;
  p.t = get_array<3>(require(v, "t"), "t");
  p.q = get_array<4>(require(v, "q"), "q");
  const double norm = std::sqrt(p.q[0] * p.q[0] + p.q[1] * p.q[1] + p.q[2] * p.q[2] + p.q[3] * p.q[3]);
  if (std::abs(norm - 1.0) > 1e-6 || p.q[0] < 0.0) throw DecodeError("q", "invalid q");
  return p;
}

LocalizeRequest decode_request(const json& j) {
  LocalizeRequest m;
  m.query_id = get_string(require(j, "query_id"), "query_id");
  m.pose = get_pose(require(j, "pose"));
  m.timestamp = get_number(require(j, "timestamp"), "timestamp");
  return m;
}

LocalizeResponse decode_response(const json& j) {
  LocalizeResponse m;
  m.query_id = get_string(require(j, "query_id"), "query_id");
  const auto status = parse_status(get_string(require(j, "status"), "status"));
  if (!status) throw DecodeError("status", "invalid status");
  m.status = *status;
  if (auto it = j.find("pose"); it != j.end()) m.pose = get_pose(*it);
  if (m.status == Status::kOk && !m.pose) throw DecodeError("pose", "missing pose");
  if (m.status != Status::kOk && m.pose) throw DecodeError("pose", "unexpected pose");
  if (auto it = j.find("confidence"); it != j.end()) {
    const double c = get_number(*it, "confidence");
    if (c < 0.0 || c > 1.0) throw DecodeError("confidence", "invalid confidence");
    m.confidence = c;
  }
  m.service_id = get_string(require(j, "service_id"), "service_id");
  m.frame = get_string(require(j, "frame"), "frame");
  return m;
}

RegistryQuery decode_registry_query(const json& j) {
  RegistryQuery m;
  m.gps = get_array<2>(require(j, "gps"), "gps");
  if (auto it = j.find("tld_whitelist"); it != j.end()) {
    if (!it->is_array()) throw DecodeError("tld_whitelist", "invalid tld_whitelist");
    std::vector<std::string> list;
    for (const auto& s : *it) list.push_back(get_string(s, "tld_whitelist"));
    m.tld_whitelist = std::move(list);
  }
  if (auto it = j.find("max_services"); it != j.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 1) {
      throw DecodeError("max_services", "invalid max_services");
    }
    m.max_services = it->get<std::int64_t>();
  }
  return m;
}

RegistryResult decode_registry_result(const json& j) {
  const json& list = require(j, "services");
  if (!list.is_array()) throw DecodeError("services", "invalid services");
  RegistryResult m;
  for (const auto& s : list) {
    if (!s.is_object()) throw DecodeError("services", "invalid services");
    m.services.push_back({get_string(require(s, "service_id"), "service_id"),
                          get_string(require(s, "domain_name"), "domain_name"),
                          get_string(require(s, "endpoint"), "endpoint"),
                          get_string(require(s, "frame"), "frame")});
  }
  return m;
}

}  // namespace

WirePose WirePose::from_pose(const Pose& p) {
  const Eigen::Quaterniond q = p.quaternion();
  return {{p.translation().x(), p.translation().y(), p.translation().z()},
          {q.w(), q.x(), q.y(), q.z()}};
}

Pose WirePose::to_pose() const {
  return Pose::from_quaternion(Eigen::Quaterniond(q[0], q[1], q[2], q[3]), Vec3(t[0], t[1], t[2]));
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kOk: return "OK";
    case Status::kOutOfCoverage: return "OUT_OF_COVERAGE";
    case Status::kError: return "ERROR";
  }
  return "ERROR";
}

std::optional<Status> parse_status(std::string_view s) {
  if (s == "OK") return Status::kOk;
  if (s == "OUT_OF_COVERAGE") return Status::kOutOfCoverage;
  if (s == "ERROR") return Status::kError;
  return std::nullopt;
}

std::string encode_message(const Message& msg) {
  Encoder enc;
  std::visit(enc, msg);
  return std::move(enc.out);
}

namespace {

// DOM builder that names the key whose number overflows a double.
class DomBuilder : public nlohmann::detail::json_sax_dom_parser<json> {
 public:
  explicit DomBuilder(json& root) : json_sax_dom_parser(root, true) {}

  bool key(json::string_t& k) {
    last_key_ = k;
    return json_sax_dom_parser::key(k);
  }

  template <class Exception>
  bool parse_error(std::size_t, const std::string&, const Exception& ex) {
    if (ex.id == 406) throw DecodeError(last_key_, "non-finite " + last_key_);
    throw DecodeError("", std::string("malformed message: ") + ex.what());
  }

 private:
  std::string last_key_;
};

}  // namespace

Message decode_message(std::string_view bytes) {
  json j;
  DomBuilder builder(j);
  json::sax_parse(bytes, &builder);
  if (!j.is_object()) throw DecodeError("", "malformed message: not an object");
  const std::string type = get_string(require(j, "type"), "type");
  if (type == "localize_request") return decode_request(j);
  if (type == "localize_response") return decode_response(j);
  if (type == "registry_query") return decode_registry_query(j);
  if (type == "registry_result") return decode_registry_result(j);
  throw DecodeError("type", "unknown message type");
}

std::string frame_payload(std::string_view payload) {
  if (payload.size() > FrameReader::kMaxFrame) throw Error("frame too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(payload.size() + 4);
  out += static_cast<char>((n >> 24) & 0xff);
  out += static_cast<char>((n >> 16) & 0xff);
  out += static_cast<char>((n >> 8) & 0xff);
  out += static_cast<char>(n & 0xff);
  out.append(payload);
  return out;
}

std::optional<std::string> FrameReader::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const auto byte = [this](std::size_t i) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i]));
  };
  const std::uint32_t n = (byte(0) << 24) | (byte(1) << 16) | (byte(2) << 8) | byte(3);
  if (n > kMaxFrame) throw Error("frame too large");
  if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  std::string payload = buffer_.substr(4, n);
  buffer_.erase(0, 4 + static_cast<std::size_t>(n));
  return payload;
}

}  // namespace fedloc
