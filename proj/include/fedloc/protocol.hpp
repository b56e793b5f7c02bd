#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fedloc/se3.hpp"

namespace fedloc {

/// Pose as it travels on the wire: translation [x, y, z] in meters and unit
/// quaternion [w, x, y, z] with w >= 0.
struct WirePose {
  std::array<double, 3> t{0.0, 0.0, 0.0};
  std::array<double, 4> q{1.0, 0.0, 0.0, 0.0};

  static WirePose from_pose(const Pose& p);
  Pose to_pose() const;
  bool operator==(const WirePose&) const = default;
};

enum class Status { kOk, kOutOfCoverage, kError };

std::string_view to_string(Status s);
std::optional<Status> parse_status(std::string_view s);

struct LocalizeRequest {
  std::string query_id;
  WirePose pose;  // stands in for the query image
  double timestamp = 0.0;
  bool operator==(const LocalizeRequest&) const = default;
};

struct LocalizeResponse {
  std::string query_id;
  Status status = Status::kError;
  std::optional<WirePose> pose;  // present iff status == kOk
  std::optional<double> confidence;
  std::string service_id;
  FrameId frame;
  bool operator==(const LocalizeResponse&) const = default;
};

struct RegistryQuery {
  std::array<double, 2> gps{0.0, 0.0};
  std::optional<std::vector<std::string>> tld_whitelist;
  std::optional<std::int64_t> max_services;
  bool operator==(const RegistryQuery&) const = default;
};

struct ServiceRecord {
  std::string service_id;
  std::string domain_name;
  std::string endpoint;
  FrameId frame;
  bool operator==(const ServiceRecord&) const = default;
};

struct RegistryResult {
  std::vector<ServiceRecord> services;
  bool operator==(const RegistryResult&) const = default;
};

using Message = std::variant<LocalizeRequest, LocalizeResponse, RegistryQuery, RegistryResult>;

/// Canonical JSON text: fixed key order, doubles with 17 significant digits.
std::string encode_message(const Message& msg);
/// Throws DecodeError naming the offending key.
Message decode_message(std::string_view bytes);

/// Prefixes the payload with its length as 4 big-endian bytes.
std::string frame_payload(std::string_view payload);

/// Reassembles length-prefixed frames from an arbitrary chunking of the
/// byte stream.
class FrameReader {
 public:
  static constexpr std::size_t kMaxFrame = 16u << 20;

  void feed(std::string_view bytes) { buffer_.append(bytes); }
  /// Next complete payload, if one is buffered. Throws Error("frame too large").
  std::optional<std::string> next();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

}  // namespace fedloc
