#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "fedloc/federation.hpp"

namespace fedloc {

/// Request/response exchange of length-prefixed frames with one endpoint.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Returns the framed response, or nullopt when the endpoint is unknown or
  /// does not answer within `timeout` seconds.
  virtual std::optional<std::string> exchange(const std::string& endpoint,
                                              const std::string& request_frame,
                                              double timeout) const = 0;
};

/// In-process transport. Services answer synchronously; a service whose
/// simulated latency exceeds the timeout is treated as unreachable. Safe for
/// concurrent exchanges once setup is complete.
class LoopbackTransport : public Transport {
 public:
  static constexpr const char* kRegistryEndpoint = "registry";

  void attach_registry(std::shared_ptr<const Registry> registry);
  void attach_service(std::shared_ptr<const VpsService> service);

  std::optional<std::string> exchange(const std::string& endpoint, const std::string& request_frame,
                                      double timeout) const override;

  std::int64_t exchanges() const { return exchanges_.load(); }

 private:
  std::string serve(const std::string& endpoint, const std::string& payload) const;

  std::shared_ptr<const Registry> registry_;
  std::map<std::string, std::shared_ptr<const VpsService>> services_;
  mutable std::atomic<std::int64_t> exchanges_{0};
};

}  // namespace fedloc
