#include "fedloc/transport.hpp"

#include "fedloc/error.hpp"

namespace fedloc {

void LoopbackTransport::attach_registry(std::shared_ptr<const Registry> registry) {
  registry_ = std::move(registry);
}

void LoopbackTransport::attach_service(std::shared_ptr<const VpsService> service) {
  const std::string& endpoint = service->descriptor().endpoint;
  if (!services_.emplace(endpoint, std::move(service)).second) {
    throw Error("duplicate endpoint: " + endpoint);
  }
}

std::optional<std::string> LoopbackTransport::exchange(const std::string& endpoint,
                                                       const std::string& request_frame,
                                                       double timeout) const {
  ++exchanges_;
  if (endpoint != kRegistryEndpoint) {
    auto it = services_.find(endpoint);
    if (it == services_.end() || it->second->descriptor().latency > timeout) return std::nullopt;
  } else if (!registry_) {
    return std::nullopt;
  }

  FrameReader reader;
  reader.feed(request_frame);
  auto payload = reader.next();
  if (!payload || reader.buffered() != 0) throw Error("malformed request frame");
  return frame_payload(serve(endpoint, *payload));
}

std::string LoopbackTransport::serve(const std::string& endpoint, const std::string& payload) const {
  if (endpoint == kRegistryEndpoint) {
    const Message msg = decode_message(payload);
    const auto* q = std::get_if<RegistryQuery>(&msg);
    if (!q) throw Error("registry expects registry_query");
    return encode_message(registry_->query(*q));
  }
  const VpsService& svc = *services_.at(endpoint);
  try {
    const Message msg = decode_message(payload);
    if (const auto* req = std::get_if<LocalizeRequest>(&msg)) return encode_message(svc.handle(*req));
  } catch (const DecodeError&) {
  }
  LocalizeResponse err;
  err.status = Status::kError;
  err.service_id = svc.descriptor().service_id;
  err.frame = svc.descriptor().frame;
  return encode_message(err);
}

}  // namespace fedloc
