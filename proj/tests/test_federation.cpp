#include <doctest.h>

#include <memory>

#include "fedloc/error.hpp"
#include "fedloc/federation.hpp"
#include "fedloc/transport.hpp"
#include "support.hpp"

using namespace fedloc;
using fedloc::testing::deg;

namespace {

ServiceDescriptor service(const std::string& id, const std::string& domain, Vec2 center, double radius = 10.0) {
  ServiceDescriptor s;
  s.service_id = id;
  s.domain_name = domain;
  s.endpoint = id;
  s.frame = id;
  s.coverage.center = center;
  s.coverage.radius = radius;
  s.coverage.similarity_falloff = 2.0 * radius;
  return s;
}

LocalizeRequest request_at(const Pose& world, const std::string& id = "q") {
  return {id, WirePose::from_pose(world), 0.0};
}

}  // namespace

TEST_SUITE("federation") {
  TEST_CASE("place similarity formula") {
    auto s = service("a", "a.example.edu", Vec2(0, 0));
    s.coverage.similarity_falloff = 8.0;
    Rng rng(1);
    CHECK(place_similarity(s, Vec2(0, 0), rng) == 1.0);
    CHECK(place_similarity(s, Vec2(8, 0), rng) == 0.0);
    CHECK(place_similarity(s, Vec2(0, 4), rng) == doctest::Approx(0.5));
    CHECK(place_similarity(s, Vec2(100, 0), rng) == 0.0);
  }

  TEST_CASE("registry query") {
    const std::vector<ServiceDescriptor> reg{service("near", "museum.example.edu", Vec2(0, 0)),
                                             service("far", "far.example.edu", Vec2(100, 0)),
                                             service("shop", "shop.example.com", Vec2(3, 0)),
                                             service("tie-b", "b.example.edu", Vec2(0, 3)),
                                             service("tie-a", "a.example.edu", Vec2(0, -3))};
    RegistryQuery q;
    q.gps = {0.0, 0.0};
    auto out = registry_query(q, reg, 7, 0.0);
    REQUIRE(out.size() == 4);
    CHECK(out[0].service_id == "near");
    CHECK(out[1].service_id == "shop");
    CHECK(out[2].service_id == "tie-a");
    CHECK(out[3].service_id == "tie-b");

    q.gps = {100.0, 0.0};
    out = registry_query(q, reg, 7, 0.0);
    REQUIRE(out.size() == 1);
    CHECK(out[0].service_id == "far");

    q.gps = {0.0, 0.0};
    q.tld_whitelist = std::vector<std::string>{".edu"};
    out = registry_query(q, reg, 7, 0.0);
    for (const auto& s : out) CHECK(s.service_id != "shop");
    CHECK(out.size() == 3);
  }

  TEST_CASE("registry sampling is deterministic") {
    std::vector<ServiceDescriptor> reg;
    for (int i = 0; i < 5; ++i) reg.push_back(service("s" + std::to_string(i), "x.example.edu", Vec2(i, 0)));
    RegistryQuery q;
    q.gps = {0.0, 0.0};
    q.max_services = 2;
    const auto a = registry_query(q, reg, 99);
    const auto b = registry_query(q, reg, 99);
    REQUIRE(a.size() == 2);
    CHECK(a[0].service_id == b[0].service_id);
    CHECK(a[1].service_id == b[1].service_id);
  }

  TEST_CASE("registry slack models gps error") {
    const std::vector<ServiceDescriptor> reg{service("a", "a.example.edu", Vec2(0, 0), 5.0)};
    RegistryQuery q;
    q.gps = {12.0, 0.0};
    CHECK(registry_query(q, reg, 1, 0.0).empty());
    CHECK(registry_query(q, reg, 1, kDefaultDiscoverySlack).size() == 1);
  }

  TEST_CASE("registry rejects duplicates") {
    std::vector<ServiceDescriptor> reg{service("a", "a.example.edu", Vec2(0, 0)),
                                       service("a", "b.example.edu", Vec2(1, 0))};
    CHECK_THROWS_AS(Registry(reg, 1), Error);
  }

  TEST_CASE("gating") {
    auto s = service("a", "a.example.edu", Vec2(0, 0), 5.0);
    ServiceCounters c;
    Rng rng(2);
    const auto out = handle_localize(s, request_at(translate(50, 0, 1.5)), rng, &c);
    CHECK(out.status == Status::kOutOfCoverage);
    CHECK_FALSE(out.pose);
    CHECK(c.pose_estimations.load() == 0);
    CHECK(c.requests.load() == 1);
  }

  TEST_CASE("in coverage, zero noise") {
    auto s = service("a", "a.example.edu", Vec2(0, 0));
    s.frame_transform_from_world = translate(5, 0, 0);
    s.confidence_jitter = 0.0;
    const Pose world = translate(1, 2, 1.5) * rot_z(0.3);
    Rng rng(3);
    ServiceCounters c;
    const auto out = handle_localize(s, request_at(world), rng, &c);
    REQUIRE(out.status == Status::kOk);
    const Pose expected = translate(5, 0, 0) * world;
    CHECK((out.pose->to_pose().matrix() - expected.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(*out.confidence >= 0.97);
    CHECK(c.pose_estimations.load() == 1);

    // Default jitter still leaves a noiseless answer near full confidence.
    s.confidence_jitter = 0.02;
    int high = 0;
    for (int i = 0; i < 1000; ++i) {
      Rng r(derive_seed(4, static_cast<std::uint64_t>(i)));
      high += *handle_localize(s, request_at(world), r).confidence >= 0.97 ? 1 : 0;
    }
    CHECK(high >= 900);
  }

  TEST_CASE("malicious and absent confidence") {
    auto s = service("m", "m.example.com", Vec2(0, 0));
    s.noise.sigma_t = 1.0;
    s.confidence_mode = ConfidenceMode::kMalicious;
    Rng rng(5);
    for (int i = 0; i < 20; ++i) CHECK(*handle_localize(s, request_at(translate(1, 1, 1.5)), rng).confidence == 0.99);
    s.confidence_mode = ConfidenceMode::kAbsent;
    CHECK_FALSE(handle_localize(s, request_at(translate(1, 1, 1.5)), rng).confidence);
  }

  TEST_CASE("honest confidence falls with error") {
    auto s = service("h", "h.example.edu", Vec2(0, 0));
    s.noise.sigma_t = 0.3;
    s.noise.sigma_r = deg(5);
    // Least-squares slope of confidence against injected translation error.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      Rng rng(derive_seed(6, static_cast<std::uint64_t>(i)));
      const Pose world = translate(1, 1, 1.5);
      const auto out = handle_localize(s, request_at(world), rng);
      const double e = translation_distance(out.pose->to_pose(), s.frame_transform_from_world * world);
      sx += e;
      sy += *out.confidence;
      sxx += e * e;
      sxy += e * *out.confidence;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope < 0.0);
  }

  TEST_CASE("false matches land in the service's own coverage") {
    auto s = service("a", "a.example.edu", Vec2(0, 0), 5.0);
    s.recognizer_threshold = 0.0;
    Rng rng(7);
    const auto out = handle_localize(s, request_at(translate(30, 0, 1.5)), rng);
    REQUIRE(out.status == Status::kOk);
    const Pose world = s.frame_transform_from_world.inverse() * out.pose->to_pose();
    CHECK(s.coverage.contains(ground_position(world)));
  }

  TEST_CASE("service streams depend only on seed, service and query") {
    auto s = service("a", "a.example.edu", Vec2(0, 0));
    s.noise.sigma_t = 0.5;
    const VpsService one(s, 11);
    const VpsService two(s, 11);
    const auto req = request_at(translate(1, 0, 1.5), "same");
    one.handle(request_at(translate(2, 0, 1.5), "other"));
    CHECK(one.handle(req) == two.handle(req));
    CHECK(one.counters().requests.load() == 2);
  }

  TEST_CASE("descriptor validation") {
    auto s = service("a", "a.example.edu", Vec2(0, 0));
    s.recognizer_threshold = -0.1;
    CHECK_THROWS_AS(s.validate(), Error);
    s = service("", "a.example.edu", Vec2(0, 0));
    CHECK_THROWS_AS(s.validate(), Error);
  }

  TEST_CASE("loopback transport") {
    auto s = service("a", "a.example.edu", Vec2(0, 0));
    auto svc = std::make_shared<VpsService>(s, 1);
    auto registry = std::make_shared<Registry>(std::vector<ServiceDescriptor>{s}, 1);
    LoopbackTransport t;
    t.attach_registry(registry);
    t.attach_service(svc);
    CHECK_THROWS_AS(t.attach_service(svc), Error);

    const auto reply = t.exchange("a", frame_payload(encode_message(request_at(translate(1, 0, 1.5)))), 0.5);
    REQUIRE(reply);
    FrameReader reader;
    reader.feed(*reply);
    const auto msg = decode_message(*reader.next());
    CHECK(std::get<LocalizeResponse>(msg).status == Status::kOk);

    CHECK_FALSE(t.exchange("nobody", frame_payload("{}"), 0.5));

    // Garbage payloads get an ERROR answer, not a crash.
    const auto bad = t.exchange("a", frame_payload("{\"type\":\"localize_request\"}"), 0.5);
    REQUIRE(bad);
    FrameReader r2;
    r2.feed(*bad);
    CHECK(std::get<LocalizeResponse>(decode_message(*r2.next())).status == Status::kError);

    RegistryQuery q;
    const auto reg_reply = t.exchange(LoopbackTransport::kRegistryEndpoint, frame_payload(encode_message(q)), 0.5);
    REQUIRE(reg_reply);
    FrameReader r3;
    r3.feed(*reg_reply);
    CHECK(std::get<RegistryResult>(decode_message(*r3.next())).services.size() == 1);
    CHECK(registry->query_count() == 1);
  }

  TEST_CASE("slow services time out") {
    auto s = service("slow", "a.example.edu", Vec2(0, 0));
    s.latency = 2.0;
    LoopbackTransport t;
    t.attach_service(std::make_shared<VpsService>(s, 1));
    CHECK_FALSE(t.exchange("slow", frame_payload(encode_message(request_at(Pose()))), 0.5));
  }
}
