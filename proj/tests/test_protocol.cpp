#include <doctest.h>

#include <limits>

#include "fedloc/error.hpp"
#include "fedloc/protocol.hpp"
#include "message_gen.hpp"

using namespace fedloc;
using fedloc::testing::any_message;

namespace {

bool bit_equal(const Message& a, const Message& b) {
  // operator== treats -0.0 == 0.0; compare encodings as well.
  return a == b && encode_message(a) == encode_message(b);
}

std::string decode_error_of(const std::string& text) {
  try {
    decode_message(text);
  } catch (const DecodeError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("protocol") {
  TEST_CASE("fuzzed round trip") {
    Rng rng(1234);
    for (int i = 0; i < 1000; ++i) {
      const Message m = any_message(rng);
      const std::string bytes = encode_message(m);
      const Message back = decode_message(bytes);
      REQUIRE(bit_equal(m, back));
      CHECK(encode_message(back) == bytes);
    }
  }

  TEST_CASE("negative zero survives") {
    LocalizeRequest r{"q", {}, -0.0};
    const auto back = std::get<LocalizeRequest>(decode_message(encode_message(r)));
    CHECK(std::signbit(back.timestamp));
  }

  TEST_CASE("canonical key order") {
    LocalizeResponse r;
    r.query_id = "q1";
    r.status = Status::kOutOfCoverage;
    r.service_id = "s";
    r.frame = "f";
    CHECK(encode_message(r) ==
          R"({"type":"localize_response","query_id":"q1","status":"OUT_OF_COVERAGE","service_id":"s","frame":"f"})");
  }

  TEST_CASE("canonical malformed messages") {
    CHECK(decode_error_of(R"({"type":"localize_response","query_id":"q","status":"BANANA","service_id":"s","frame":"f"})") ==
          "invalid status");
    CHECK(decode_error_of(R"({"type":"localize_response","query_id":"q","status":"OK","confidence":0.5,"service_id":"s","frame":"f"})") ==
          "missing pose");
    CHECK(decode_error_of(R"({"type":"localize_request","query_id":"q","pose":{"t":[0.0,0.0,0.0],"q":[1.0,0.0,0.0,0.0]},"timestamp":1e999})") ==
          "non-finite timestamp");
  }

  TEST_CASE("other decode errors") {
    CHECK(decode_error_of("not json").rfind("malformed message", 0) == 0);
    CHECK(decode_error_of(R"({"type":"hello"})") == "unknown message type");
    CHECK(decode_error_of(R"({"query_id":"q"})") == "missing type");
    CHECK(decode_error_of(R"({"type":"localize_request","query_id":"q","pose":{"t":[0.0,0.0,0.0],"q":[2.0,0.0,0.0,0.0]},"timestamp":1.0})") ==
          "invalid q");
    CHECK(decode_error_of(R"({"type":"localize_response","query_id":"q","status":"ERROR","confidence":1.5,"service_id":"s","frame":"f"})") ==
          "invalid confidence");
    try {
      decode_message(R"({"type":"registry_query","gps":[1.0]})");
      FAIL("expected a decode error");
    } catch (const DecodeError& e) {
      CHECK(e.key() == "gps");
    }
  }

  TEST_CASE("encoder refuses non-finite numbers") {
    LocalizeRequest r{"q", {}, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(encode_message(r), Error);
  }

  TEST_CASE("framing") {
    const std::string a = frame_payload("hello");
    CHECK(a.size() == 9);
    CHECK(a.substr(0, 4) == std::string("\0\0\0\5", 4));
    FrameReader reader;
    const std::string both = a + frame_payload("");
    reader.feed(both.substr(0, 3));
    CHECK_FALSE(reader.next());
    reader.feed(both.substr(3));
    CHECK(reader.next() == "hello");
    CHECK(reader.next() == "");
    CHECK_FALSE(reader.next());
    CHECK(reader.buffered() == 0);

    FrameReader huge;
    huge.feed(std::string("\x7f\xff\xff\xff", 4));
    CHECK_THROWS_AS(huge.next(), Error);
  }
}
