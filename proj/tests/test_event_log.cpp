#include <doctest.h>

#include "argsim/backintime.hpp"
#include "argsim/event_log.hpp"

using namespace argsim;

namespace {

LogHeader header_for(const Arg& a, const SimConfig& c) {
  LogHeader h;
  h.engine = "backintime";
  h.n_samples = c.n_samples;
  h.rho = c.rho;
  h.density = c.density;
  h.seed = c.seed;
  h.replicate = c.replicate_index;
  h.events = a.event_count();
  h.checksum = state_checksum(a);
  return h;
}

}  // namespace

TEST_CASE("serialize, parse, serialize is byte-identical") {
  SimConfig c;
  c.n_samples = 4;
  c.rho = 1.5;
  c.density = BreakpointDensity::beta(2, 3);
  c.seed = 12;
  std::string all;
  for (std::uint64_t r = 0; r < 20; ++r) {
    c.replicate_index = r;
    Arg a = simulate_backintime(c);
    all += serialize_log(header_for(a, c), a);
  }
  auto records = parse_log_text(all);
  REQUIRE(records.size() == 20);
  std::string again;
  for (const auto& rec : records) again += serialize_log(rec.header, rec.events);
  CHECK(again == all);
  CHECK(records[3].header.replicate == 3);
  CHECK(records[3].header.density == c.density);
}

TEST_CASE("event lines use one-based ranks") {
  Arg a = Arg::replay(2, std::vector<TimedEvent>{{1.3, Coalesce{0, 1}}});
  SimConfig c;
  std::string text = serialize_log(header_for(a, c), a);
  CHECK(text.find(R"({"n":0,"t":1.3,"ev":{"type":"coal","i":1,"j":2}})") != std::string::npos);
}

TEST_CASE("parse errors carry line numbers") {
  Arg a = Arg::replay(3, std::vector<TimedEvent>{{0.5, Coalesce{0, 1}}, {1.0, Coalesce{0, 1}}});
  SimConfig c;
  c.n_samples = 3;
  std::string text = serialize_log(header_for(a, c), a);

  std::string truncated = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  try {
    parse_log_text(truncated);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }

  std::string cut = text.substr(0, text.size() - 5);
  try {
    parse_log_text(cut);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }

  CHECK_THROWS_AS(parse_log_text(""), ParseError);
  CHECK_THROWS_AS(parse_log_text("{\"format_version\":9}\n"), ParseError);
  std::string bad_type = text;
  bad_type.replace(bad_type.find("\"coal\""), 6, "\"merge\"");
  CHECK_THROWS_AS(parse_log_text(bad_type), ParseError);
}
