#include "argsim/event_log.hpp"

#include <istream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace argsim {

using nlohmann::json;

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

std::string format_checksum(std::uint64_t sum) { return fmt::format("{:016x}", sum); }

std::string serialize_log(const LogHeader& h, std::span<const TimedEvent> events) {
  std::string out = fmt::format(
      "{{\"format_version\":{},\"engine\":\"{}\",\"N\":{},\"rho\":{:.17g},\"density\":\"{}\",\"seed\":{},"
      "\"replicate\":{},\"events\":{},\"checksum\":\"{}\"}}\n",
      h.format_version, h.engine, h.n_samples, h.rho, h.density.to_string(), h.seed, h.replicate, events.size(),
      format_checksum(h.checksum));
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& te = events[k];
    if (const auto* c = std::get_if<Coalesce>(&te.event)) {
      out += fmt::format("{{\"n\":{},\"t\":{:.17g},\"ev\":{{\"type\":\"coal\",\"i\":{},\"j\":{}}}}}\n", k, te.time,
                         c->i1 + 1, c->i2 + 1);
    } else {
      const auto& r = std::get<Recombine>(te.event);
      out += fmt::format("{{\"n\":{},\"t\":{:.17g},\"ev\":{{\"type\":\"rec\",\"i\":{},\"u\":{:.17g}}}}}\n", k,
                         te.time, r.i + 1, r.u);
    }
  }
  return out;
}

std::string serialize_log(const LogHeader& header, const Arg& arg) {
  auto evs = arg.events();
  return serialize_log(header, evs);
}

namespace {

template <class T>
T field(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(line, fmt::format("missing field \"{}\"", key));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(line, fmt::format("field \"{}\" has the wrong type", key));
  }
}

std::size_t rank_field(const json& j, const char* key, std::size_t line) {
  auto v = field<std::int64_t>(j, key, line);
  if (v < 1) throw ParseError(line, fmt::format("rank \"{}\" must be at least 1", key));
  return static_cast<std::size_t>(v - 1);
}

LogHeader parse_header(const json& j, std::size_t line) {
  LogHeader h;
  h.format_version = field<int>(j, "format_version", line);
  if (h.format_version != kFormatVersion) {
    throw ParseError(line, fmt::format("unsupported format_version {}", h.format_version));
  }
  h.engine = field<std::string>(j, "engine", line);
  h.n_samples = field<int>(j, "N", line);
  if (h.n_samples < 2 || h.n_samples > kMaxSamples) throw ParseError(line, "N out of range");
  h.rho = field<double>(j, "rho", line);
  try {
    h.density = BreakpointDensity::parse(field<std::string>(j, "density", line));
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, e.what());
  }
  h.seed = field<std::uint64_t>(j, "seed", line);
  h.replicate = field<std::uint64_t>(j, "replicate", line);
  h.events = field<std::size_t>(j, "events", line);
  auto sum = field<std::string>(j, "checksum", line);
  try {
    std::size_t used = 0;
    h.checksum = std::stoull(sum, &used, 16);
    if (used != sum.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ParseError(line, "checksum is not a hex string");
  }
  return h;
}

TimedEvent parse_event(const json& j, std::size_t expected_index, std::size_t line) {
  auto n = field<std::size_t>(j, "n", line);
  if (n != expected_index) throw ParseError(line, fmt::format("expected event {} but found {}", expected_index, n));
  TimedEvent te;
  te.time = field<double>(j, "t", line);
  auto it = j.find("ev");
  if (it == j.end() || !it->is_object()) throw ParseError(line, "missing event object \"ev\"");
  auto type = field<std::string>(*it, "type", line);
  if (type == "coal") {
    te.event = Coalesce{rank_field(*it, "i", line), rank_field(*it, "j", line)};
  } else if (type == "rec") {
    te.event = Recombine{rank_field(*it, "i", line), field<double>(*it, "u", line)};
  } else {
    throw ParseError(line, fmt::format("unknown event type \"{}\"", type));
  }
  return te;
}

}  // namespace

std::vector<LogRecord> parse_log(std::istream& in) {
  std::vector<LogRecord> records;
  std::string text;
  std::size_t line = 0;
  LogRecord* open = nullptr;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, fmt::format("invalid JSON ({})", e.what()));
    }
    if (!j.is_object()) throw ParseError(line, "expected a JSON object");
    if (open == nullptr || open->events.size() == open->header.events) {
      if (!j.contains("format_version")) throw ParseError(line, "expected a replicate header");
      records.push_back({parse_header(j, line), {}, line});
      open = &records.back();
      open->events.reserve(open->header.events);
      continue;
    }
    open->events.push_back(parse_event(j, open->events.size(), line));
  }
  if (records.empty()) throw ParseError(line + 1, "no replicate header found");
  if (open->events.size() != open->header.events) {
    throw ParseError(line + 1, fmt::format("truncated log: replicate {} declares {} events but {} were read",
                                           open->header.replicate, open->header.events, open->events.size()));
  }
  return records;
}

std::vector<LogRecord> parse_log_text(const std::string& text) {
  std::istringstream in(text);
  return parse_log(in);
}

}  // namespace argsim
