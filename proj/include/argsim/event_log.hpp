#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "argsim/arg.hpp"
#include "argsim/density.hpp"

namespace argsim {

inline constexpr int kFormatVersion = 1;

/// Per-replicate header line of an event log.
struct LogHeader {
  int format_version = kFormatVersion;
  std::string engine;
  int n_samples = 2;
  double rho = 0.0;
  BreakpointDensity density;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::size_t events = 0;
  /// state_checksum() of the path the events replay to.
  std::uint64_t checksum = 0;
};

/// One replicate read back from a log: header plus its events.
struct LogRecord {
  LogHeader header;
  std::vector<TimedEvent> events;
  /// 1-based line number of the header.
  std::size_t line = 0;
};

/// Malformed log content, with the 1-based line where it was detected.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Header line followed by one JSON object per event. Numbers use 17
/// significant digits; rank indices are written 1-based.
std::string serialize_log(const LogHeader& header, std::span<const TimedEvent> events);
std::string serialize_log(const LogHeader& header, const Arg& arg);

/// Parses a stream of one or more replicate records.
std::vector<LogRecord> parse_log(std::istream& in);
std::vector<LogRecord> parse_log_text(const std::string& text);

std::string format_checksum(std::uint64_t sum);

}  // namespace argsim
