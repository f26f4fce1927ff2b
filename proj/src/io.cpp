#include "recruit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "recruit/errors.hpp"

namespace recruit {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

double parse_real(const std::string& s, std::size_t line, const char* column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw RowError("MalformedRow", line, std::string(column) + " is not a number: '" + s + "'");
  }
  return v;
}

std::int64_t parse_count(const std::string& s, std::size_t line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
    throw RowError("MalformedRow", line, "count must be a non-negative integer: '" + s + "'");
  }
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return in;
}

void require_census(double census_time) {
  if (!(census_time > 0.0) || !std::isfinite(census_time)) {
    throw ConfigError("census time must be positive");
  }
}

// Returns false on an empty stream; otherwise checks the header columns.
bool read_header(std::istream& in, const std::vector<std::string>& expected, std::size_t& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (split(line) != expected) {
      std::string want;
      for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
      throw RowError("MalformedRow", line_no, "header must be '" + want + "'");
    }
    return true;
  }
  return false;
}

double checked_open_time(const std::string& field, std::size_t line, double census_time) {
  const double open = parse_real(field, line, "open_time");
  if (open < 0.0) throw RowError("MalformedRow", line, "open_time must be non-negative");
  if (open > census_time) {
    throw RowError("OpeningAfterCensus", line,
                   "centre opens at " + field + " after census " + format_number(census_time));
  }
  return open;
}

}  // namespace

CsvFormat parse_format(const std::string& name) {
  if (name == "summary") return CsvFormat::Summary;
  if (name == "events") return CsvFormat::Events;
  throw ConfigError("unknown input format '" + name + "' (expected summary or events)");
}

EventLog parse_event_log(std::istream& in, double census_time) {
  require_census(census_time);
  EventLog log;
  log.census_time = census_time;
  std::size_t line_no = 0;
  if (!read_header(in, {"centre_id", "open_time", "event_time"}, line_no)) {
    throw InsufficientData("input contains no header and no rows");
  }
  std::map<std::string, std::size_t> index;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != 3 || f[0].empty()) {
      throw RowError("MalformedRow", line_no, "expected 3 fields: centre_id,open_time,event_time");
    }
    const double open = checked_open_time(f[1], line_no, census_time);
    auto [it, inserted] = index.try_emplace(f[0], log.centres.size());
    if (inserted) {
      log.centres.push_back({f[0], open, {}});
    } else if (log.centres[it->second].open_time != open) {
      throw RowError("MalformedRow", line_no, "centre '" + f[0] + "' listed with two opening times");
    }
    if (f[2].empty()) continue;
    const double event = parse_real(f[2], line_no, "event_time");
    if (event < open) {
      throw RowError("EventBeforeOpening", line_no,
                     "event at " + f[2] + " precedes opening at " + f[1]);
    }
    log.centres[it->second].event_times.push_back(event);
  }
  if (log.centres.empty()) throw InsufficientData("input contains no centres");
  for (auto& c : log.centres) std::sort(c.event_times.begin(), c.event_times.end());
  return log;
}

EventLog parse_event_log(const std::string& path, double census_time) {
  auto in = open_input(path);
  return parse_event_log(in, census_time);
}

TrialData to_trial_data(const EventLog& log) {
  std::vector<CentreRecord> centres;
  centres.reserve(log.centres.size());
  for (const auto& c : log.centres) {
    const auto n = std::count_if(c.event_times.begin(), c.event_times.end(),
                                 [&](double e) { return e <= log.census_time; });
    centres.push_back({c.centre_id, log.census_time - c.open_time, static_cast<std::int64_t>(n)});
  }
  return TrialData(log.census_time, std::move(centres));
}

TrialData parse_centre_csv(std::istream& in, CsvFormat format, double census_time) {
  if (format == CsvFormat::Events) return to_trial_data(parse_event_log(in, census_time));

  require_census(census_time);
  std::size_t line_no = 0;
  if (!read_header(in, {"centre_id", "open_time", "count"}, line_no)) {
    throw InsufficientData("input contains no header and no rows");
  }
  std::vector<CentreRecord> centres;
  std::map<std::string, std::size_t> seen;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != 3 || f[0].empty()) {
      throw RowError("MalformedRow", line_no, "expected 3 fields: centre_id,open_time,count");
    }
    if (!seen.emplace(f[0], line_no).second) {
      throw RowError("MalformedRow", line_no, "duplicate centre_id '" + f[0] + "'");
    }
    const double open = checked_open_time(f[1], line_no, census_time);
    const std::int64_t count = parse_count(f[2], line_no);
    const double exposure = census_time - open;
    if (exposure == 0.0 && count > 0) {
      throw RowError("MalformedRow", line_no, "recruits reported for a centre opening at the census");
    }
    centres.push_back({f[0], exposure, count});
  }
  if (centres.empty()) throw InsufficientData("input contains no centres");
  return TrialData(census_time, std::move(centres));
}

TrialData parse_centre_csv(const std::string& path, CsvFormat format, double census_time) {
  auto in = open_input(path);
  return parse_centre_csv(in, format, census_time);
}

void write_summary_csv(std::ostream& out, const TrialData& data) {
  out << "centre_id,open_time,count\n";
  for (const auto& c : data.centres()) {
    out << c.centre_id << ',' << format_number(data.census_time() - c.exposure) << ','
        << c.count << '\n';
  }
}

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_number(double x, int significant) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, significant);
  return std::string(buf, ptr);
}

}  // namespace recruit
