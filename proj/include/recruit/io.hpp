#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "recruit/model.hpp"

namespace recruit {

enum class CsvFormat { Summary, Events };

CsvFormat parse_format(const std::string& name);

/// Per-centre recruitment log from the events format.
struct CentreEvents {
  std::string centre_id;
  double open_time = 0.0;
  std::vector<double> event_times;  ///< all listed events, sorted
};

struct EventLog {
  double census_time = 0.0;
  std::vector<CentreEvents> centres;  ///< in order of first appearance
};

/// Reads `centre_id,open_time,count` (summary) or `centre_id,open_time,event_time`
/// (events; an empty event_time registers a centre without recruits).
/// Events after the census are not counted. Errors carry the 1-based line.
TrialData parse_centre_csv(std::istream& in, CsvFormat format, double census_time);
TrialData parse_centre_csv(const std::string& path, CsvFormat format, double census_time);

EventLog parse_event_log(std::istream& in, double census_time);
EventLog parse_event_log(const std::string& path, double census_time);

TrialData to_trial_data(const EventLog& log);

/// Summary-format CSV whose parse reproduces `data` exactly.
void write_summary_csv(std::ostream& out, const TrialData& data);

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_number(double x);
/// Fixed number of significant digits, locale independent.
std::string format_number(double x, int significant);

}  // namespace recruit
