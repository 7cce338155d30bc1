#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eb/types.hpp"

namespace eb::ingest {

enum class LogFormat { Csv, JsonLines };

// sensor_id -> place, for logs that lack the room column.
using RoomMap = std::map<std::string, Place>;

struct ParseResult {
  std::vector<SensorEvent> events;  // sorted by (person_id, start, sensor_id)
  std::size_t malformed_rows = 0;   // skipped with a warning count
};

// Parses a CSV event log (header: person_id,sensor_id,room,start_iso8601,
// duration_s,kind) or a JSON-lines log with the same field names. The room
// column/field may be omitted when a room map is given. An unreadable CSV
// header or an unknown room label is fatal; any other malformed row is
// skipped and counted.
ParseResult parse_event_log(std::istream& in, LogFormat format,
                            const RoomMap* room_map = nullptr);

// Chooses the format from the file extension (.csv vs .jsonl/.ndjson/.json).
ParseResult load_event_log(const std::string& path, const RoomMap* room_map = nullptr);

// JSON object {"sensor_id": "room", ...}.
RoomMap load_room_map(const std::string& path);

void write_event_csv(std::ostream& out, std::span<const SensorEvent> events);
void write_event_jsonl(std::ostream& out, std::span<const SensorEvent> events);

struct TimelineConfig {
  // Quiet window G: an entrance-door event followed by >= G seconds without
  // a motion event switches the location to outside until the next motion.
  double quiet_period_s = 300.0;
  // Fixed local-time offset used for the midnight day boundary (default UTC).
  std::int64_t utc_offset_s = 0;
};

// Builds one timeline per person per local calendar day. Location between
// motion events is the room of the last motion event (hold-last); before any
// motion event it is outside. The first and last day of each person's
// measurement period are dropped. A retained day with no sensor events at
// all is emitted all-outside and flagged.
std::vector<DayTimeline> build_day_timelines(std::vector<SensorEvent> events,
                                             const TimelineConfig& config = {});

// Drops days whose motion-attested coverage is below min_coverage.
std::vector<DayTimeline> filter_days(std::vector<DayTimeline> timelines, double min_coverage);

}  // namespace eb::ingest
