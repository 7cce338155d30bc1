#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eb {

// Bad input data: malformed files, contract violations on arguments.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical breakdown: indefinite Gram matrix, degenerate correlation, ...
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kSecondsPerDay = 86400.0;

// The fixed set of tracked locations. The order is part of the file formats:
// matrix columns are stacked per location in exactly this order.
enum class Location : std::uint8_t {
  Bedroom = 0,
  Bathroom,
  LivingRoom,
  Kitchen,
  Entrance,
  Outside,
};

inline constexpr int kNumLocations = 6;

inline constexpr std::array<Location, kNumLocations> kLocationOrder = {
    Location::Bedroom,   Location::Bathroom, Location::LivingRoom,
    Location::Kitchen,   Location::Entrance, Location::Outside,
};

// Where a sensor event can fire: one of the tracked locations or a door
// contact. Door contacts are not locations; they drive the outside rule
// (entrance) or are ingested and ignored (fridge).
enum class Place : std::uint8_t {
  Bedroom = 0,
  Bathroom,
  LivingRoom,
  Kitchen,
  Entrance,
  Outside,
  EntranceDoor,
  FridgeDoor,
};

enum class EventKind : std::uint8_t {
  Motion = 0,
  EntranceDoor,
  FridgeDoor,
};

bool is_room(Place p);
Location to_location(Place p);  // throws DataError if !is_room(p)
Place to_place(Location l);

std::string_view to_string(Location l);
std::string_view to_string(Place p);
std::string_view to_string(EventKind k);

// All three parsers accept the lowercase labels used by the log formats
// ("living room" may also be spelled "living_room"). Unknown labels throw
// DataError: the label set is closed.
Location parse_location(std::string_view s);
Place parse_place(std::string_view s);
EventKind parse_event_kind(std::string_view s);

// One timestamped sensor activation: a PIR firing interval or a door contact.
struct SensorEvent {
  std::string person_id;
  std::string sensor_id;
  Place place = Place::Bedroom;
  double start_s = 0.0;     // unix seconds, UTC
  double duration_s = 0.0;  // >= 0
  EventKind kind = EventKind::Motion;
};

struct TimelineSegment {
  double begin_s = 0.0;  // offset from local midnight, [0, 86400)
  double end_s = 0.0;    // offset, <= 86400
  Location where = Location::Outside;
};

// One resident day as a piecewise-constant location function. Segments are
// contiguous, non-overlapping and cover [0, 86400) exactly.
struct DayTimeline {
  std::string person_id;
  std::int64_t epoch_day = 0;  // local calendar day, days since 1970-01-01
  std::vector<TimelineSegment> segments;
  double attested_coverage = 0.0;  // fraction of the day backed by motion firings
  bool no_event_day = false;       // zero sensor events; forced all-outside
};

// Proleptic Gregorian civil-date helpers.
std::int64_t epoch_day_from_civil(int year, unsigned month, unsigned day);
void civil_from_epoch_day(std::int64_t days, int& year, unsigned& month, unsigned& day);
int day_of_week(std::int64_t epoch_day);  // 0 = Monday .. 6 = Sunday

std::string format_date(std::int64_t epoch_day);   // YYYY-MM-DD
std::int64_t parse_date(std::string_view s);       // throws DataError

// ISO 8601 combined date-time. Accepts an optional fractional second part and
// an optional Z / +HH:MM / -HH:MM zone designator (default UTC).
double parse_iso8601(std::string_view s);          // unix seconds; throws DataError
std::string format_iso8601(double unix_s);

}  // namespace eb
