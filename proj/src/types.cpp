#include "eb/types.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace eb {

bool is_room(Place p) {
  return p != Place::EntranceDoor && p != Place::FridgeDoor;
}

Location to_location(Place p) {
  if (!is_room(p)) {
    throw DataError("place is not a location: " + std::string(to_string(p)));
  }
  return static_cast<Location>(static_cast<std::uint8_t>(p));
}

Place to_place(Location l) {
  return static_cast<Place>(static_cast<std::uint8_t>(l));
}

std::string_view to_string(Location l) {
  switch (l) {
    case Location::Bedroom: return "bedroom";
    case Location::Bathroom: return "bathroom";
    case Location::LivingRoom: return "living room";
    case Location::Kitchen: return "kitchen";
    case Location::Entrance: return "entrance";
    case Location::Outside: return "outside";
  }
  return "?";
}

std::string_view to_string(Place p) {
  switch (p) {
    case Place::EntranceDoor: return "entrance_door";
    case Place::FridgeDoor: return "fridge_door";
    default: return to_string(static_cast<Location>(static_cast<std::uint8_t>(p)));
  }
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Motion: return "motion";
    case EventKind::EntranceDoor: return "entrance_door";
    case EventKind::FridgeDoor: return "fridge_door";
  }
  return "?";
}

Place parse_place(std::string_view s) {
  if (s == "bedroom") return Place::Bedroom;
  if (s == "bathroom") return Place::Bathroom;
  if (s == "living room" || s == "living_room") return Place::LivingRoom;
  if (s == "kitchen") return Place::Kitchen;
  if (s == "entrance") return Place::Entrance;
  if (s == "outside") return Place::Outside;
  if (s == "entrance_door") return Place::EntranceDoor;
  if (s == "fridge_door") return Place::FridgeDoor;
  throw DataError("unknown room label: '" + std::string(s) + "'");
}

Location parse_location(std::string_view s) {
  return to_location(parse_place(s));
}

EventKind parse_event_kind(std::string_view s) {
  if (s == "motion") return EventKind::Motion;
  if (s == "entrance_door") return EventKind::EntranceDoor;
  if (s == "fridge_door") return EventKind::FridgeDoor;
  throw DataError("unknown event kind: '" + std::string(s) + "'");
}

// Howard Hinnant's days-from-civil / civil-from-days algorithms.
std::int64_t epoch_day_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_epoch_day(std::int64_t z, int& year, unsigned& month, unsigned& day) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = doy - (153 * mp + 2) / 5 + 1;
  month = mp + (mp < 10 ? 3 : -9);
  year = static_cast<int>(y + (month <= 2));
}

int day_of_week(std::int64_t epoch_day) {
  // 1970-01-01 was a Thursday.
  std::int64_t d = (epoch_day + 3) % 7;
  return static_cast<int>(d < 0 ? d + 7 : d);
}

std::string format_date(std::int64_t epoch_day) {
  int y;
  unsigned m, d;
  civil_from_epoch_day(epoch_day, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

namespace {

bool parse_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
  if (pos + len > s.size()) return false;
  unsigned v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + static_cast<unsigned>(s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::int64_t parse_date(std::string_view s) {
  unsigned y, m, d;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
      !parse_uint(s, 0, 4, y) || !parse_uint(s, 5, 2, m) || !parse_uint(s, 8, 2, d) ||
      m < 1 || m > 12 || d < 1 || d > 31) {
    throw DataError("bad date: '" + std::string(s) + "'");
  }
  return epoch_day_from_civil(static_cast<int>(y), m, d);
}

double parse_iso8601(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]
  unsigned y, mo, d, h, mi, se;
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':' ||
      !parse_uint(s, 0, 4, y) || !parse_uint(s, 5, 2, mo) || !parse_uint(s, 8, 2, d) ||
      !parse_uint(s, 11, 2, h) || !parse_uint(s, 14, 2, mi) || !parse_uint(s, 17, 2, se) ||
      mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) {
    throw DataError("bad timestamp: '" + std::string(s) + "'");
  }
  std::size_t pos = 19;
  double frac = 0.0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    double scale = 0.1;
    bool any = false;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      frac += scale * (s[pos] - '0');
      scale *= 0.1;
      ++pos;
      any = true;
    }
    if (!any) throw DataError("bad timestamp: '" + std::string(s) + "'");
  }
  std::int64_t zone_s = 0;
  if (pos < s.size()) {
    const char c = s[pos];
    if (c == 'Z' && pos + 1 == s.size()) {
      zone_s = 0;
    } else if ((c == '+' || c == '-')) {
      unsigned zh, zm = 0;
      std::size_t rest = s.size() - pos - 1;
      bool ok = false;
      if (rest == 5 && s[pos + 3] == ':') {
        ok = parse_uint(s, pos + 1, 2, zh) && parse_uint(s, pos + 4, 2, zm);
      } else if (rest == 4) {
        ok = parse_uint(s, pos + 1, 2, zh) && parse_uint(s, pos + 3, 2, zm);
      } else if (rest == 2) {
        ok = parse_uint(s, pos + 1, 2, zh);
      }
      if (!ok || zh > 23 || zm > 59) throw DataError("bad timestamp zone: '" + std::string(s) + "'");
      zone_s = static_cast<std::int64_t>(zh) * 3600 + static_cast<std::int64_t>(zm) * 60;
      if (c == '-') zone_s = -zone_s;
    } else {
      throw DataError("bad timestamp: '" + std::string(s) + "'");
    }
  }
  const std::int64_t days = epoch_day_from_civil(static_cast<int>(y), mo, d);
  const std::int64_t secs = days * 86400 + h * 3600 + mi * 60 + se;
  return static_cast<double>(secs - zone_s) + frac;
}

std::string format_iso8601(double unix_s) {
  const double whole = std::floor(unix_s);
  const double frac = unix_s - whole;
  std::int64_t t = static_cast<std::int64_t>(whole);
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y;
  unsigned mo, d;
  civil_from_epoch_day(days, y, mo, d);
  const int h = static_cast<int>(rem / 3600);
  const int mi = static_cast<int>((rem / 60) % 60);
  const int se = static_cast<int>(rem % 60);
  char buf[40];
  if (frac > 0.0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", y, mo, d, h, mi, se,
                  static_cast<int>(std::lround(frac * 1000.0)));
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", y, mo, d, h, mi, se);
  }
  return buf;
}

}  // namespace eb
