#include "eb/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace eb::ingest {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(pos)));
      break;
    }
    out.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e || !std::isfinite(v)) {
    throw DataError("bad number: '" + s + "'");
  }
  return v;
}

struct RowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Place resolve_place(const std::string& room_field, const std::string& sensor_id,
                    const RoomMap* room_map) {
  if (!room_field.empty()) {
    return parse_place(room_field);  // unknown label -> fatal DataError
  }
  if (room_map != nullptr) {
    auto it = room_map->find(sensor_id);
    if (it == room_map->end()) {
      throw RowError("sensor not in room map: " + sensor_id);
    }
    return it->second;
  }
  throw RowError("row lacks a room and no room map was given");
}

// kind and room must agree; a PIR event in a door "room" is malformed.
void check_consistency(const SensorEvent& ev) {
  const bool ok = (ev.kind == EventKind::Motion && is_room(ev.place)) ||
                  (ev.kind == EventKind::EntranceDoor && ev.place == Place::EntranceDoor) ||
                  (ev.kind == EventKind::FridgeDoor && ev.place == Place::FridgeDoor);
  if (!ok) throw RowError("event kind does not match room");
  if (ev.duration_s < 0.0 || !std::isfinite(ev.duration_s)) throw RowError("negative duration");
  if (!std::isfinite(ev.start_s)) throw RowError("non-finite start");
  if (ev.person_id.empty()) throw RowError("empty person id");
}

void sort_events(std::vector<SensorEvent>& events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const SensorEvent& a, const SensorEvent& b) {
                     if (a.person_id != b.person_id) return a.person_id < b.person_id;
                     if (a.start_s != b.start_s) return a.start_s < b.start_s;
                     return a.sensor_id < b.sensor_id;
                   });
}

ParseResult parse_csv(std::istream& in, const RoomMap* room_map) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("event log: empty stream, no header");
  const auto header = split_csv(line);
  int i_person = -1, i_sensor = -1, i_room = -1, i_start = -1, i_dur = -1, i_kind = -1;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    const std::string& h = header[i];
    if (h == "person_id") i_person = i;
    else if (h == "sensor_id") i_sensor = i;
    else if (h == "room") i_room = i;
    else if (h == "start_iso8601") i_start = i;
    else if (h == "duration_s") i_dur = i;
    else if (h == "kind") i_kind = i;
  }
  if (i_person < 0 || i_sensor < 0 || i_start < 0 || i_dur < 0 || i_kind < 0) {
    throw DataError("event log: unreadable header: '" + line + "'");
  }
  if (i_room < 0 && room_map == nullptr) {
    throw DataError("event log: no room column and no room map");
  }

  ParseResult result;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    try {
      if (fields.size() != header.size()) throw RowError("wrong column count");
      SensorEvent ev;
      ev.person_id = fields[i_person];
      ev.sensor_id = fields[i_sensor];
      try {
        ev.start_s = parse_iso8601(fields[i_start]);
        ev.duration_s = parse_double(fields[i_dur]);
        ev.kind = parse_event_kind(fields[i_kind]);
      } catch (const DataError& e) {
        throw RowError(e.what());  // bad values skip the row; bad labels stay fatal
      }
      ev.place = resolve_place(i_room >= 0 ? fields[i_room] : std::string(), ev.sensor_id, room_map);
      check_consistency(ev);
      result.events.push_back(std::move(ev));
    } catch (const RowError&) {
      ++result.malformed_rows;
    }
  }
  sort_events(result.events);
  return result;
}

ParseResult parse_jsonl(std::istream& in, const RoomMap* room_map) {
  ParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw RowError("not a JSON object");
      SensorEvent ev;
      if (!j.contains("person_id") || !j["person_id"].is_string()) throw RowError("person_id");
      ev.person_id = j["person_id"].get<std::string>();
      if (!j.contains("sensor_id") || !j["sensor_id"].is_string()) throw RowError("sensor_id");
      ev.sensor_id = j["sensor_id"].get<std::string>();
      if (!j.contains("start_iso8601") || !j["start_iso8601"].is_string()) throw RowError("start");
      if (!j.contains("duration_s") || !j["duration_s"].is_number()) throw RowError("duration");
      if (!j.contains("kind") || !j["kind"].is_string()) throw RowError("kind");
      try {
        ev.start_s = parse_iso8601(j["start_iso8601"].get<std::string>());
        ev.kind = parse_event_kind(j["kind"].get<std::string>());
      } catch (const DataError& e) {
        throw RowError(e.what());
      }
      ev.duration_s = j["duration_s"].get<double>();
      std::string room;
      if (j.contains("room")) {
        if (!j["room"].is_string()) throw RowError("room");
        room = j["room"].get<std::string>();
      }
      ev.place = resolve_place(room, ev.sensor_id, room_map);
      check_consistency(ev);
      result.events.push_back(std::move(ev));
    } catch (const RowError&) {
      ++result.malformed_rows;
    } catch (const nlohmann::json::exception&) {
      ++result.malformed_rows;
    }
  }
  sort_events(result.events);
  return result;
}

}  // namespace

ParseResult parse_event_log(std::istream& in, LogFormat format, const RoomMap* room_map) {
  switch (format) {
    case LogFormat::Csv: return parse_csv(in, room_map);
    case LogFormat::JsonLines: return parse_jsonl(in, room_map);
  }
  throw DataError("unknown log format");
}

ParseResult load_event_log(const std::string& path, const RoomMap* room_map) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open event log: " + path);
  LogFormat fmt = LogFormat::Csv;
  if (path.ends_with(".jsonl") || path.ends_with(".ndjson") || path.ends_with(".json")) {
    fmt = LogFormat::JsonLines;
  }
  return parse_event_log(in, fmt, room_map);
}

RoomMap load_room_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open room map: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad room map JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("room map must be a JSON object");
  RoomMap map;
  for (const auto& [sensor, room] : j.items()) {
    if (!room.is_string()) throw DataError("room map values must be strings");
    map[sensor] = parse_place(room.get<std::string>());
  }
  return map;
}

void write_event_csv(std::ostream& out, std::span<const SensorEvent> events) {
  out << "person_id,sensor_id,room,start_iso8601,duration_s,kind\n";
  char buf[64];
  for (const SensorEvent& ev : events) {
    auto res = std::to_chars(buf, buf + sizeof(buf), ev.duration_s);
    out << ev.person_id << ',' << ev.sensor_id << ',' << to_string(ev.place) << ','
        << format_iso8601(ev.start_s) << ',' << std::string_view(buf, res.ptr - buf) << ','
        << to_string(ev.kind) << '\n';
  }
}

void write_event_jsonl(std::ostream& out, std::span<const SensorEvent> events) {
  for (const SensorEvent& ev : events) {
    const nlohmann::json j = {{"person_id", ev.person_id},
                              {"sensor_id", ev.sensor_id},
                              {"room", std::string(to_string(ev.place))},
                              {"start_iso8601", format_iso8601(ev.start_s)},
                              {"duration_s", ev.duration_s},
                              {"kind", std::string(to_string(ev.kind))}};
    out << j.dump() << '\n';
  }
}

namespace {

struct ChangePoint {
  double t;      // local seconds
  int rank;      // 0 = door-driven outside, 1 = motion; motion wins ties
  std::string_view sensor;
  Location where;
};

struct Interval {
  double begin;
  double end;
};

// Union length of intervals clipped to [lo, hi).
double union_length(std::vector<Interval>& ivs, double lo, double hi) {
  double total = 0.0;
  std::sort(ivs.begin(), ivs.end(),
            [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
  double cur_b = 0.0, cur_e = -1.0;
  for (const Interval& iv : ivs) {
    const double b = std::max(iv.begin, lo);
    const double e = std::min(iv.end, hi);
    if (e <= b) continue;
    if (cur_e < cur_b) {
      cur_b = b;
      cur_e = e;
    } else if (b <= cur_e) {
      cur_e = std::max(cur_e, e);
    } else {
      total += cur_e - cur_b;
      cur_b = b;
      cur_e = e;
    }
  }
  if (cur_e > cur_b) total += cur_e - cur_b;
  return total;
}

void build_person_timelines(std::span<const SensorEvent> events, const TimelineConfig& config,
                            std::vector<DayTimeline>& out) {
  if (events.empty()) return;
  const double off = static_cast<double>(config.utc_offset_s);
  const double G = config.quiet_period_s;

  auto local_day = [off](double t) {
    return static_cast<std::int64_t>(std::floor((t + off) / kSecondsPerDay));
  };

  const std::int64_t first_day = local_day(events.front().start_s);
  std::int64_t last_day = first_day;
  for (const SensorEvent& ev : events) last_day = std::max(last_day, local_day(ev.start_s));
  // Installation and removal days carry partial data; drop them.
  const std::int64_t day_lo = first_day + 1;
  const std::int64_t day_hi = last_day - 1;
  if (day_lo > day_hi) return;

  std::vector<double> motion_starts;
  std::vector<ChangePoint> points;
  for (const SensorEvent& ev : events) {
    if (ev.kind == EventKind::Motion) {
      const double t = ev.start_s + off;
      motion_starts.push_back(t);
      points.push_back({t, 1, ev.sensor_id, to_location(ev.place)});
    }
  }
  // motion_starts is already ascending (events sorted by start).
  for (const SensorEvent& ev : events) {
    if (ev.kind != EventKind::EntranceDoor) continue;
    const double t = ev.start_s + off;
    auto it = std::lower_bound(motion_starts.begin(), motion_starts.end(), t);
    if (it == motion_starts.end() || *it >= t + G) {
      points.push_back({t + G, 0, ev.sensor_id, Location::Outside});
    }
  }
  std::stable_sort(points.begin(), points.end(), [](const ChangePoint& a, const ChangePoint& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.sensor != b.sensor) return a.sensor < b.sensor;
    return a.where < b.where;
  });

  // Fold change points into a piecewise-constant function over the whole
  // measurement span; before the first motion event the location is outside.
  const double span_begin = static_cast<double>(first_day) * kSecondsPerDay;
  const double span_end = static_cast<double>(last_day + 1) * kSecondsPerDay;
  std::vector<Interval> pieces_iv;
  std::vector<Location> pieces_loc;
  double cursor = span_begin;
  Location current = Location::Outside;
  for (const ChangePoint& cp : points) {
    const double t = std::clamp(cp.t, span_begin, span_end);
    if (t > cursor && cp.where != current) {
      pieces_iv.push_back({cursor, t});
      pieces_loc.push_back(current);
      cursor = t;
    }
    current = cp.where;
  }
  pieces_iv.push_back({cursor, span_end});
  pieces_loc.push_back(current);

  // Days touched by any event interval (zero-duration events count as points).
  std::vector<bool> has_event(static_cast<std::size_t>(day_hi - day_lo + 1), false);
  auto mark = [&](std::int64_t d) {
    if (d >= day_lo && d <= day_hi) has_event[static_cast<std::size_t>(d - day_lo)] = true;
  };
  std::vector<std::vector<Interval>> motion_by_day(has_event.size());
  auto day_of_local = [](double t_local) {
    return static_cast<std::int64_t>(std::floor(t_local / kSecondsPerDay));
  };
  for (const SensorEvent& ev : events) {
    const double b = ev.start_s + off;
    const double e = b + std::max(ev.duration_s, 0.0);
    const std::int64_t db = day_of_local(b);
    std::int64_t de = day_of_local(e);
    if (e > b && e == std::floor(e / kSecondsPerDay) * kSecondsPerDay) de -= 1;  // half-open
    for (std::int64_t d = std::max(db, day_lo); d <= std::min(de, day_hi); ++d) {
      mark(d);
      if (ev.kind == EventKind::Motion && e > b) {
        const double lo = static_cast<double>(d) * kSecondsPerDay;
        motion_by_day[static_cast<std::size_t>(d - day_lo)].push_back(
            {std::max(b, lo), std::min(e, lo + kSecondsPerDay)});
      }
    }
  }

  std::size_t piece = 0;
  for (std::int64_t d = day_lo; d <= day_hi; ++d) {
    const double day_b = static_cast<double>(d) * kSecondsPerDay;
    const double day_e = day_b + kSecondsPerDay;
    DayTimeline tl;
    tl.person_id = events.front().person_id;
    tl.epoch_day = d;
    const std::size_t idx = static_cast<std::size_t>(d - day_lo);
    if (!has_event[idx]) {
      tl.segments.push_back({0.0, kSecondsPerDay, Location::Outside});
      tl.no_event_day = true;
      out.push_back(std::move(tl));
      continue;
    }
    while (piece < pieces_iv.size() && pieces_iv[piece].end <= day_b) ++piece;
    for (std::size_t p = piece; p < pieces_iv.size() && pieces_iv[p].begin < day_e; ++p) {
      const double b = std::max(pieces_iv[p].begin, day_b) - day_b;
      const double e = std::min(pieces_iv[p].end, day_e) - day_b;
      if (e <= b) continue;
      if (!tl.segments.empty() && tl.segments.back().where == pieces_loc[p]) {
        tl.segments.back().end_s = e;
      } else {
        tl.segments.push_back({b, e, pieces_loc[p]});
      }
    }
    tl.attested_coverage = union_length(motion_by_day[idx], day_b, day_e) / kSecondsPerDay;
    out.push_back(std::move(tl));
  }
}

}  // namespace

std::vector<DayTimeline> build_day_timelines(std::vector<SensorEvent> events,
                                             const TimelineConfig& config) {
  if (config.quiet_period_s < 0.0 || !std::isfinite(config.quiet_period_s)) {
    throw DataError("quiet period must be a finite non-negative number of seconds");
  }
  sort_events(events);
  std::vector<DayTimeline> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= events.size(); ++i) {
    if (i == events.size() || events[i].person_id != events[begin].person_id) {
      build_person_timelines(std::span(events).subspan(begin, i - begin), config, out);
      begin = i;
    }
  }
  return out;
}

std::vector<DayTimeline> filter_days(std::vector<DayTimeline> timelines, double min_coverage) {
  if (!(min_coverage >= 0.0 && min_coverage <= 1.0)) {
    throw DataError("min_coverage must lie in [0, 1]");
  }
  if (min_coverage == 0.0) return timelines;
  std::erase_if(timelines, [min_coverage](const DayTimeline& tl) {
    return tl.attested_coverage < min_coverage;
  });
  return timelines;
}

}  // namespace eb::ingest
