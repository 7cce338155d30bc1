#include "eb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "eb/rng.hpp"

namespace eb::synth {

namespace {

constexpr double kGrid = 2.0;  // sensor resolution: 0.5 Hz

double snap(double t) { return kGrid * std::round(t / kGrid); }

struct Piece {
  double begin;
  double end;
  Location where;
};

void merge_adjacent(std::vector<Piece>& pieces) {
  std::vector<Piece> out;
  for (const Piece& p : pieces) {
    if (p.end <= p.begin) continue;
    if (!out.empty() && out.back().where == p.where && out.back().end == p.begin) {
      out.back().end = p.end;
    } else {
      out.push_back(p);
    }
  }
  pieces = std::move(out);
}

// Overwrites [b, e) with `where`, clipping whatever was underneath.
void overlay(std::vector<Piece>& pieces, double b, double e, Location where) {
  if (e <= b) return;
  std::vector<Piece> out;
  out.reserve(pieces.size() + 2);
  for (const Piece& p : pieces) {
    if (p.end <= b || p.begin >= e) {
      out.push_back(p);
      continue;
    }
    if (p.begin < b) out.push_back({p.begin, b, p.where});
    if (p.end > e) out.push_back({e, p.end, p.where});
  }
  out.push_back({b, e, where});
  std::sort(out.begin(), out.end(),
            [](const Piece& x, const Piece& y) { return x.begin < y.begin; });
  pieces = std::move(out);
}

const std::vector<AnchorPoint>& day_schedule(const RoutineTemplate& tpl, int dow) {
  auto it = tpl.weekly_overrides.find(dow);
  return it != tpl.weekly_overrides.end() ? it->second : tpl.schedule;
}

void validate_schedule(const std::vector<AnchorPoint>& schedule) {
  if (schedule.empty()) throw DataError("routine template: empty schedule");
  if (schedule.front().offset_s != 0.0) {
    throw DataError("routine template: first anchor must sit at offset 0");
  }
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i].offset_s > schedule[i - 1].offset_s)) {
      throw DataError("routine template: anchors must strictly increase");
    }
  }
}

}  // namespace

NoiseProfile ScoreLink::at(int score) const {
  const double w = std::clamp(30 - score, 0, 30) / 30.0;
  NoiseProfile p;
  p.jitter_sigma_s = jitter_best_s + w * (jitter_worst_s - jitter_best_s);
  p.erratic_rate = erratic_best + w * (erratic_worst - erratic_best);
  return p;
}

PersonTrace generate_person(const std::string& person_id, const RoutineTemplate& tpl,
                            const NoiseProfile& noise, int days, std::uint64_t seed,
                            const GeneratorConfig& config) {
  if (days < 2) throw DataError("generate_person needs at least 2 days");
  if (noise.jitter_sigma_s < 0.0 || noise.erratic_rate < 0.0) {
    throw DataError("noise parameters must be non-negative");
  }
  validate_schedule(tpl.schedule);
  for (const auto& [dow, schedule] : tpl.weekly_overrides) {
    if (dow < 0 || dow > 6) throw DataError("weekly override day-of-week out of range");
    validate_schedule(schedule);
  }
  const double G = config.quiet_period_s;

  Rng rng(seed);
  const int total_days = days + 2;  // sacrificial first and last day

  // Build the whole measurement span as one piecewise-constant function.
  std::vector<Piece> span;
  for (int d = 0; d < total_days; ++d) {
    const int dow = day_of_week(config.start_epoch_day + d);
    const auto& schedule = day_schedule(tpl, dow);

    std::vector<Piece> day;
    double prev = 0.0;
    std::vector<double> times;
    times.reserve(schedule.size());
    times.push_back(0.0);
    for (std::size_t i = 1; i < schedule.size(); ++i) {
      double t = snap(schedule[i].offset_s + rng.normal(0.0, noise.jitter_sigma_s));
      t = std::max(t, prev + kGrid);
      times.push_back(t);
      prev = t;
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const double b = times[i];
      const double e = i + 1 < schedule.size() ? times[i + 1] : kSecondsPerDay;
      if (b >= kSecondsPerDay) break;
      day.push_back({b, std::min(e, kSecondsPerDay), schedule[i].where});
    }

    const int excursions = rng.poisson(noise.erratic_rate);
    for (int x = 0; x < excursions; ++x) {
      const double b = snap(rng.uniform(0.0, kSecondsPerDay));
      const double len = snap(std::clamp(rng.exponential(900.0), 120.0, 7200.0));
      const Location where = kLocationOrder[rng.below(kNumLocations)];
      overlay(day, b, std::min(b + len, kSecondsPerDay), where);
    }

    const double base = d * kSecondsPerDay;
    for (const Piece& p : day) {
      if (p.end > p.begin) span.push_back({base + p.begin, base + p.end, p.where});
    }
  }
  merge_adjacent(span);

  // Emission feasibility. A door-driven switch to outside needs a room
  // segment of at least G + one grid step in front of it; shorter stays get
  // folded back into the previous room. The span must open with a room.
  if (span.front().where == Location::Outside) {
    Location fix = Location::Bedroom;
    for (const Piece& p : span) {
      if (p.where != Location::Outside) {
        fix = p.where;
        break;
      }
    }
    span.front().where = fix;
    merge_adjacent(span);
  }
  for (std::size_t i = 1; i < span.size();) {
    if (span[i].where == Location::Outside &&
        span[i - 1].end - span[i - 1].begin < G + kGrid) {
      span[i].where = span[i - 1].where;
      merge_adjacent(span);
      i = 1;  // indices shifted; the span is short, rescan
    } else {
      ++i;
    }
  }

  PersonTrace trace;
  trace.member.person_id = person_id;

  // Slice the retained days 1..days out of the span.
  std::size_t cursor = 0;
  for (int d = 1; d <= days; ++d) {
    const double day_b = d * kSecondsPerDay;
    const double day_e = day_b + kSecondsPerDay;
    DayTimeline tl;
    tl.person_id = person_id;
    tl.epoch_day = config.start_epoch_day + d;
    while (cursor < span.size() && span[cursor].end <= day_b) ++cursor;
    double room_s = 0.0;
    for (std::size_t p = cursor; p < span.size() && span[p].begin < day_e; ++p) {
      const double b = std::max(span[p].begin, day_b) - day_b;
      const double e = std::min(span[p].end, day_e) - day_b;
      if (e <= b) continue;
      tl.segments.push_back({b, e, span[p].where});
      if (span[p].where != Location::Outside) room_s += e - b;
    }
    tl.attested_coverage = room_s / kSecondsPerDay;
    trace.timelines.push_back(std::move(tl));
  }

  // Emit the event stream for the whole span.
  const double epoch = static_cast<double>(config.start_epoch_day) * kSecondsPerDay;
  auto motion = [&](double at, double duration, Location where) {
    SensorEvent ev;
    ev.person_id = person_id;
    std::string token(to_string(where));
    std::replace(token.begin(), token.end(), ' ', '_');
    ev.sensor_id = "pir_" + token;
    ev.place = to_place(where);
    ev.kind = EventKind::Motion;
    ev.start_s = epoch + at;
    ev.duration_s = duration;
    trace.events.push_back(std::move(ev));
  };
  auto door = [&](double at, EventKind kind) {
    SensorEvent ev;
    ev.person_id = person_id;
    ev.sensor_id = kind == EventKind::EntranceDoor ? "door_entrance" : "door_fridge";
    ev.place = kind == EventKind::EntranceDoor ? Place::EntranceDoor : Place::FridgeDoor;
    ev.kind = kind;
    ev.start_s = epoch + at;
    ev.duration_s = kGrid;
    trace.events.push_back(std::move(ev));
  };

  for (std::size_t i = 0; i < span.size(); ++i) {
    const Piece& p = span[i];
    if (p.where == Location::Outside) {
      door(p.begin - G, EventKind::EntranceDoor);
      if (i + 1 < span.size()) door(p.end, EventKind::EntranceDoor);  // re-entry
      continue;
    }
    motion(p.begin, p.end - p.begin, p.where);
    // PIR re-fires for long stays; kept clear of any door quiet window.
    for (double t = p.begin + 1800.0; t < p.end - G - kGrid; t += 1800.0) {
      motion(t, p.end - t, p.where);
    }
    if (p.where == Location::Kitchen && p.end - p.begin >= 600.0) {
      door(p.begin + 120.0, EventKind::FridgeDoor);
    }
  }
  std::sort(trace.events.begin(), trace.events.end(),
            [](const SensorEvent& a, const SensorEvent& b) {
              if (a.start_s != b.start_s) return a.start_s < b.start_s;
              return a.sensor_id < b.sensor_id;
            });
  return trace;
}

namespace {

std::vector<AnchorPoint> make_day(std::initializer_list<std::pair<int, Location>> minutes) {
  std::vector<AnchorPoint> out;
  out.reserve(minutes.size());
  for (const auto& [minute, where] : minutes) {
    out.push_back({minute * 60.0, where});
  }
  return out;
}

}  // namespace

RoutineTemplate default_routine(bool weekly_variation) {
  using enum Location;
  RoutineTemplate tpl;
  // Monday: the canonical day.
  tpl.schedule = make_day({{0, Bedroom},     {390, Bathroom}, {420, Kitchen},
                           {480, LivingRoom}, {570, Outside},  {660, Kitchen},
                           {720, LivingRoom}, {810, Bedroom},  {900, LivingRoom},
                           {1080, Kitchen},   {1140, LivingRoom}, {1305, Bathroom},
                           {1335, Bedroom}});
  if (!weekly_variation) return tpl;

  tpl.weekly_overrides[1] = make_day({{0, Bedroom},     {400, Bathroom}, {430, Kitchen},
                                      {490, LivingRoom}, {600, Outside},  {675, Kitchen},
                                      {735, LivingRoom}, {1080, Kitchen}, {1140, LivingRoom},
                                      {1305, Bathroom},  {1335, Bedroom}});
  tpl.weekly_overrides[2] = make_day({{0, Bedroom},     {410, Bathroom}, {440, Kitchen},
                                      {500, LivingRoom}, {540, Outside},  {660, Kitchen},
                                      {720, LivingRoom}, {840, Bedroom},  {930, LivingRoom},
                                      {1080, Kitchen},   {1140, LivingRoom}, {1305, Bathroom},
                                      {1335, Bedroom}});
  tpl.weekly_overrides[3] = make_day({{0, Bedroom},     {420, Bathroom}, {450, Kitchen},
                                      {510, LivingRoom}, {690, Kitchen},  {750, LivingRoom},
                                      {840, Outside},    {960, LivingRoom}, {1080, Kitchen},
                                      {1140, LivingRoom}, {1305, Bathroom}, {1335, Bedroom}});
  tpl.weekly_overrides[4] = make_day({{0, Bedroom},     {430, Bathroom}, {460, Kitchen},
                                      {520, LivingRoom}, {570, Outside},  {720, Kitchen},
                                      {780, LivingRoom}, {850, Bedroom},  {920, LivingRoom},
                                      {1080, Kitchen},   {1140, LivingRoom}, {1305, Bathroom},
                                      {1335, Bedroom}});
  tpl.weekly_overrides[5] = make_day({{0, Bedroom},     {450, Bathroom}, {480, Kitchen},
                                      {540, LivingRoom}, {630, Outside},  {690, Kitchen},
                                      {750, LivingRoom}, {870, Bedroom},  {950, LivingRoom},
                                      {1080, Kitchen},   {1140, LivingRoom}, {1305, Bathroom},
                                      {1335, Bedroom}});
  tpl.weekly_overrides[6] = make_day({{0, Bedroom},     {465, Bathroom}, {495, Kitchen},
                                      {555, LivingRoom}, {570, Outside},  {780, Kitchen},
                                      {840, LivingRoom}, {880, Bedroom},  {960, LivingRoom},
                                      {1080, Kitchen},   {1140, LivingRoom}, {1305, Bathroom},
                                      {1335, Bedroom}});
  return tpl;
}

SyntheticCohort generate_cohort(const CohortConfig& config) {
  if (config.size < 4) throw DataError("cohort size must be at least 4");
  if (!(config.days_std >= 0.0) || !(config.days_mean > 0.0) || config.min_days < 2) {
    throw DataError("degenerate day-count distribution");
  }
  if (!(config.age_max > config.age_min)) throw DataError("degenerate age distribution");
  if (!(config.score_std > 0.0)) throw DataError("degenerate score distribution");
  if (config.link.jitter_best_s < 0.0 || config.link.jitter_worst_s < config.link.jitter_best_s ||
      config.link.erratic_best < 0.0 || config.link.erratic_worst < config.link.erratic_best) {
    throw DataError("score link must be non-increasing in score");
  }

  const RoutineTemplate tpl = default_routine(config.weekly_variation);
  const double mid_age = 0.5 * (config.age_min + config.age_max);

  SyntheticCohort cohort;
  cohort.people.reserve(static_cast<std::size_t>(config.size));
  Rng rng(Rng::mix(config.seed, 0));
  for (int i = 0; i < config.size; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "p%03d", i + 1);

    const double age = rng.uniform(config.age_min, config.age_max);
    const double score_mu = config.score_mean - config.age_score_slope * (age - mid_age);
    const int score =
        static_cast<int>(std::clamp(std::round(rng.normal(score_mu, config.score_std)), 0.0, 30.0));
    const int days = std::max(config.min_days,
                              static_cast<int>(std::lround(rng.normal(config.days_mean, config.days_std))));

    PersonTrace trace =
        generate_person(name, tpl, config.link.at(score),
                        days, Rng::mix(config.seed, static_cast<std::uint64_t>(i) + 1),
                        config.generator);
    trace.member.age = age;
    trace.member.score = score;
    cohort.people.push_back(std::move(trace));
  }
  return cohort;
}

}  // namespace eb::synth
