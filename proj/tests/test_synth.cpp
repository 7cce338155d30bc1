#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eb/eigenmodel.hpp"
#include "eb/ingest.hpp"
#include "eb/matrix.hpp"
#include "eb/synth.hpp"

using namespace eb;
using synth::GeneratorConfig;
using synth::NoiseProfile;
using synth::PersonTrace;

namespace {

bool timelines_equal(const std::vector<DayTimeline>& a, const std::vector<DayTimeline>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].epoch_day != b[i].epoch_day) return false;
    if (a[i].segments.size() != b[i].segments.size()) return false;
    for (std::size_t s = 0; s < a[i].segments.size(); ++s) {
      if (a[i].segments[s].begin_s != b[i].segments[s].begin_s) return false;
      if (a[i].segments[s].end_s != b[i].segments[s].end_s) return false;
      if (a[i].segments[s].where != b[i].segments[s].where) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("a noiseless routine repeats the same day") {
  const auto tpl = synth::default_routine(false);
  const PersonTrace trace = synth::generate_person("p", tpl, NoiseProfile{0.0, 0.0}, 6, 42);
  REQUIRE(trace.timelines.size() == 6);
  for (std::size_t d = 1; d < trace.timelines.size(); ++d) {
    REQUIRE(trace.timelines[d].segments.size() == trace.timelines[0].segments.size());
    for (std::size_t s = 0; s < trace.timelines[d].segments.size(); ++s) {
      CHECK(trace.timelines[d].segments[s].begin_s == trace.timelines[0].segments[s].begin_s);
      CHECK(trace.timelines[d].segments[s].where == trace.timelines[0].segments[s].where);
    }
  }
  const auto bm = matrix::build_behaviour_matrix(trace.timelines, matrix::Segmentation(24));
  CHECK(bm.deviations.cwiseAbs().maxCoeff() == 0.0);
  const auto series = eigenmodel::error_series(bm, 10);
  CHECK(series.rank == 0);
  CHECK(series.errors[0] == 0.0);
}

TEST_CASE("the same seed reproduces the trace bit for bit") {
  const auto tpl = synth::default_routine(true);
  const NoiseProfile noise{240.0, 2.0};
  const PersonTrace a = synth::generate_person("p", tpl, noise, 10, 7);
  const PersonTrace b = synth::generate_person("p", tpl, noise, 10, 7);
  CHECK(timelines_equal(a.timelines, b.timelines));
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].start_s == b.events[i].start_s);
    CHECK(a.events[i].duration_s == b.events[i].duration_s);
    CHECK(a.events[i].sensor_id == b.events[i].sensor_id);
    CHECK(a.events[i].place == b.events[i].place);
  }
  const PersonTrace c = synth::generate_person("p", tpl, noise, 10, 8);
  CHECK_FALSE(timelines_equal(a.timelines, c.timelines));
}

TEST_CASE("emitted events re-ingest to the generated timelines") {
  const auto tpl = synth::default_routine(true);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const NoiseProfile noise{60.0 * static_cast<double>(seed), 0.8 * static_cast<double>(seed)};
    const PersonTrace trace = synth::generate_person("p", tpl, noise, 12, seed);
    ingest::TimelineConfig cfg;
    cfg.quiet_period_s = GeneratorConfig{}.quiet_period_s;
    const auto rebuilt = ingest::build_day_timelines(trace.events, cfg);
    REQUIRE_MESSAGE(timelines_equal(trace.timelines, rebuilt), "seed " << seed);
  }
}

TEST_CASE("events sit on the 2-second sensor grid") {
  const auto tpl = synth::default_routine(true);
  const PersonTrace trace = synth::generate_person("p", tpl, NoiseProfile{500.0, 3.0}, 8, 11);
  for (const SensorEvent& ev : trace.events) {
    CHECK(std::fmod(ev.start_s, 2.0) == 0.0);
  }
  for (const DayTimeline& tl : trace.timelines) {
    for (const TimelineSegment& s : tl.segments) {
      CHECK(std::fmod(s.begin_s, 2.0) == 0.0);
    }
  }
}

TEST_CASE("score link is monotone") {
  const synth::ScoreLink link;
  const NoiseProfile best = link.at(30);
  const NoiseProfile mid = link.at(15);
  const NoiseProfile worst = link.at(0);
  CHECK(best.jitter_sigma_s <= mid.jitter_sigma_s);
  CHECK(mid.jitter_sigma_s <= worst.jitter_sigma_s);
  CHECK(best.erratic_rate <= mid.erratic_rate);
  CHECK(mid.erratic_rate <= worst.erratic_rate);
  // Out-of-range scores clamp.
  CHECK(link.at(35).jitter_sigma_s == link.at(30).jitter_sigma_s);
  CHECK(link.at(-5).erratic_rate == link.at(0).erratic_rate);
}

TEST_CASE("noisier settings raise the late reconstruction errors") {
  const auto tpl = synth::default_routine(true);
  int noisier_wins = 0;
  const int seeds = 8;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    double errors[2];
    int k = 0;
    for (const double jitter : {60.0, 600.0}) {
      const PersonTrace trace =
          synth::generate_person("p", tpl, NoiseProfile{jitter, jitter / 150.0}, 24, seed);
      const auto bm = matrix::build_behaviour_matrix(trace.timelines, matrix::Segmentation(24));
      const auto series = eigenmodel::error_series(bm, 7);
      errors[k++] = series.errors[std::min<std::size_t>(7, series.errors.size() - 1)];
    }
    noisier_wins += errors[1] > errors[0];
  }
  CHECK(noisier_wins >= seeds - 1);
}

TEST_CASE("errors grow with the erratic rate at every order (sign test)") {
  // 20 paired seeds, two erratic rates; >= 15 wins rejects "no effect" at
  // p < 0.05 under the binomial sign test.
  const auto tpl = synth::default_routine(true);
  const int seeds = 20;
  for (const int order : {1, 4, 7}) {
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      double errors[2];
      int k = 0;
      for (const double rate : {0.5, 5.0}) {
        const PersonTrace trace =
            synth::generate_person("p", tpl, NoiseProfile{120.0, rate}, 20, seed);
        const auto bm =
            matrix::build_behaviour_matrix(trace.timelines, matrix::Segmentation(24));
        const auto series = eigenmodel::error_series(bm, order);
        errors[k++] = series.errors[std::min<std::size_t>(
            static_cast<std::size_t>(order), series.errors.size() - 1)];
      }
      wins += errors[1] > errors[0];
    }
    CHECK_MESSAGE(wins >= 15, "order " << order << ": " << wins << "/20");
  }
}

TEST_CASE("cohort generation matches the requested marginals") {
  synth::CohortConfig cfg;
  cfg.size = 48;
  cfg.seed = 20210301;
  const synth::SyntheticCohort cohort = synth::generate_cohort(cfg);
  REQUIRE(cohort.people.size() == 48);
  double age_sum = 0.0;
  for (const PersonTrace& p : cohort.people) {
    CHECK(p.member.age >= 65.0);
    CHECK(p.member.age <= 98.0);
    CHECK(p.member.score >= 0);
    CHECK(p.member.score <= 30);
    CHECK(static_cast<int>(p.timelines.size()) >= cfg.min_days);
    age_sum += p.member.age;
    // Unique, stable person ids.
    CHECK(p.member.person_id.size() == 4);
  }
  CHECK(age_sum / 48.0 > 70.0);
  CHECK(age_sum / 48.0 < 92.0);

  // Determinism across calls.
  const synth::SyntheticCohort again = synth::generate_cohort(cfg);
  for (std::size_t i = 0; i < cohort.people.size(); ++i) {
    CHECK(cohort.people[i].member.age == again.people[i].member.age);
    CHECK(cohort.people[i].member.score == again.people[i].member.score);
    CHECK(timelines_equal(cohort.people[i].timelines, again.people[i].timelines));
  }
}

TEST_CASE("degenerate cohort configurations are rejected") {
  synth::CohortConfig cfg;
  cfg.size = 3;
  CHECK_THROWS_AS(synth::generate_cohort(cfg), DataError);
  cfg = synth::CohortConfig{};
  cfg.age_max = cfg.age_min;
  CHECK_THROWS_AS(synth::generate_cohort(cfg), DataError);
  cfg = synth::CohortConfig{};
  cfg.score_std = 0.0;
  CHECK_THROWS_AS(synth::generate_cohort(cfg), DataError);
  cfg = synth::CohortConfig{};
  cfg.link.jitter_worst_s = cfg.link.jitter_best_s - 1.0;
  CHECK_THROWS_AS(synth::generate_cohort(cfg), DataError);
}

TEST_CASE("template validation") {
  synth::RoutineTemplate empty;
  CHECK_THROWS_AS(synth::generate_person("p", empty, NoiseProfile{}, 4, 1), DataError);

  synth::RoutineTemplate late;
  late.schedule = {{3600.0, Location::Bedroom}};
  CHECK_THROWS_AS(synth::generate_person("p", late, NoiseProfile{}, 4, 1), DataError);

  synth::RoutineTemplate unsorted;
  unsorted.schedule = {{0.0, Location::Bedroom}, {200.0, Location::Kitchen},
                       {100.0, Location::Bathroom}};
  CHECK_THROWS_AS(synth::generate_person("p", unsorted, NoiseProfile{}, 4, 1), DataError);

  const auto tpl = synth::default_routine(false);
  CHECK_THROWS_AS(synth::generate_person("p", tpl, NoiseProfile{}, 1, 1), DataError);
  CHECK_THROWS_AS(synth::generate_person("p", tpl, NoiseProfile{-1.0, 0.0}, 4, 1), DataError);
}

TEST_CASE("weekly variation produces distinct weekday structure") {
  const auto weekly = synth::default_routine(true);
  CHECK(weekly.weekly_overrides.size() == 6);  // Monday is the base schedule
  const PersonTrace trace =
      synth::generate_person("p", weekly, NoiseProfile{0.0, 0.0}, 14, 3);
  // With zero noise, days a week apart are identical; adjacent days differ.
  REQUIRE(trace.timelines.size() == 14);
  CHECK(timelines_equal({trace.timelines[0]}, {trace.timelines[0]}));
  bool adjacent_differ = false;
  for (std::size_t d = 1; d < 7; ++d) {
    if (trace.timelines[d].segments.size() != trace.timelines[d - 1].segments.size()) {
      adjacent_differ = true;
      break;
    }
    for (std::size_t s = 0; s < trace.timelines[d].segments.size(); ++s) {
      if (trace.timelines[d].segments[s].begin_s != trace.timelines[d - 1].segments[s].begin_s ||
          trace.timelines[d].segments[s].where != trace.timelines[d - 1].segments[s].where) {
        adjacent_differ = true;
        break;
      }
    }
  }
  CHECK(adjacent_differ);
  for (std::size_t d = 7; d < 14; ++d) {
    const auto& a = trace.timelines[d];
    const auto& b = trace.timelines[d - 7];
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t s = 0; s < a.segments.size(); ++s) {
      CHECK(a.segments[s].begin_s == b.segments[s].begin_s);
      CHECK(a.segments[s].where == b.segments[s].where);
    }
  }
}
