#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eb/models.hpp"
#include "eb/types.hpp"

namespace eb::synth {

struct AnchorPoint {
  double offset_s = 0.0;
  Location where = Location::Bedroom;
};

// A canonical day as anchor points (strictly increasing, first at offset 0),
// plus optional per-weekday variants to induce a 7-day periodicity.
struct RoutineTemplate {
  std::vector<AnchorPoint> schedule;
  std::map<int, std::vector<AnchorPoint>> weekly_overrides;  // 0 = Monday .. 6
};

struct NoiseProfile {
  double jitter_sigma_s = 0.0;  // Gaussian shift of anchor times
  double erratic_rate = 0.0;    // Poisson count of random excursions per day
};

// Monotone map from the synthetic cognition score (0..30) to noise
// parameters, linear in (30 - score). Lower scores mean noisier days.
struct ScoreLink {
  double jitter_best_s = 60.0;
  double jitter_worst_s = 900.0;
  double erratic_best = 0.0;
  double erratic_worst = 6.0;

  NoiseProfile at(int score) const;
};

struct GeneratorConfig {
  std::int64_t start_epoch_day = 18687;  // 2021-03-01, a Monday
  double quiet_period_s = 300.0;         // must match the ingest config
};

struct PersonTrace {
  models::CohortMember member;
  std::vector<DayTimeline> timelines;  // the retained days
  std::vector<SensorEvent> events;     // includes the sacrificial first/last day
};

// Generates `days` retained days plus one sacrificial day on each side (the
// ingest stage drops the first and last measurement day). The emitted PIR and
// door event stream is on a 2-second grid and re-ingests to exactly the
// returned timelines.
PersonTrace generate_person(const std::string& person_id, const RoutineTemplate& tpl,
                            const NoiseProfile& noise, int days, std::uint64_t seed,
                            const GeneratorConfig& config = {});

struct CohortConfig {
  int size = 48;
  double days_mean = 30.6;
  double days_std = 3.6;
  int min_days = 14;
  double age_min = 65.0;
  double age_max = 98.0;
  double score_mean = 23.88;
  double score_std = 4.54;
  // Expected score drop per year above the mid age; 0 decouples age and score.
  double age_score_slope = 0.1;
  ScoreLink link;
  bool weekly_variation = true;
  std::uint64_t seed = 1;
  GeneratorConfig generator;
};

struct SyntheticCohort {
  std::vector<PersonTrace> people;
};

SyntheticCohort generate_cohort(const CohortConfig& config);

// The built-in canonical day. With weekly variation every weekday gets a
// structurally distinct variant (wake time, outings, naps).
RoutineTemplate default_routine(bool weekly_variation);

}  // namespace eb::synth
