#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "eb/types.hpp"

namespace eb::matrix {

// Number of equal windows a day is divided into. Any divisor of 86400 is
// accepted; the analysis defaults to {24, 48, 96, 144, 288}.
struct Segmentation {
  int windows_per_day;
  explicit Segmentation(int windows);
  double window_s() const { return kSecondsPerDay / windows_per_day; }
};

inline constexpr std::array<int, 5> kDefaultWindowCounts = {24, 48, 96, 144, 288};

// Per-person presence matrix: one row per day, one column per
// (location, window) pair. Columns are stacked per location in kLocationOrder,
// so column k*S + n holds window n of location k. Every row stores presence
// fractions in [0, 1] that sum to 1 over the six locations of each window.
struct BehaviourMatrix {
  std::string person_id;
  int windows_per_day = 0;
  std::vector<std::int64_t> days;  // ascending epoch days, one per row
  Eigen::MatrixXd presence;        // D x (S*6)
  Eigen::VectorXd mean_day;        // column means of presence
  Eigen::MatrixXd deviations;      // presence minus mean_day, row-wise

  int column(Location where, int window) const;
};

// Requires >= 2 days, all belonging to one person.
BehaviourMatrix build_behaviour_matrix(const std::vector<DayTimeline>& timelines,
                                       Segmentation seg);

Eigen::VectorXd mean_day_of(const Eigen::MatrixXd& presence);
Eigen::MatrixXd deviations_of(const Eigen::MatrixXd& presence, const Eigen::VectorXd& mean_day);

// CSV dump: date column followed by S*6 value columns named loc{k}_w{n}
// (k in 1..6 following kLocationOrder, n in 0..S-1). Round-trips exactly.
void write_matrix_csv(std::ostream& out, const BehaviourMatrix& bm);
BehaviourMatrix read_matrix_csv(std::istream& in, const std::string& person_id);

}  // namespace eb::matrix
