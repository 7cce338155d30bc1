#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eb/eigenmodel.hpp"
#include "eb/models.hpp"
#include "eb/types.hpp"

namespace eb::pipeline {

using TimelineStore = std::map<std::string, std::vector<DayTimeline>>;

TimelineStore group_by_person(std::vector<DayTimeline> timelines);

// Builds the per-person feature map: for every window count S the behaviour
// matrix is built, the eigenmodel fit, and errors[n] recorded for
// n = 1..n_max. Orders past a person's rank saturate at errors[rank] and are
// flagged.
models::CohortTable build_feature_table(std::span<const models::CohortMember> members,
                                        const TimelineStore& timelines,
                                        std::span<const int> window_counts, int n_max);

// --- file formats -----------------------------------------------------------

void write_cohort_csv(std::ostream& out, std::span<const models::CohortMember> members);
std::vector<models::CohortMember> read_cohort_csv(std::istream& in);

nlohmann::json timelines_to_json(const std::string& person_id,
                                 std::span<const DayTimeline> timelines);
std::vector<DayTimeline> timelines_from_json(const nlohmann::json& j);

// `person_id,S,n,error` rows, ascending; one row per n = 0..min(n_max, rank).
void write_error_series_csv(std::ostream& out,
                            std::span<const eigenmodel::ReconstructionErrorSeries> series);

// Rebuilds cohort features from an error-series file. Requests above the
// highest stored n saturate at the last value and are flagged.
models::CohortTable feature_table_from_error_csv(std::istream& in,
                                                 std::span<const models::CohortMember> members,
                                                 std::span<const int> window_counts, int n_max);

nlohmann::json eigenmodel_to_json(const std::string& person_id, int windows_per_day,
                                  const eigenmodel::EigenModel& model);
void write_eigenvectors_csv(std::ostream& out, const eigenmodel::EigenModel& model);

// --- reports -----------------------------------------------------------------

nlohmann::json regression_report_json(const models::RegressionReport& with_error,
                                      const models::RegressionReport& baseline,
                                      const models::CohortTable& cohort);
nlohmann::json classification_report_json(const models::ClassificationReport& report);
nlohmann::json gridsearch_report_json(const models::GridSearchResult& result,
                                      double baseline_rmsd);

void write_prediction_scatter_csv(std::ostream& out, const models::RegressionReport& report,
                                  const models::CohortTable& cohort);
void write_mean_roc_csv(std::ostream& out, const models::ClassificationReport& report);
void write_fold_roc_csv(std::ostream& out, const models::ClassificationReport& report);
void write_surface_csv(std::ostream& out, const models::GridSearchResult& result);

}  // namespace eb::pipeline
