#include "eb/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>

namespace eb::pipeline {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    std::string field = line.substr(pos, next == std::string::npos ? next : next - pos);
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    out.push_back(std::move(field));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("bad number: '" + s + "'");
  }
  return v;
}

}  // namespace

TimelineStore group_by_person(std::vector<DayTimeline> timelines) {
  TimelineStore store;
  for (DayTimeline& tl : timelines) {
    store[tl.person_id].push_back(std::move(tl));
  }
  for (auto& [person, days] : store) {
    std::sort(days.begin(), days.end(),
              [](const DayTimeline& a, const DayTimeline& b) { return a.epoch_day < b.epoch_day; });
  }
  return store;
}

models::CohortTable build_feature_table(std::span<const models::CohortMember> members,
                                        const TimelineStore& timelines,
                                        std::span<const int> window_counts, int n_max) {
  if (n_max < 1) throw DataError("n_max must be at least 1");
  models::CohortTable cohort;
  cohort.people.reserve(members.size());
  for (const models::CohortMember& member : members) {
    auto it = timelines.find(member.person_id);
    if (it == timelines.end()) {
      throw DataError("no timelines for cohort member " + member.person_id);
    }
    models::PersonRecord record;
    record.person_id = member.person_id;
    record.age = member.age;
    record.score = member.score;
    for (int S : window_counts) {
      const auto bm = matrix::build_behaviour_matrix(it->second, matrix::Segmentation(S));
      const auto series = eigenmodel::error_series(bm, n_max);
      for (int n = 1; n <= n_max; ++n) {
        const models::FeatureKey key{S, n};
        const int use = std::min(n, series.rank);
        record.features[key] = series.errors[static_cast<std::size_t>(use)];
        if (n > series.rank) record.saturated.insert(key);
      }
    }
    cohort.people.push_back(std::move(record));
  }
  return cohort;
}

void write_cohort_csv(std::ostream& out, std::span<const models::CohortMember> members) {
  out << "person_id,age,score\n";
  for (const models::CohortMember& m : members) {
    out << m.person_id << ',' << shortest(m.age) << ',' << m.score << '\n';
  }
}

std::vector<models::CohortMember> read_cohort_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("cohort csv: empty stream");
  if (split(line, ',') != std::vector<std::string>{"person_id", "age", "score"}) {
    throw DataError("cohort csv: unreadable header '" + line + "'");
  }
  std::vector<models::CohortMember> members;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw DataError("cohort csv: bad row '" + line + "'");
    models::CohortMember m;
    m.person_id = fields[0];
    m.age = to_double(fields[1]);
    m.score = static_cast<int>(to_double(fields[2]));
    members.push_back(std::move(m));
  }
  return members;
}

nlohmann::json timelines_to_json(const std::string& person_id,
                                 std::span<const DayTimeline> timelines) {
  nlohmann::json days = nlohmann::json::array();
  for (const DayTimeline& tl : timelines) {
    nlohmann::json segments = nlohmann::json::array();
    for (const TimelineSegment& s : tl.segments) {
      segments.push_back({s.begin_s, s.end_s, std::string(to_string(s.where))});
    }
    days.push_back({{"date", format_date(tl.epoch_day)},
                    {"attested_coverage", tl.attested_coverage},
                    {"no_event_day", tl.no_event_day},
                    {"segments", std::move(segments)}});
  }
  return {{"person_id", person_id}, {"days", std::move(days)}};
}

std::vector<DayTimeline> timelines_from_json(const nlohmann::json& j) {
  std::vector<DayTimeline> out;
  const std::string person = j.at("person_id").get<std::string>();
  for (const auto& day : j.at("days")) {
    DayTimeline tl;
    tl.person_id = person;
    tl.epoch_day = parse_date(day.at("date").get<std::string>());
    tl.attested_coverage = day.at("attested_coverage").get<double>();
    tl.no_event_day = day.at("no_event_day").get<bool>();
    for (const auto& seg : day.at("segments")) {
      tl.segments.push_back({seg.at(0).get<double>(), seg.at(1).get<double>(),
                             parse_location(seg.at(2).get<std::string>())});
    }
    out.push_back(std::move(tl));
  }
  return out;
}

void write_error_series_csv(std::ostream& out,
                            std::span<const eigenmodel::ReconstructionErrorSeries> series) {
  out << "person_id,S,n,error\n";
  for (const auto& s : series) {
    for (std::size_t n = 0; n < s.errors.size(); ++n) {
      out << s.person_id << ',' << s.windows_per_day << ',' << n << ','
          << shortest(s.errors[n]) << '\n';
    }
  }
}

models::CohortTable feature_table_from_error_csv(std::istream& in,
                                                 std::span<const models::CohortMember> members,
                                                 std::span<const int> window_counts, int n_max) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("error csv: empty stream");
  if (split(line, ',') != std::vector<std::string>{"person_id", "S", "n", "error"}) {
    throw DataError("error csv: unreadable header '" + line + "'");
  }
  // (person, S) -> errors by n
  std::map<std::pair<std::string, int>, std::map<int, double>> table;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw DataError("error csv: bad row '" + line + "'");
    table[{fields[0], static_cast<int>(to_double(fields[1]))}]
         [static_cast<int>(to_double(fields[2]))] = to_double(fields[3]);
  }

  models::CohortTable cohort;
  for (const models::CohortMember& member : members) {
    models::PersonRecord record;
    record.person_id = member.person_id;
    record.age = member.age;
    record.score = member.score;
    for (int S : window_counts) {
      auto it = table.find({member.person_id, S});
      if (it == table.end() || it->second.empty()) {
        throw DataError("error csv: no series for " + member.person_id + " at S=" +
                        std::to_string(S));
      }
      const int top = it->second.rbegin()->first;
      for (int n = 1; n <= n_max; ++n) {
        const models::FeatureKey key{S, n};
        const int use = std::min(n, top);
        auto fit = it->second.find(use);
        if (fit == it->second.end()) throw DataError("error csv: gap in series");
        record.features[key] = fit->second;
        if (n > top) record.saturated.insert(key);
      }
    }
    cohort.people.push_back(std::move(record));
  }
  return cohort;
}

nlohmann::json eigenmodel_to_json(const std::string& person_id, int windows_per_day,
                                  const eigenmodel::EigenModel& model) {
  nlohmann::json values = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i) {
    values.push_back(model.eigenvalues(i));
  }
  return {{"person_id", person_id},
          {"S", windows_per_day},
          {"rank", model.rank},
          {"eigenvalues", std::move(values)}};
}

void write_eigenvectors_csv(std::ostream& out, const eigenmodel::EigenModel& model) {
  std::string line = "component";
  for (int v = 1; v <= model.rank; ++v) line += ",v" + std::to_string(v);
  out << line << '\n';
  for (Eigen::Index r = 0; r < model.eigenvectors.rows(); ++r) {
    line = std::to_string(r);
    for (Eigen::Index c = 0; c < model.eigenvectors.cols(); ++c) {
      line += ',' + shortest(model.eigenvectors(r, c));
    }
    out << line << '\n';
  }
}

namespace {

nlohmann::json correlation_json(const models::Correlation& c) {
  return {{"rho", c.rho},
          {"p_value", c.p_value},
          {"n", c.n},
          {"stars", models::significance_stars(c.p_value)}};
}

}  // namespace

nlohmann::json regression_report_json(const models::RegressionReport& with_error,
                                      const models::RegressionReport& baseline,
                                      const models::CohortTable& cohort) {
  const models::FeatureKey key{with_error.windows_per_day, with_error.n_vectors};
  std::vector<double> ages, scores, errors;
  for (const models::PersonRecord& p : cohort.people) {
    ages.push_back(p.age);
    scores.push_back(p.score);
    errors.push_back(p.features.at(key));
  }

  nlohmann::json predictions = nlohmann::json::array();
  for (const models::Prediction& p : with_error.predictions) {
    predictions.push_back(
        {{"person_id", p.person_id}, {"score", p.truth}, {"predicted", p.predicted}});
  }

  // The three first-order partial correlations, each controlling for the
  // remaining variable.
  nlohmann::json partials = {
      {"age_vs_error", correlation_json(models::partial_correlation(ages, errors, scores))},
      {"score_vs_age", correlation_json(models::partial_correlation(scores, ages, errors))},
      {"score_vs_error", correlation_json(models::partial_correlation(scores, errors, ages))}};

  return {{"S", with_error.windows_per_day},
          {"n", with_error.n_vectors},
          {"rmsd", with_error.rmsd},
          {"mse", with_error.mse},
          {"r_squared", with_error.r_squared},
          {"baseline", {{"rmsd", baseline.rmsd}, {"mse", baseline.mse}}},
          {"partial_correlations", std::move(partials)},
          {"spearman_score_vs_error", correlation_json(models::spearman(scores, errors))},
          {"predictions", std::move(predictions)}};
}

nlohmann::json classification_report_json(const models::ClassificationReport& report) {
  nlohmann::json fold_aucs = nlohmann::json::array();
  for (double a : report.fold_aucs) fold_aucs.push_back(a);
  return {{"S", report.windows_per_day},
          {"n", report.n_vectors},
          {"threshold", report.threshold},
          {"repeats", static_cast<int>(report.fold_aucs.size())},
          {"mean_auc", report.mean_auc},
          {"fold_auc_mean", report.fold_auc_mean},
          {"fold_auc_std", report.fold_auc_std},
          {"fold_aucs", std::move(fold_aucs)},
          {"mean_roc",
           {{"fpr", report.fpr_grid}, {"tpr", report.mean_tpr}, {"tpr_std", report.std_tpr}}}};
}

nlohmann::json gridsearch_report_json(const models::GridSearchResult& result,
                                      double baseline_rmsd) {
  nlohmann::json surface = nlohmann::json::array();
  for (const models::GridCell& cell : result.surface) {
    surface.push_back({{"S", cell.windows_per_day},
                       {"n", cell.n_vectors},
                       {"rmsd", cell.rmsd},
                       {"saturated_people", cell.saturated_people}});
  }
  return {{"best", {{"S", result.best_windows}, {"n", result.best_n}, {"rmsd", result.best_rmsd}}},
          {"baseline_rmsd", baseline_rmsd},
          {"surface", std::move(surface)}};
}

void write_prediction_scatter_csv(std::ostream& out, const models::RegressionReport& report,
                                  const models::CohortTable& cohort) {
  out << "person_id,age,score,predicted\n";
  for (std::size_t i = 0; i < report.predictions.size(); ++i) {
    const models::Prediction& p = report.predictions[i];
    out << p.person_id << ',' << shortest(cohort.people[i].age) << ',' << shortest(p.truth)
        << ',' << shortest(p.predicted) << '\n';
  }
}

void write_mean_roc_csv(std::ostream& out, const models::ClassificationReport& report) {
  out << "fpr,mean_tpr,std_tpr\n";
  for (std::size_t g = 0; g < report.fpr_grid.size(); ++g) {
    out << shortest(report.fpr_grid[g]) << ',' << shortest(report.mean_tpr[g]) << ','
        << shortest(report.std_tpr[g]) << '\n';
  }
}

void write_fold_roc_csv(std::ostream& out, const models::ClassificationReport& report) {
  out << "fold,fpr,tpr\n";
  for (std::size_t f = 0; f < report.fold_rocs.size(); ++f) {
    for (const models::RocPoint& p : report.fold_rocs[f].points) {
      out << f << ',' << shortest(p.fpr) << ',' << shortest(p.tpr) << '\n';
    }
  }
}

void write_surface_csv(std::ostream& out, const models::GridSearchResult& result) {
  out << "S,n,rmsd,saturated_people\n";
  for (const models::GridCell& cell : result.surface) {
    out << cell.windows_per_day << ',' << cell.n_vectors << ',' << shortest(cell.rmsd) << ','
        << cell.saturated_people << '\n';
  }
}

}  // namespace eb::pipeline
