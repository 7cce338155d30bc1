// ebx: command-line front end for the eigenbehaviour pipeline.
//
//   simulate -> ingest -> matrix -> eigen -> predict / classify / gridsearch
//
// Every stage reads and writes plain files under the output directory, so
// each intermediate artifact can be inspected or swapped out. The analysis
// commands backfill any missing upstream stage automatically.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "eb/eigenmodel.hpp"
#include "eb/ingest.hpp"
#include "eb/matrix.hpp"
#include "eb/models.hpp"
#include "eb/pipeline.hpp"
#include "eb/svg.hpp"
#include "eb/synth.hpp"
#include "eb/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string events_path;    // default: <out>/events.csv
  std::string cohort_path;    // default: <out>/cohort.csv
  std::string room_map_path;  // optional
  std::int64_t timezone_offset_s = 0;
  double quiet_period_s = 300.0;
  double min_coverage = 0.0;
  std::vector<int> window_counts{24, 48, 96, 144, 288};
  int n_max = 10;
  int threshold = 26;
  int repeats = 20;
  int predict_windows = 24;
  int predict_n = 7;
  bool write_vectors = false;
  bool write_svg = false;
  eb::synth::CohortConfig simulate;

  std::string events() const { return events_path.empty() ? out_dir + "/events.csv" : events_path; }
  std::string cohort() const { return cohort_path.empty() ? out_dir + "/cohort.csv" : cohort_path; }
};

void apply_link_preset(eb::synth::ScoreLink& link, const std::string& name) {
  if (name == "default") {
    link = eb::synth::ScoreLink{};
  } else if (name == "strong") {
    link = eb::synth::ScoreLink{30.0, 1500.0, 0.0, 10.0};
  } else {
    throw eb::DataError("unknown score link preset: '" + name + "'");
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw eb::DataError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw eb::DataError(std::string("bad config JSON: ") + e.what());
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("events")) cfg.events_path = j["events"].get<std::string>();
  if (j.contains("cohort")) cfg.cohort_path = j["cohort"].get<std::string>();
  if (j.contains("room_map")) cfg.room_map_path = j["room_map"].get<std::string>();
  if (j.contains("timezone_offset_s")) cfg.timezone_offset_s = j["timezone_offset_s"].get<std::int64_t>();
  if (j.contains("quiet_period_s")) cfg.quiet_period_s = j["quiet_period_s"].get<double>();
  if (j.contains("min_coverage")) cfg.min_coverage = j["min_coverage"].get<double>();
  if (j.contains("s_set")) cfg.window_counts = j["s_set"].get<std::vector<int>>();
  if (j.contains("n_max")) cfg.n_max = j["n_max"].get<int>();
  if (j.contains("threshold")) cfg.threshold = j["threshold"].get<int>();
  if (j.contains("repeats")) cfg.repeats = j["repeats"].get<int>();
  if (j.contains("predict")) {
    const json& p = j["predict"];
    if (p.contains("S")) cfg.predict_windows = p["S"].get<int>();
    if (p.contains("n")) cfg.predict_n = p["n"].get<int>();
  }
  if (j.contains("simulate")) {
    const json& s = j["simulate"];
    auto& sim = cfg.simulate;
    if (s.contains("size")) sim.size = s["size"].get<int>();
    if (s.contains("days_mean")) sim.days_mean = s["days_mean"].get<double>();
    if (s.contains("days_std")) sim.days_std = s["days_std"].get<double>();
    if (s.contains("min_days")) sim.min_days = s["min_days"].get<int>();
    if (s.contains("age_min")) sim.age_min = s["age_min"].get<double>();
    if (s.contains("age_max")) sim.age_max = s["age_max"].get<double>();
    if (s.contains("score_mean")) sim.score_mean = s["score_mean"].get<double>();
    if (s.contains("score_std")) sim.score_std = s["score_std"].get<double>();
    if (s.contains("age_score_slope")) sim.age_score_slope = s["age_score_slope"].get<double>();
    if (s.contains("weekly_variation")) sim.weekly_variation = s["weekly_variation"].get<bool>();
    if (s.contains("start_date")) {
      sim.generator.start_epoch_day = eb::parse_date(s["start_date"].get<std::string>());
    }
    if (s.contains("link")) {
      if (s["link"].is_string()) {
        apply_link_preset(sim.link, s["link"].get<std::string>());
      } else {
        const json& l = s["link"];
        if (l.contains("jitter_best_s")) sim.link.jitter_best_s = l["jitter_best_s"].get<double>();
        if (l.contains("jitter_worst_s")) sim.link.jitter_worst_s = l["jitter_worst_s"].get<double>();
        if (l.contains("erratic_best")) sim.link.erratic_best = l["erratic_best"].get<double>();
        if (l.contains("erratic_worst")) sim.link.erratic_worst = l["erratic_worst"].get<double>();
      }
    }
  }
}

void validate_config(const RunConfig& cfg) {
  if (cfg.window_counts.empty()) throw eb::DataError("config: s_set must not be empty");
  for (int S : cfg.window_counts) eb::matrix::Segmentation check(S);
  if (cfg.n_max < 1) throw eb::DataError("config: n_max must be at least 1");
  if (cfg.repeats < 1) throw eb::DataError("config: repeats must be at least 1");
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw eb::DataError("cannot write " + path.string());
  out << content;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::vector<std::string> sorted_files(const fs::path& dir, const std::string& extension) {
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- stages ------------------------------------------------------------------

void run_simulate(const RunConfig& cfg) {
  eb::synth::CohortConfig sim = cfg.simulate;
  sim.seed = cfg.seed;
  sim.generator.quiet_period_s = cfg.quiet_period_s;
  const eb::synth::SyntheticCohort cohort = eb::synth::generate_cohort(sim);

  std::vector<eb::SensorEvent> events;
  std::vector<eb::models::CohortMember> members;
  for (const auto& person : cohort.people) {
    events.insert(events.end(), person.events.begin(), person.events.end());
    members.push_back(person.member);
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const eb::SensorEvent& a, const eb::SensorEvent& b) {
                     if (a.person_id != b.person_id) return a.person_id < b.person_id;
                     if (a.start_s != b.start_s) return a.start_s < b.start_s;
                     return a.sensor_id < b.sensor_id;
                   });

  {
    std::ostringstream out;
    if (cfg.events().ends_with(".jsonl") || cfg.events().ends_with(".ndjson")) {
      eb::ingest::write_event_jsonl(out, events);
    } else {
      eb::ingest::write_event_csv(out, events);
    }
    write_file(cfg.events(), out.str());
  }
  {
    std::ostringstream out;
    eb::pipeline::write_cohort_csv(out, members);
    write_file(cfg.cohort(), out.str());
  }
  std::cout << "simulate: " << cohort.people.size() << " people, " << events.size()
            << " events -> " << cfg.events() << "\n";
}

eb::pipeline::TimelineStore run_ingest(const RunConfig& cfg) {
  std::optional<eb::ingest::RoomMap> room_map;
  if (!cfg.room_map_path.empty()) room_map = eb::ingest::load_room_map(cfg.room_map_path);
  eb::ingest::ParseResult parsed =
      eb::ingest::load_event_log(cfg.events(), room_map ? &*room_map : nullptr);
  if (parsed.malformed_rows > 0) {
    std::cerr << "warning: skipped " << parsed.malformed_rows << " malformed rows\n";
  }
  eb::ingest::TimelineConfig tcfg;
  tcfg.quiet_period_s = cfg.quiet_period_s;
  tcfg.utc_offset_s = cfg.timezone_offset_s;
  auto timelines = eb::ingest::filter_days(
      eb::ingest::build_day_timelines(std::move(parsed.events), tcfg), cfg.min_coverage);

  auto store = eb::pipeline::group_by_person(std::move(timelines));
  for (const auto& [person, days] : store) {
    write_json(fs::path(cfg.out_dir) / "timelines" / (person + ".json"),
               eb::pipeline::timelines_to_json(person, days));
  }
  std::cout << "ingest: timelines for " << store.size() << " people -> " << cfg.out_dir
            << "/timelines\n";
  return store;
}

eb::pipeline::TimelineStore load_timelines(const RunConfig& cfg) {
  eb::pipeline::TimelineStore store;
  for (const std::string& file : sorted_files(fs::path(cfg.out_dir) / "timelines", ".json")) {
    std::ifstream in(file);
    json j;
    in >> j;
    auto days = eb::pipeline::timelines_from_json(j);
    if (!days.empty()) store[days.front().person_id] = std::move(days);
  }
  if (store.empty()) store = run_ingest(cfg);
  return store;
}

void run_matrix(const RunConfig& cfg, const eb::pipeline::TimelineStore& store) {
  for (int S : cfg.window_counts) {
    const fs::path dir = fs::path(cfg.out_dir) / "matrices" / ("S" + std::to_string(S));
    for (const auto& [person, days] : store) {
      const auto bm = eb::matrix::build_behaviour_matrix(days, eb::matrix::Segmentation(S));
      std::ostringstream out;
      eb::matrix::write_matrix_csv(out, bm);
      write_file(dir / (person + ".csv"), out.str());
    }
  }
  std::cout << "matrix: " << store.size() << " people x " << cfg.window_counts.size()
            << " segmentations -> " << cfg.out_dir << "/matrices\n";
}

void run_eigen(const RunConfig& cfg) {
  for (int S : cfg.window_counts) {
    if (sorted_files(fs::path(cfg.out_dir) / "matrices" / ("S" + std::to_string(S)), ".csv")
            .empty()) {
      run_matrix(cfg, load_timelines(cfg));
      break;
    }
  }
  std::vector<eb::eigenmodel::ReconstructionErrorSeries> all_series;
  for (int S : cfg.window_counts) {
    const fs::path dir = fs::path(cfg.out_dir) / "matrices" / ("S" + std::to_string(S));
    const auto files = sorted_files(dir, ".csv");
    if (files.empty()) throw eb::DataError("no matrices under " + dir.string());
    for (const std::string& file : files) {
      const std::string person = fs::path(file).stem().string();
      std::ifstream in(file);
      const auto bm = eb::matrix::read_matrix_csv(in, person);
      const auto model = eb::eigenmodel::fit(bm);
      const fs::path edir = fs::path(cfg.out_dir) / "eigen" / ("S" + std::to_string(S));
      write_json(edir / (person + ".json"), eb::pipeline::eigenmodel_to_json(person, S, model));
      if (cfg.write_vectors) {
        std::ostringstream out;
        eb::pipeline::write_eigenvectors_csv(out, model);
        write_file(edir / (person + "_vectors.csv"), out.str());
      }
      all_series.push_back(eb::eigenmodel::error_series(bm, cfg.n_max));
    }
  }
  std::ostringstream out;
  eb::pipeline::write_error_series_csv(out, all_series);
  write_file(fs::path(cfg.out_dir) / "errors.csv", out.str());
  if (cfg.write_svg) {
    std::vector<eb::svg::Series> curves;
    for (const auto& series : all_series) {
      if (series.windows_per_day != cfg.window_counts.front()) continue;
      eb::svg::Series s;
      s.color = "#8888cc";
      s.stroke_width = 1.0;
      for (std::size_t n = 0; n < series.errors.size(); ++n) {
        s.points.emplace_back(static_cast<double>(n), series.errors[n]);
      }
      curves.push_back(std::move(s));
    }
    write_file(fs::path(cfg.out_dir) / "error_series.svg",
               eb::svg::render_chart("normalized reconstruction error, S=" +
                                         std::to_string(cfg.window_counts.front()),
                                     "eigenvectors used", "error", curves));
  }
  std::cout << "eigen: " << all_series.size() << " error series -> " << cfg.out_dir
            << "/errors.csv\n";
}

std::vector<eb::models::CohortMember> load_cohort(const RunConfig& cfg) {
  std::ifstream in(cfg.cohort());
  if (!in) throw eb::DataError("cannot open cohort: " + cfg.cohort());
  return eb::pipeline::read_cohort_csv(in);
}

eb::models::CohortTable load_features(const RunConfig& cfg) {
  const auto members = load_cohort(cfg);
  const fs::path errors = fs::path(cfg.out_dir) / "errors.csv";
  if (!fs::exists(errors)) {
    // Backfill the missing stages from whatever input is present.
    auto store = load_timelines(cfg);
    run_matrix(cfg, store);
    run_eigen(cfg);
  }
  std::ifstream in(errors);
  if (!in) throw eb::DataError("cannot open " + errors.string());
  return eb::pipeline::feature_table_from_error_csv(in, members, cfg.window_counts, cfg.n_max);
}

void run_predict(const RunConfig& cfg) {
  const auto cohort = load_features(cfg);
  const auto report = eb::models::loo_rmsd(cohort, cfg.predict_windows, cfg.predict_n, true);
  const auto baseline = eb::models::loo_rmsd(cohort, cfg.predict_windows, cfg.predict_n, false);
  write_json(fs::path(cfg.out_dir) / "predict_report.json",
             eb::pipeline::regression_report_json(report, baseline, cohort));
  std::ostringstream out;
  eb::pipeline::write_prediction_scatter_csv(out, report, cohort);
  write_file(fs::path(cfg.out_dir) / "predict_scatter.csv", out.str());
  if (cfg.write_svg) {
    eb::svg::Series diagonal;
    diagonal.color = "#222222";
    diagonal.stroke_width = 1.0;
    diagonal.name = "ideal";
    eb::svg::Series dots;
    dots.markers = true;
    dots.name = "people";
    double lo = 30.0, hi = 0.0;
    for (const auto& p : report.predictions) {
      dots.points.emplace_back(p.truth, p.predicted);
      lo = std::min({lo, p.truth, p.predicted});
      hi = std::max({hi, p.truth, p.predicted});
    }
    diagonal.points = {{lo, lo}, {hi, hi}};
    write_file(fs::path(cfg.out_dir) / "predict_scatter.svg",
               eb::svg::render_chart("leave-one-out score prediction", "true score",
                                     "predicted score", {diagonal, dots}));
  }
  std::cout << "predict: S=" << report.windows_per_day << " n=" << report.n_vectors
            << " rmsd=" << report.rmsd << " (baseline " << baseline.rmsd << ") -> "
            << cfg.out_dir << "/predict_report.json\n";
}

void run_classify(const RunConfig& cfg) {
  const auto cohort = load_features(cfg);
  eb::models::FoldsConfig folds;
  folds.repeats = cfg.repeats;
  folds.seed = cfg.seed;
  const auto report = eb::models::classify_cohort(cohort, cfg.predict_windows, cfg.predict_n,
                                                  cfg.threshold, folds);
  write_json(fs::path(cfg.out_dir) / "classify_report.json",
             eb::pipeline::classification_report_json(report));
  {
    std::ostringstream out;
    eb::pipeline::write_mean_roc_csv(out, report);
    write_file(fs::path(cfg.out_dir) / "roc_mean.csv", out.str());
  }
  {
    std::ostringstream out;
    eb::pipeline::write_fold_roc_csv(out, report);
    write_file(fs::path(cfg.out_dir) / "roc_folds.csv", out.str());
  }
  if (cfg.write_svg) {
    std::vector<eb::svg::Series> curves;
    for (const auto& fold : report.fold_rocs) {
      eb::svg::Series s;
      s.color = "#bbbbbb";
      s.stroke_width = 0.8;
      for (const auto& p : fold.points) s.points.emplace_back(p.fpr, p.tpr);
      curves.push_back(std::move(s));
    }
    eb::svg::Series mean;
    mean.color = "#7733aa";
    mean.stroke_width = 2.5;
    mean.name = "mean ROC";
    for (std::size_t g = 0; g < report.fpr_grid.size(); ++g) {
      mean.points.emplace_back(report.fpr_grid[g], report.mean_tpr[g]);
    }
    curves.push_back(std::move(mean));
    write_file(fs::path(cfg.out_dir) / "roc_mean.svg",
               eb::svg::render_chart("classification ROC", "false positive rate",
                                     "true positive rate", curves));
  }
  std::cout << "classify: mean AUC=" << report.mean_auc << " (fold std "
            << report.fold_auc_std << ") -> " << cfg.out_dir << "/classify_report.json\n";
}

void run_gridsearch(const RunConfig& cfg) {
  const auto cohort = load_features(cfg);
  std::vector<int> orders;
  for (int n = 1; n <= cfg.n_max; ++n) orders.push_back(n);
  const auto result = eb::models::grid_search(cohort, cfg.window_counts, orders);
  const auto baseline =
      eb::models::loo_rmsd(cohort, cfg.window_counts.front(), orders.front(), false);
  write_json(fs::path(cfg.out_dir) / "gridsearch_report.json",
             eb::pipeline::gridsearch_report_json(result, baseline.rmsd));
  std::ostringstream out;
  eb::pipeline::write_surface_csv(out, result);
  write_file(fs::path(cfg.out_dir) / "rmsd_surface.csv", out.str());
  if (cfg.write_svg) {
    const char* palette[] = {"#7733aa", "#cc5544", "#338855", "#4466cc", "#aa8822"};
    std::vector<eb::svg::Series> curves;
    std::map<int, eb::svg::Series> by_windows;
    for (const auto& cell : result.surface) {
      auto& s = by_windows[cell.windows_per_day];
      s.points.emplace_back(cell.n_vectors, cell.rmsd);
    }
    int idx = 0;
    for (auto& [windows, s] : by_windows) {
      s.color = palette[idx++ % 5];
      s.name = "S=" + std::to_string(windows);
      curves.push_back(std::move(s));
    }
    write_file(fs::path(cfg.out_dir) / "rmsd_surface.svg",
               eb::svg::render_chart("grid search", "eigenvectors used", "leave-one-out RMSD",
                                     curves));
  }
  std::cout << "gridsearch: best S=" << result.best_windows << " n=" << result.best_n
            << " rmsd=" << result.best_rmsd << " -> " << cfg.out_dir
            << "/gridsearch_report.json\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eigenbehaviour biomarker pipeline"};
  app.require_subcommand(1);
  app.fallthrough(true);

  std::string config_path;
  RunConfig cfg;
  std::optional<std::uint64_t> seed_flag;
  std::optional<std::string> out_flag;
  std::optional<std::vector<int>> s_set_flag;
  std::optional<int> n_max_flag, threshold_flag, repeats_flag, s_flag, n_flag;
  std::optional<std::string> link_flag;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed_flag, "random seed");
  app.add_option("--out", out_flag, "output directory");
  app.add_option("--s-set", s_set_flag, "window counts, e.g. --s-set 24 48")->delimiter(',');
  app.add_option("--n-max", n_max_flag, "largest reconstruction order");
  app.add_option("--threshold", threshold_flag, "classification score cutoff");
  app.add_option("--repeats", repeats_flag, "shuffle-split repeats");
  app.add_option("--s", s_flag, "window count for predict/classify");
  app.add_option("--n", n_flag, "reconstruction order for predict/classify");
  app.add_option("--events", cfg.events_path, "event log path");
  app.add_option("--cohort", cfg.cohort_path, "cohort CSV path");
  app.add_option("--room-map", cfg.room_map_path, "sensor-to-room map JSON");
  app.add_option("--link", link_flag, "score link preset: default|strong");
  app.add_flag("--vectors", cfg.write_vectors, "also dump eigenvector sidecars");
  app.add_flag("--svg", cfg.write_svg, "also render static SVG charts");

  auto* cmd_simulate = app.add_subcommand("simulate", "generate a synthetic corpus");
  auto* cmd_ingest = app.add_subcommand("ingest", "event log -> day timelines");
  auto* cmd_matrix = app.add_subcommand("matrix", "timelines -> behaviour matrices");
  auto* cmd_eigen = app.add_subcommand("eigen", "matrices -> eigenmodels + error series");
  auto* cmd_predict = app.add_subcommand("predict", "leave-one-out score regression");
  auto* cmd_classify = app.add_subcommand("classify", "SVM classification at the cutoff");
  auto* cmd_gridsearch = app.add_subcommand("gridsearch", "search over (S, n)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (!config_path.empty()) load_config_file(cfg, config_path);
    if (seed_flag) cfg.seed = *seed_flag;
    if (out_flag) cfg.out_dir = *out_flag;
    if (s_set_flag) cfg.window_counts = *s_set_flag;
    if (n_max_flag) cfg.n_max = *n_max_flag;
    if (threshold_flag) cfg.threshold = *threshold_flag;
    if (repeats_flag) cfg.repeats = *repeats_flag;
    if (s_flag) cfg.predict_windows = *s_flag;
    if (n_flag) cfg.predict_n = *n_flag;
    if (link_flag) apply_link_preset(cfg.simulate.link, *link_flag);
    validate_config(cfg);

    if (cmd_simulate->parsed()) run_simulate(cfg);
    if (cmd_ingest->parsed()) run_ingest(cfg);
    if (cmd_matrix->parsed()) run_matrix(cfg, load_timelines(cfg));
    if (cmd_eigen->parsed()) run_eigen(cfg);
    if (cmd_predict->parsed()) run_predict(cfg);
    if (cmd_classify->parsed()) run_classify(cfg);
    if (cmd_gridsearch->parsed()) run_gridsearch(cfg);
  } catch (const eb::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const eb::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
