#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eb/models.hpp"
#include "eb/rng.hpp"
#include "oracles.hpp"

using namespace eb;
using namespace eb::models;

namespace {

CohortTable synthetic_cohort(int size, std::uint64_t seed, int s = 24, int n_max = 10,
                             double signal = 1.0) {
  // Feature = monotone function of score plus noise; enough structure for
  // regression tests without the full pipeline.
  Rng rng(seed);
  CohortTable cohort;
  for (int i = 0; i < size; ++i) {
    PersonRecord p;
    p.person_id = "p" + std::to_string(i);
    p.age = rng.uniform(65.0, 98.0);
    p.score = static_cast<int>(std::clamp(std::round(rng.normal(24.0, 4.0)), 0.0, 30.0));
    for (int n = 1; n <= n_max; ++n) {
      const double base = (30.0 - p.score) * 0.003 * signal;
      p.features[{s, n}] = base / n + rng.normal(0.0, 0.0008);
    }
    cohort.people.push_back(std::move(p));
  }
  return cohort;
}

}  // namespace

TEST_CASE("partial correlation of a variable with itself is 1") {
  Rng rng(1);
  std::vector<double> x, z;
  for (int i = 0; i < 50; ++i) {
    x.push_back(rng.normal());
    z.push_back(rng.normal());
  }
  const Correlation c = partial_correlation(x, x, z);
  CHECK(c.rho == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c.p_value < 1e-12);
}

TEST_CASE("independent normals have near-zero partial correlation") {
  Rng rng(2);
  std::vector<double> x, y, z;
  for (int i = 0; i < 1000; ++i) {
    x.push_back(rng.normal());
    y.push_back(rng.normal());
    z.push_back(rng.normal());
  }
  const Correlation c = partial_correlation(x, y, z);
  CHECK(std::abs(c.rho) < 0.1);
  CHECK(c.n == 1000);
}

TEST_CASE("partial correlation matches the residual-regression oracle") {
  // A fixed 10-point dataset first, then random triples.
  std::vector<double> x{3.1, 4.7, 5.2, 6.8, 7.1, 8.3, 9.0, 10.2, 11.5, 12.1};
  std::vector<double> y{1.2, 2.9, 2.1, 4.4, 3.9, 5.8, 5.2, 7.1, 6.9, 8.4};
  std::vector<double> z{0.4, 1.1, 0.9, 2.2, 1.8, 2.9, 2.4, 3.6, 3.1, 4.2};
  const double oracle = oracles::partial_correlation_by_residuals(x, y, z);
  const Correlation c = partial_correlation(x, y, z);
  CHECK(std::abs(c.rho - oracle) <= 1e-12);

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a, b, w;
    const int n = 5 + static_cast<int>(rng.below(40));
    for (int i = 0; i < n; ++i) {
      const double common = rng.normal();
      a.push_back(common + rng.normal());
      b.push_back(0.5 * common + rng.normal());
      w.push_back(common * 0.7 + rng.normal());
    }
    const double expected = oracles::partial_correlation_by_residuals(a, b, w);
    const Correlation got = partial_correlation(a, b, w);
    REQUIRE(std::abs(got.rho - expected) <= 1e-12);
  }
}

TEST_CASE("partial correlation is symmetric in x and y") {
  Rng rng(4);
  std::vector<double> x, y, z;
  for (int i = 0; i < 30; ++i) {
    x.push_back(rng.normal());
    y.push_back(rng.normal() + 0.3 * x.back());
    z.push_back(rng.normal());
  }
  CHECK(partial_correlation(x, y, z).rho == partial_correlation(y, x, z).rho);
}

TEST_CASE("partial correlation input contracts") {
  std::vector<double> ok{1, 2, 3, 4, 5};
  std::vector<double> constant{2, 2, 2, 2, 2};
  std::vector<double> shorter{1, 2, 3};
  CHECK_THROWS_AS(partial_correlation(ok, ok, constant), DataError);
  CHECK_THROWS_AS(partial_correlation(shorter, shorter, shorter), DataError);
  std::vector<double> three{1, 2, 3};
  CHECK_THROWS_AS(partial_correlation(three, three, three), DataError);
  // z == x makes the denominator vanish.
  CHECK_THROWS_AS(partial_correlation(ok, ok, ok), NumericalError);
}

TEST_CASE("spearman is rank-based") {
  std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> y{2, 4, 9, 16, 50, 90};  // monotone, nonlinear
  const Correlation c = spearman(x, y);
  CHECK(c.rho == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> inv{6, 5, 4, 3, 2, 1};
  CHECK(spearman(x, inv).rho == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("significance stars replicate the table thresholds") {
  CHECK(significance_stars(0.2) == "");
  CHECK(significance_stars(0.009) == "*");
  CHECK(significance_stars(0.004) == "**");
}

TEST_CASE("regression reproduces an exact linear relation") {
  Rng rng(5);
  Eigen::MatrixXd x(20, 2);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    y(i) = 3.0 - 2.0 * x(i, 0) + 0.5 * x(i, 1);
  }
  const LinearModel m = fit_linear_regression(x, y);
  CHECK(m.intercept == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(m.coefficients(0) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(m.coefficients(1) == doctest::Approx(0.5).epsilon(1e-9));
  for (int i = 0; i < 20; ++i) {
    CHECK(std::abs(m.predict(x.row(i)) - y(i)) < 1e-9);
  }
}

TEST_CASE("a single feature and two points give the line through both") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 3.0;
  Eigen::VectorXd y(2);
  y << 10.0, 16.0;
  const LinearModel m = fit_linear_regression(x, y);
  CHECK(m.coefficients(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(m.intercept == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("regression matches the pseudo-inverse oracle") {
  Rng rng(6);
  Eigen::MatrixXd x(20, 2);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = rng.uniform(-2.0, 2.0);
    x(i, 1) = rng.uniform(-2.0, 2.0);
    y(i) = rng.normal();
  }
  const Eigen::VectorXd oracle = oracles::pinv_regression(x, y);
  const LinearModel m = fit_linear_regression(x, y);
  CHECK(std::abs(m.intercept - oracle(0)) <= 1e-9);
  CHECK(std::abs(m.coefficients(0) - oracle(1)) <= 1e-9);
  CHECK(std::abs(m.coefficients(1) - oracle(2)) <= 1e-9);
}

TEST_CASE("rank-deficient designs are rejected") {
  Eigen::MatrixXd x(5, 2);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = i;
    x(i, 1) = 2.0 * i;  // duplicate direction
  }
  Eigen::VectorXd y = Eigen::VectorXd::Ones(5);
  CHECK_THROWS_AS(fit_linear_regression(x, y), DataError);

  Eigen::MatrixXd wide(2, 3);
  wide.setRandom();
  CHECK_THROWS_AS(fit_linear_regression(wide, Eigen::VectorXd::Ones(2)), DataError);
}

TEST_CASE("loo rmsd is zero for an exactly linear cohort") {
  // Features on a 1/128 grid so score = 128*feature + 20 is exact in floats.
  CohortTable cohort;
  Rng rng(7);
  for (int i = 0; i < 10; ++i) {
    PersonRecord p;
    p.person_id = "p" + std::to_string(i);
    p.age = 70.0 + i;
    const double feature = static_cast<double>(rng.below(11)) / 128.0;
    p.features[{24, 7}] = feature;
    p.score = static_cast<int>(128.0 * feature) + 20;
    cohort.people.push_back(p);
  }
  const RegressionReport report = loo_rmsd(cohort, 24, 7, true);
  CHECK(report.rmsd < 1e-6);
  CHECK(report.mse < 1e-9);
  CHECK(report.predictions.size() == cohort.people.size());
}

TEST_CASE("constant targets predict the constant") {
  CohortTable cohort;
  Rng rng(8);
  for (int i = 0; i < 8; ++i) {
    PersonRecord p;
    p.person_id = "p" + std::to_string(i);
    p.age = rng.uniform(65.0, 98.0);
    p.score = 22;
    p.features[{24, 7}] = rng.uniform01();
    cohort.people.push_back(p);
  }
  const RegressionReport report = loo_rmsd(cohort, 24, 7, true);
  CHECK(report.rmsd < 1e-9);
  for (const Prediction& p : report.predictions) {
    CHECK(p.predicted == doctest::Approx(22.0).epsilon(1e-9));
  }
}

TEST_CASE("loo rmsd matches the hand-rolled Cramer oracle") {
  const CohortTable cohort = synthetic_cohort(10, 9);
  std::vector<double> error, age, score;
  for (const PersonRecord& p : cohort.people) {
    error.push_back(p.features.at({24, 7}));
    age.push_back(p.age);
    score.push_back(p.score);
  }
  const double oracle = oracles::loo_rmsd_by_cramer(error, age, score);
  const RegressionReport report = loo_rmsd(cohort, 24, 7, true);
  CHECK(std::abs(report.rmsd - oracle) <= 1e-12);
  CHECK(report.rmsd == doctest::Approx(std::sqrt(report.mse)).epsilon(1e-15));
}

TEST_CASE("baseline regression uses age only") {
  const CohortTable cohort = synthetic_cohort(12, 10);
  const RegressionReport baseline = loo_rmsd(cohort, 24, 7, false);
  CHECK(baseline.rmsd >= 0.0);
  CHECK_FALSE(baseline.uses_reconstruction);
  // Identical regardless of which feature key is named.
  const RegressionReport other = loo_rmsd(cohort, 24, 3, false);
  CHECK(baseline.rmsd == other.rmsd);
}

TEST_CASE("loo needs at least 3 people") {
  CohortTable tiny = synthetic_cohort(2, 11);
  CHECK_THROWS_AS(loo_rmsd(tiny, 24, 7, true), DataError);
}

TEST_CASE("svm separates separable blobs") {
  Rng rng(12);
  Eigen::MatrixXd x(30, 2);
  Eigen::VectorXi y(30);
  for (int i = 0; i < 30; ++i) {
    const bool positive = i % 2 == 0;
    x(i, 0) = rng.normal() * 0.3 + (positive ? 3.0 : -3.0);
    x(i, 1) = rng.normal() * 0.3;
    y(i) = positive ? 1 : -1;
  }
  const LinearSvm svm = train_svm(x, y);
  CHECK_FALSE(svm.degenerate);
  for (int i = 0; i < 30; ++i) {
    CHECK(svm.decision(x.row(i)) * y(i) > 0.0);
  }
}

TEST_CASE("identical feature rows are flagged degenerate") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(6, 2);
  Eigen::VectorXi y(6);
  y << 1, -1, 1, -1, 1, -1;
  const LinearSvm svm = train_svm(x, y);
  CHECK(svm.degenerate);
  // Chance-level scores: every point gets the same decision value.
  const double s0 = svm.decision(x.row(0));
  for (int i = 1; i < 6; ++i) CHECK(svm.decision(x.row(i)) == doctest::Approx(s0));
}

TEST_CASE("svm rejects single-class input") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 2);
  Eigen::VectorXi y = Eigen::VectorXi::Ones(5);
  CHECK_THROWS_AS(train_svm(x, y), DataError);
  y(2) = 2;
  CHECK_THROWS_AS(train_svm(x, y), DataError);
}

TEST_CASE("svm decision ordering matches the exhaustive QP oracle") {
  // Fixed 12-point set.
  Rng rng(13);
  Eigen::MatrixXd x(12, 2);
  Eigen::VectorXi y(12);
  for (int i = 0; i < 12; ++i) {
    const bool positive = i < 6;
    x(i, 0) = rng.normal() + (positive ? 1.0 : -1.0);
    x(i, 1) = rng.normal() - (positive ? 0.5 : -0.5);
    y(i) = positive ? 1 : -1;
  }
  const oracles::QpOracle oracle(x, y, 1.0);
  REQUIRE(oracle.solved);
  const LinearSvm svm = train_svm(x, y, 1.0, 1e-10);

  std::vector<int> order_svm(12);
  std::iota(order_svm.begin(), order_svm.end(), 0);
  std::vector<int> order_oracle(order_svm);
  std::sort(order_svm.begin(), order_svm.end(),
            [&](int a, int b) { return svm.decision(x.row(a)) < svm.decision(x.row(b)); });
  std::sort(order_oracle.begin(), order_oracle.end(),
            [&](int a, int b) { return oracle.decision(x.row(a)) < oracle.decision(x.row(b)); });
  CHECK(order_svm == order_oracle);
  // The solutions themselves agree too.
  CHECK(std::abs(svm.weights(0) - oracle.weights(0)) < 1e-4);
  CHECK(std::abs(svm.weights(1) - oracle.weights(1)) < 1e-4);
  CHECK(std::abs(svm.bias - oracle.weights(2)) < 1e-4);
}

TEST_CASE("roc reaches auc 1 for perfectly separated scores") {
  std::vector<double> scores{0.9, 0.8, 0.7, 0.2, 0.1, 0.05};
  std::vector<int> labels{1, 1, 1, -1, -1, -1};
  const RocCurve curve = roc_from_scores(scores, labels);
  CHECK(curve.auc == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(curve.points.front().fpr == 0.0);
  CHECK(curve.points.back().tpr == 1.0);
}

TEST_CASE("roc is invariant to strictly monotone score transforms") {
  Rng rng(14);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    scores.push_back(std::round(rng.normal() * 4.0) / 4.0);  // force ties
    labels.push_back(rng.uniform01() < 0.4 ? 1 : -1);
  }
  const RocCurve base = roc_from_scores(scores, labels);
  std::vector<double> warped;
  for (double s : scores) warped.push_back(std::atan(2.0 * s + 1.0));
  const RocCurve same = roc_from_scores(warped, labels);
  REQUIRE(base.points.size() == same.points.size());
  CHECK(base.auc == same.auc);
  for (std::size_t i = 0; i < base.points.size(); ++i) {
    CHECK(base.points[i].fpr == same.points[i].fpr);
    CHECK(base.points[i].tpr == same.points[i].tpr);
  }
}

TEST_CASE("roc auc equals the Mann-Whitney statistic") {
  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores;
    std::vector<int> labels;
    const int n = 8 + static_cast<int>(rng.below(30));
    int pos = 0;
    for (int i = 0; i < n; ++i) {
      scores.push_back(std::round(rng.normal() * 3.0) / 3.0);
      const bool positive = rng.uniform01() < 0.5;
      labels.push_back(positive ? 1 : -1);
      pos += positive;
    }
    if (pos == 0 || pos == n) continue;
    const RocCurve curve = roc_from_scores(scores, labels);
    const double oracle = oracles::auc_by_rank_statistic(scores, labels);
    REQUIRE(std::abs(curve.auc - oracle) <= 1e-9);
  }
}

TEST_CASE("standardizer uses training statistics only") {
  Eigen::MatrixXd train(4, 2);
  train << 1, 10, 3, 10, 5, 10, 7, 10;
  const Standardizer s = Standardizer::fit(train);
  CHECK(s.mean(0) == doctest::Approx(4.0));
  CHECK(s.mean(1) == doctest::Approx(10.0));
  Eigen::MatrixXd other(1, 2);
  other << 4, 99;
  const Eigen::MatrixXd mapped = s.apply(other);
  CHECK(mapped(0, 0) == doctest::Approx(0.0));
  // Constant training column maps through scale 1, not a blow-up.
  CHECK(mapped(0, 1) == doctest::Approx(89.0));
}

TEST_CASE("a perfectly separating feature reaches mean AUC 1") {
  CohortTable cohort;
  Rng rng(26);
  for (int i = 0; i < 24; ++i) {
    PersonRecord p;
    p.person_id = "p" + std::to_string(i);
    p.age = rng.uniform(65.0, 98.0);
    p.score = i < 10 ? 18 + static_cast<int>(rng.below(6)) : 27 + static_cast<int>(rng.below(4));
    // Widely disjoint feature ranges across the cutoff.
    p.features[{24, 7}] = p.score < 26 ? rng.uniform(0.05, 0.06) : rng.uniform(0.001, 0.01);
    cohort.people.push_back(std::move(p));
  }
  FoldsConfig folds;
  folds.repeats = 12;
  folds.seed = 31;
  const ClassificationReport report = classify_cohort(cohort, 24, 7, 26, folds);
  CHECK(report.mean_auc == doctest::Approx(1.0).epsilon(1e-12));
  for (double a : report.fold_aucs) CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("classification separates a clean cohort and shuffles to chance") {
  CohortTable cohort;
  Rng rng(16);
  for (int i = 0; i < 36; ++i) {
    PersonRecord p;
    p.person_id = "p" + std::to_string(i);
    p.age = rng.uniform(65.0, 98.0);
    p.score = i < 14 ? 20 + static_cast<int>(rng.below(5)) : 27 + static_cast<int>(rng.below(4));
    p.features[{24, 7}] = (30.0 - p.score) * 0.002 + rng.normal(0.0, 0.0004);
    cohort.people.push_back(p);
  }
  FoldsConfig folds;
  folds.repeats = 10;
  folds.seed = 99;
  const ClassificationReport clean = classify_cohort(cohort, 24, 7, 26, folds);
  CHECK(clean.mean_auc > 0.9);
  CHECK(clean.fold_aucs.size() == 10);
  CHECK(clean.fpr_grid.size() == 101);

  // Shuffling labels against features should land near chance.
  CohortTable shuffled = cohort;
  std::vector<int> scores;
  for (const auto& p : shuffled.people) scores.push_back(p.score);
  Rng shuffle_rng(17);
  shuffle_rng.shuffle(scores);
  for (std::size_t i = 0; i < shuffled.people.size(); ++i) shuffled.people[i].score = scores[i];
  FoldsConfig more;
  more.repeats = 40;
  more.seed = 5;
  const ClassificationReport chance = classify_cohort(shuffled, 24, 7, 26, more);
  CHECK(chance.mean_auc > 0.3);
  CHECK(chance.mean_auc < 0.7);
}

TEST_CASE("classification is reproducible given the seed") {
  const CohortTable cohort = synthetic_cohort(30, 18);
  FoldsConfig folds;
  folds.repeats = 5;
  folds.seed = 123;
  const ClassificationReport a = classify_cohort(cohort, 24, 7, 26, folds);
  const ClassificationReport b = classify_cohort(cohort, 24, 7, 26, folds);
  REQUIRE(a.fold_aucs.size() == b.fold_aucs.size());
  for (std::size_t i = 0; i < a.fold_aucs.size(); ++i) {
    CHECK(a.fold_aucs[i] == b.fold_aucs[i]);
  }
  CHECK(a.mean_auc == b.mean_auc);
}

TEST_CASE("classification respects the stratified split sizes") {
  const CohortTable cohort = synthetic_cohort(48, 19);
  int below = 0;
  for (const auto& p : cohort.people) below += p.score < 26;
  REQUIRE(below >= 3);
  REQUIRE(static_cast<int>(cohort.people.size()) - below >= 3);
  FoldsConfig folds;
  folds.repeats = 3;
  folds.seed = 7;
  const ClassificationReport report = classify_cohort(cohort, 24, 7, 26, folds);
  for (const RocCurve& curve : report.fold_rocs) {
    CHECK(curve.points.size() >= 3);
  }
}

TEST_CASE("classification needs both classes populated") {
  CohortTable cohort = synthetic_cohort(20, 20);
  for (auto& p : cohort.people) p.score = 28;  // one side only
  CHECK_THROWS_AS(classify_cohort(cohort, 24, 7, 26, FoldsConfig{}), DataError);
}

TEST_CASE("grid search returns the argmin and breaks ties toward smaller S then n") {
  // Hand-built features with a known optimum at (24, 7).
  CohortTable cohort;
  Rng rng(21);
  const std::vector<int> windows{24, 48};
  const std::vector<int> orders{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  for (int i = 0; i < 16; ++i) {
    PersonRecord p;
    p.person_id = "p" + std::to_string(i);
    p.age = rng.uniform(65.0, 98.0);
    p.score = static_cast<int>(5 + rng.below(25));
    for (int s : windows) {
      for (int n : orders) {
        double noise = rng.normal(0.0, 1.0) * 0.01;
        if (s == 24 && n == 7) noise = 0.0;  // perfect signal only here
        p.features[{s, n}] = (30.0 - p.score) * 0.01 + noise;
      }
    }
    cohort.people.push_back(p);
  }
  const GridSearchResult result = grid_search(cohort, windows, orders);
  CHECK(result.best_windows == 24);
  CHECK(result.best_n == 7);
  CHECK(result.surface.size() == windows.size() * orders.size());

  // Exact tie: (24, 3) and (48, 3) share features; smaller S wins.
  CohortTable tie;
  Rng tie_rng(22);
  for (int i = 0; i < 12; ++i) {
    PersonRecord p;
    p.person_id = "p" + std::to_string(i);
    p.age = tie_rng.uniform(65.0, 98.0);
    p.score = 10 + i;
    const double f = (30.0 - p.score) * 0.01 + tie_rng.normal(0.0, 0.002);
    p.features[{24, 3}] = f;
    p.features[{48, 3}] = f;
    tie.people.push_back(p);
  }
  const std::vector<int> tie_windows{48, 24};  // unsorted on purpose
  const std::vector<int> tie_orders{3};
  const GridSearchResult tied = grid_search(tie, tie_windows, tie_orders);
  CHECK(tied.best_windows == 24);
  CHECK(tied.best_n == 3);
}

TEST_CASE("grid search counts saturated people") {
  CohortTable cohort = synthetic_cohort(8, 22, 24, 3);
  for (auto& p : cohort.people) p.saturated.insert({24, 3});
  const std::vector<int> windows{24};
  const std::vector<int> orders{1, 2, 3};
  const GridSearchResult result = grid_search(cohort, windows, orders);
  CHECK(result.surface.back().saturated_people == 8);
  CHECK(result.surface.front().saturated_people == 0);
}

TEST_CASE("cohort validation rejects bad rows") {
  CohortTable cohort = synthetic_cohort(5, 23);
  cohort.people[2].score = 42;
  CHECK_THROWS_AS(validate(cohort), DataError);
  cohort = synthetic_cohort(5, 24);
  cohort.people[1].age = -3;
  CHECK_THROWS_AS(validate(cohort), DataError);
  cohort = synthetic_cohort(5, 25);
  cohort.people[0].features.erase(cohort.people[0].features.begin()->first);
  CHECK_THROWS_AS(validate(cohort), DataError);
}
