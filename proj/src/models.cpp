#include "eb/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "eb/rng.hpp"

namespace eb::models {

namespace {

constexpr double kDenominatorTol = 1e-12;

void check_vector(std::span<const double> v, const char* name) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) {
    throw DataError(std::string("correlation input '") + name + "' is constant");
  }
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const double denom = std::sqrt(sxx * syy);
  if (denom < kDenominatorTol) throw NumericalError("correlation denominator underflow");
  return sxy / denom;
}

double two_sided_t_pvalue(double t, double dof) {
  const boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double t_pvalue_for_rho(double rho, int n, int lost_dof) {
  const double dof = n - lost_dof;
  const double r = std::clamp(rho, -1.0, 1.0);
  const double one_minus = 1.0 - r * r;
  if (one_minus <= 0.0) return 0.0;
  const double t = r * std::sqrt(dof / one_minus);
  return two_sided_t_pvalue(t, dof);
}

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

void validate(const CohortTable& cohort) {
  for (const PersonRecord& p : cohort.people) {
    if (p.score < 0 || p.score > 30) {
      throw DataError("score out of [0, 30] for " + p.person_id);
    }
    if (!(p.age > 0.0)) throw DataError("non-positive age for " + p.person_id);
    if (p.features.size() != cohort.people.front().features.size()) {
      throw DataError("feature keys differ across the cohort");
    }
    for (const auto& [key, value] : cohort.people.front().features) {
      (void)value;
      if (!p.features.contains(key)) throw DataError("feature keys differ across the cohort");
    }
  }
}

Correlation partial_correlation(std::span<const double> x, std::span<const double> y,
                                std::span<const double> z) {
  const std::size_t n = x.size();
  if (n != y.size() || n != z.size()) throw DataError("partial correlation: length mismatch");
  if (n < 4) throw DataError("partial correlation needs at least 4 samples");
  check_vector(x, "x");
  check_vector(y, "y");
  check_vector(z, "z");

  const double rxy = pearson(x, y);
  const double rxz = pearson(x, z);
  const double ryz = pearson(y, z);
  const double denom_sq = (1.0 - rxz * rxz) * (1.0 - ryz * ryz);
  if (denom_sq < kDenominatorTol * kDenominatorTol) {
    throw NumericalError("partial correlation: confounder explains a variable");
  }
  Correlation out;
  out.n = static_cast<int>(n);
  out.rho = (rxy - rxz * ryz) / std::sqrt(denom_sq);
  out.p_value = t_pvalue_for_rho(out.rho, out.n, 3);
  return out;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("spearman: length mismatch");
  if (x.size() < 3) throw DataError("spearman needs at least 3 samples");
  check_vector(x, "x");
  check_vector(y, "y");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  Correlation out;
  out.n = static_cast<int>(x.size());
  out.rho = pearson(rx, ry);
  out.p_value = t_pvalue_for_rho(out.rho, out.n, 2);
  return out;
}

std::string significance_stars(double p_value) {
  if (p_value < 0.005) return "**";
  if (p_value < 0.01) return "*";
  return "";
}

double LinearModel::predict(const Eigen::RowVectorXd& x) const {
  return x * coefficients + intercept;
}

LinearModel fit_linear_regression(const Eigen::MatrixXd& features,
                                  const Eigen::VectorXd& targets) {
  const Eigen::Index rows = features.rows();
  const Eigen::Index cols = features.cols();
  if (rows != targets.size()) throw DataError("regression: row count mismatch");
  if (rows < cols + 1) throw DataError("regression: too few rows for the feature count");

  Eigen::MatrixXd design(rows, cols + 1);
  design.col(0).setOnes();
  design.rightCols(cols) = features;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols + 1) throw DataError("regression: rank-deficient design matrix");
  const Eigen::VectorXd beta = qr.solve(targets);

  LinearModel model;
  model.intercept = beta(0);
  model.coefficients = beta.tail(cols);
  return model;
}

namespace {

double feature_at(const PersonRecord& p, const FeatureKey& key) {
  auto it = p.features.find(key);
  if (it == p.features.end()) {
    throw DataError("missing feature (S=" + std::to_string(key.windows_per_day) +
                    ", n=" + std::to_string(key.n_vectors) + ") for " + p.person_id);
  }
  return it->second;
}

}  // namespace

RegressionReport loo_rmsd(const CohortTable& cohort, int windows_per_day, int n_vectors,
                          bool use_reconstruction) {
  const std::size_t n = cohort.people.size();
  if (n < 3) throw DataError("leave-one-out needs a cohort of at least 3 people");
  validate(cohort);

  const FeatureKey key{windows_per_day, n_vectors};
  const Eigen::Index cols = use_reconstruction ? 2 : 1;
  Eigen::MatrixXd features(static_cast<Eigen::Index>(n), cols);
  Eigen::VectorXd targets(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const PersonRecord& p = cohort.people[i];
    if (use_reconstruction) {
      features(static_cast<Eigen::Index>(i), 0) = feature_at(p, key);
      features(static_cast<Eigen::Index>(i), 1) = p.age;
    } else {
      features(static_cast<Eigen::Index>(i), 0) = p.age;
    }
    targets(static_cast<Eigen::Index>(i)) = p.score;
  }

  RegressionReport report;
  report.windows_per_day = windows_per_day;
  report.n_vectors = n_vectors;
  report.uses_reconstruction = use_reconstruction;
  report.predictions.reserve(n);

  Eigen::MatrixXd train_x(static_cast<Eigen::Index>(n) - 1, cols);
  Eigen::VectorXd train_y(static_cast<Eigen::Index>(n) - 1);
  double sq_sum = 0.0;
  for (std::size_t hold = 0; hold < n; ++hold) {
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == hold) continue;
      train_x.row(r) = features.row(static_cast<Eigen::Index>(i));
      train_y(r) = targets(static_cast<Eigen::Index>(i));
      ++r;
    }
    const LinearModel fold = fit_linear_regression(train_x, train_y);
    const double predicted = fold.predict(features.row(static_cast<Eigen::Index>(hold)));
    const double truth = targets(static_cast<Eigen::Index>(hold));
    sq_sum += (truth - predicted) * (truth - predicted);
    report.predictions.push_back({cohort.people[hold].person_id, truth, predicted});
  }

  report.mse = sq_sum / static_cast<double>(n);
  report.rmsd = std::sqrt(report.mse);
  const double mean_y = targets.mean();
  const double ss_tot = (targets.array() - mean_y).square().sum();
  report.r_squared = ss_tot > 0.0 ? 1.0 - sq_sum / ss_tot : 0.0;
  return report;
}

double LinearSvm::decision(const Eigen::RowVectorXd& x) const {
  return x * weights + bias;
}

LinearSvm train_svm(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels, double cost,
                    double tolerance) {
  const Eigen::Index n = features.rows();
  if (n != labels.size()) throw DataError("svm: label count mismatch");
  if (n < 2) throw DataError("svm: needs at least 2 samples");
  int pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels(i) == 1) ++pos;
    else if (labels(i) == -1) ++neg;
    else throw DataError("svm: labels must be +-1");
  }
  if (pos == 0 || neg == 0) throw DataError("svm: training set contains a single class");

  // Dual coordinate descent on the bias-augmented problem; the fixed
  // visiting order keeps the solver deterministic.
  const Eigen::Index dim = features.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim + 1);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    diag(i) = features.row(i).squaredNorm() + 1.0;
  }

  const int max_epochs = 100000;
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = labels(i);
      const double margin = y * (features.row(i).dot(w.head(dim)) + w(dim)) - 1.0;
      double pg = margin;
      if (alpha(i) <= 0.0) pg = std::min(margin, 0.0);
      else if (alpha(i) >= cost) pg = std::max(margin, 0.0);
      worst = std::max(worst, std::abs(pg));
      if (pg == 0.0) continue;
      const double old = alpha(i);
      alpha(i) = std::clamp(old - margin / diag(i), 0.0, cost);
      const double delta = (alpha(i) - old) * y;
      if (delta != 0.0) {
        w.head(dim) += delta * features.row(i).transpose();
        w(dim) += delta;
      }
    }
    if (worst < tolerance) break;
  }

  LinearSvm svm;
  svm.weights = w.head(dim);
  svm.bias = w(dim);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = svm.decision(features.row(i));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  svm.degenerate = (hi - lo) < 1e-12;
  return svm;
}

RocCurve roc_from_scores(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = scores.size();
  if (n != labels.size()) throw DataError("roc: length mismatch");
  std::size_t pos = 0, neg = 0;
  for (int l : labels) {
    if (l == 1) ++pos;
    else if (l == -1) ++neg;
    else throw DataError("roc: labels must be +-1");
  }
  if (pos == 0 || neg == 0) throw DataError("roc: needs both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t d_tp = 0, d_fp = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) ++d_tp;
      else ++d_fp;
      ++j;
    }
    const double prev_tpr = static_cast<double>(tp) / static_cast<double>(pos);
    const double prev_fpr = static_cast<double>(fp) / static_cast<double>(neg);
    tp += d_tp;
    fp += d_fp;
    const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    area += (fpr - prev_fpr) * 0.5 * (tpr + prev_tpr);
    curve.points.push_back({fpr, tpr});
    i = j;
  }
  curve.auc = area;
  return curve;
}

double roc_interpolate(const RocCurve& curve, double fpr) {
  // Collapse vertical runs to their top point, then interpolate linearly:
  // the TPR achievable on the curve at the given FPR budget.
  const auto& pts = curve.points;
  if (pts.empty()) throw DataError("roc: empty curve");
  std::vector<RocPoint> envelope;
  envelope.reserve(pts.size());
  for (const RocPoint& p : pts) {
    if (!envelope.empty() && envelope.back().fpr == p.fpr) {
      envelope.back().tpr = std::max(envelope.back().tpr, p.tpr);
    } else {
      envelope.push_back(p);
    }
  }
  if (fpr <= envelope.front().fpr) return envelope.front().tpr;
  for (std::size_t i = 1; i < envelope.size(); ++i) {
    if (fpr <= envelope[i].fpr) {
      const double t = (fpr - envelope[i - 1].fpr) / (envelope[i].fpr - envelope[i - 1].fpr);
      return envelope[i - 1].tpr + t * (envelope[i].tpr - envelope[i - 1].tpr);
    }
  }
  return envelope.back().tpr;
}

namespace {

struct FoldIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

FoldIndices stratified_split(const std::vector<std::size_t>& positives,
                             const std::vector<std::size_t>& negatives, double train_fraction,
                             Rng& rng) {
  FoldIndices fold;
  for (const auto* group : {&positives, &negatives}) {
    std::vector<std::size_t> ids = *group;
    rng.shuffle(ids);
    const std::size_t total = ids.size();
    std::size_t take = static_cast<std::size_t>(std::lround(train_fraction * total));
    take = std::clamp<std::size_t>(take, 1, total - 1);
    fold.train.insert(fold.train.end(), ids.begin(), ids.begin() + take);
    fold.validation.insert(fold.validation.end(), ids.begin() + take, ids.end());
  }
  std::sort(fold.train.begin(), fold.train.end());
  std::sort(fold.validation.begin(), fold.validation.end());
  return fold;
}

}  // namespace

Standardizer Standardizer::fit(const Eigen::MatrixXd& train) {
  Standardizer s;
  s.mean = train.colwise().mean();
  Eigen::RowVectorXd var =
      (train.rowwise() - s.mean).array().square().colwise().sum() / train.rows();
  s.scale = var.array().sqrt();
  for (Eigen::Index c = 0; c < s.scale.size(); ++c) {
    if (s.scale(c) < 1e-12) s.scale(c) = 1.0;  // constant column -> zeros
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean).array().rowwise() / scale.array();
}

ClassificationReport classify_cohort(const CohortTable& cohort, int windows_per_day,
                                     int n_vectors, int threshold, const FoldsConfig& folds) {
  validate(cohort);
  const std::size_t n = cohort.people.size();
  const FeatureKey key{windows_per_day, n_vectors};

  std::vector<std::size_t> positives, negatives;
  Eigen::MatrixXd features(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXi labels(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const PersonRecord& p = cohort.people[i];
    features(static_cast<Eigen::Index>(i), 0) = feature_at(p, key);
    features(static_cast<Eigen::Index>(i), 1) = p.age;
    const bool positive = p.score < threshold;
    labels(static_cast<Eigen::Index>(i)) = positive ? 1 : -1;
    (positive ? positives : negatives).push_back(i);
  }
  if (positives.size() < 3 || negatives.size() < 3) {
    throw DataError("classification needs at least 3 people on each side of the cutoff");
  }

  ClassificationReport report;
  report.windows_per_day = windows_per_day;
  report.n_vectors = n_vectors;
  report.threshold = threshold;
  report.fpr_grid.resize(101);
  for (int i = 0; i <= 100; ++i) report.fpr_grid[static_cast<std::size_t>(i)] = i / 100.0;

  std::vector<std::vector<double>> grid_tpr;
  for (int repeat = 0; repeat < folds.repeats; ++repeat) {
    FoldIndices fold;
    bool usable = false;
    for (int attempt = 0; attempt <= folds.max_redraws; ++attempt) {
      Rng rng(Rng::mix(folds.seed, static_cast<std::uint64_t>(repeat) * 1000 +
                                       static_cast<std::uint64_t>(attempt)));
      fold = stratified_split(positives, negatives, folds.train_fraction, rng);
      auto single_class = [&](const std::vector<std::size_t>& ids) {
        int p = 0, m = 0;
        for (std::size_t i : ids) (labels(static_cast<Eigen::Index>(i)) == 1 ? p : m)++;
        return p == 0 || m == 0;
      };
      if (!single_class(fold.train) && !single_class(fold.validation)) {
        usable = true;
        break;
      }
    }
    if (!usable) throw DataError("classification: could not draw a two-class fold");

    Eigen::MatrixXd train_x(static_cast<Eigen::Index>(fold.train.size()), 2);
    Eigen::VectorXi train_y(static_cast<Eigen::Index>(fold.train.size()));
    for (std::size_t r = 0; r < fold.train.size(); ++r) {
      train_x.row(static_cast<Eigen::Index>(r)) =
          features.row(static_cast<Eigen::Index>(fold.train[r]));
      train_y(static_cast<Eigen::Index>(r)) = labels(static_cast<Eigen::Index>(fold.train[r]));
    }
    const Standardizer standardizer = Standardizer::fit(train_x);
    const LinearSvm svm = train_svm(standardizer.apply(train_x), train_y, folds.cost);

    std::vector<double> scores;
    std::vector<int> truth;
    scores.reserve(fold.validation.size());
    for (std::size_t i : fold.validation) {
      const Eigen::MatrixXd row =
          standardizer.apply(features.row(static_cast<Eigen::Index>(i)));
      scores.push_back(svm.decision(row.row(0)));
      truth.push_back(labels(static_cast<Eigen::Index>(i)));
    }
    RocCurve curve = roc_from_scores(scores, truth);
    report.fold_aucs.push_back(curve.auc);
    std::vector<double> tpr(report.fpr_grid.size());
    for (std::size_t g = 0; g < report.fpr_grid.size(); ++g) {
      tpr[g] = roc_interpolate(curve, report.fpr_grid[g]);
    }
    grid_tpr.push_back(std::move(tpr));
    report.fold_rocs.push_back(std::move(curve));
  }

  const double reps = static_cast<double>(folds.repeats);
  report.mean_tpr.assign(report.fpr_grid.size(), 0.0);
  report.std_tpr.assign(report.fpr_grid.size(), 0.0);
  for (std::size_t g = 0; g < report.fpr_grid.size(); ++g) {
    double m = 0.0;
    for (const auto& tpr : grid_tpr) m += tpr[g];
    m /= reps;
    double var = 0.0;
    for (const auto& tpr : grid_tpr) var += (tpr[g] - m) * (tpr[g] - m);
    report.mean_tpr[g] = m;
    report.std_tpr[g] = std::sqrt(var / reps);
  }

  double auc = 0.0;
  for (std::size_t g = 1; g < report.fpr_grid.size(); ++g) {
    auc += (report.fpr_grid[g] - report.fpr_grid[g - 1]) * 0.5 *
           (report.mean_tpr[g] + report.mean_tpr[g - 1]);
  }
  report.mean_auc = auc;

  double m = 0.0;
  for (double a : report.fold_aucs) m += a;
  m /= reps;
  double var = 0.0;
  for (double a : report.fold_aucs) var += (a - m) * (a - m);
  report.fold_auc_mean = m;
  report.fold_auc_std = std::sqrt(var / reps);
  return report;
}

GridSearchResult grid_search(const CohortTable& cohort, std::span<const int> window_counts,
                             std::span<const int> n_values) {
  if (window_counts.empty() || n_values.empty()) throw DataError("grid search: empty grid");
  validate(cohort);

  std::vector<int> windows(window_counts.begin(), window_counts.end());
  std::vector<int> orders(n_values.begin(), n_values.end());
  std::sort(windows.begin(), windows.end());
  std::sort(orders.begin(), orders.end());

  GridSearchResult result;
  result.best_rmsd = std::numeric_limits<double>::infinity();
  for (int S : windows) {
    for (int n : orders) {
      const RegressionReport report = loo_rmsd(cohort, S, n, true);
      GridCell cell;
      cell.windows_per_day = S;
      cell.n_vectors = n;
      cell.rmsd = report.rmsd;
      const FeatureKey key{S, n};
      for (const PersonRecord& p : cohort.people) {
        if (p.saturated.contains(key)) ++cell.saturated_people;
      }
      if (cell.rmsd < result.best_rmsd) {
        result.best_rmsd = cell.rmsd;
        result.best_windows = S;
        result.best_n = n;
      }
      result.surface.push_back(cell);
    }
  }
  return result;
}

}  // namespace eb::models
