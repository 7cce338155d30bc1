#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "eb/types.hpp"

namespace eb::models {

// ---------------------------------------------------------------------------
// Cohort table
// ---------------------------------------------------------------------------

struct CohortMember {
  std::string person_id;
  double age = 0.0;  // years
  int score = 0;     // cognition score, 0..30
};

struct FeatureKey {
  int windows_per_day = 0;  // S
  int n_vectors = 0;        // eigenvectors used for the reconstruction
  friend auto operator<=>(const FeatureKey&, const FeatureKey&) = default;
};

struct PersonRecord {
  std::string person_id;
  double age = 0.0;
  int score = 0;
  std::map<FeatureKey, double> features;  // reconstruction errors per (S, n)
  std::set<FeatureKey> saturated;         // n exceeded the person's rank
};

struct CohortTable {
  std::vector<PersonRecord> people;
};

// Throws DataError unless scores are in [0, 30], ages positive and every
// person carries the same feature keys.
void validate(const CohortTable& cohort);

// ---------------------------------------------------------------------------
// Correlation
// ---------------------------------------------------------------------------

struct Correlation {
  double rho = 0.0;
  double p_value = 1.0;
  int n = 0;
};

// First-order partial correlation of x and y controlling for z, with a
// two-sided p-value from the t distribution with n-3 degrees of freedom.
Correlation partial_correlation(std::span<const double> x, std::span<const double> y,
                                std::span<const double> z);

// Spearman rank correlation (average ranks on ties), p-value from the
// t approximation with n-2 degrees of freedom.
Correlation spearman(std::span<const double> x, std::span<const double> y);

// Table-style significance stars: * for p < 0.01, ** for p < 0.005.
std::string significance_stars(double p_value);

// ---------------------------------------------------------------------------
// Linear regression
// ---------------------------------------------------------------------------

struct LinearModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double predict(const Eigen::RowVectorXd& x) const;
};

// Ordinary least squares with intercept via a column-pivoting QR
// factorization. Rank-deficient designs are an error.
LinearModel fit_linear_regression(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets);

struct Prediction {
  std::string person_id;
  double truth = 0.0;
  double predicted = 0.0;
};

struct RegressionReport {
  int windows_per_day = 0;
  int n_vectors = 0;
  bool uses_reconstruction = true;
  double rmsd = 0.0;       // sqrt(mean squared deviation)
  double mse = 0.0;        // the unrooted mean squared deviation
  double r_squared = 0.0;  // on the pooled leave-one-out predictions
  std::vector<Prediction> predictions;
};

// Leave-one-out evaluation of the score regression. Features are the
// reconstruction error at (S, n) plus age, or age alone as the baseline.
RegressionReport loo_rmsd(const CohortTable& cohort, int windows_per_day, int n_vectors,
                          bool use_reconstruction);

// ---------------------------------------------------------------------------
// Linear SVM
// ---------------------------------------------------------------------------

struct LinearSvm {
  Eigen::VectorXd weights;
  double bias = 0.0;
  // All training decision scores coincide (e.g. identical feature rows);
  // scores carry no ranking information.
  bool degenerate = false;

  double decision(const Eigen::RowVectorXd& x) const;
};

// Soft-margin linear SVM (hinge loss, L2 regularization) trained by
// deterministic dual coordinate descent. Labels must be +-1 with both
// classes present. The bias is learned as an augmented, regularized weight.
LinearSvm train_svm(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                    double cost = 1.0, double tolerance = 1e-6);

// ---------------------------------------------------------------------------
// ROC / classification
// ---------------------------------------------------------------------------

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1), monotone in both axes
  double auc = 0.0;              // trapezoidal area
};

// Builds the ROC over decision scores; higher score means more positive.
// Ties move diagonally (equivalent to the 0.5-tie-credit rank statistic).
RocCurve roc_from_scores(std::span<const double> scores, std::span<const int> labels);

// TPR of the piecewise-linear ROC at an FPR value (vertical averaging).
double roc_interpolate(const RocCurve& curve, double fpr);

struct FoldsConfig {
  int repeats = 20;
  std::uint64_t seed = 0;
  double train_fraction = 2.0 / 3.0;
  int max_redraws = 32;
  double cost = 1.0;
};

struct ClassificationReport {
  int windows_per_day = 0;
  int n_vectors = 0;
  int threshold = 26;  // positive class: score < threshold
  std::vector<RocCurve> fold_rocs;
  std::vector<double> fold_aucs;
  double fold_auc_mean = 0.0;
  double fold_auc_std = 0.0;
  std::vector<double> fpr_grid;  // fixed 101-point grid
  std::vector<double> mean_tpr;
  std::vector<double> std_tpr;
  double mean_auc = 0.0;  // trapezoidal area of the mean ROC
};

// Repeated stratified 2/3 - 1/3 shuffle splits; per-fold ROC from SVM
// decision scores on {reconstruction error, age} standardized with
// training-fold statistics; mean ROC by vertical averaging.
ClassificationReport classify_cohort(const CohortTable& cohort, int windows_per_day,
                                     int n_vectors, int threshold = 26,
                                     const FoldsConfig& folds = {});

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct GridCell {
  int windows_per_day = 0;
  int n_vectors = 0;
  double rmsd = 0.0;
  int saturated_people = 0;  // people whose rank was below n
};

struct GridSearchResult {
  int best_windows = 0;
  int best_n = 0;
  double best_rmsd = 0.0;
  std::vector<GridCell> surface;  // ordered by (S, n) ascending
};

// Leave-one-out RMSD over every (S, n) pair; ties break toward the smaller
// S, then the smaller n.
GridSearchResult grid_search(const CohortTable& cohort, std::span<const int> window_counts,
                             std::span<const int> n_values);

// Standardization helper: column means/stds from the training rows only.
// Near-constant columns map to zero instead of dividing by ~0.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
  static Standardizer fit(const Eigen::MatrixXd& train);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

}  // namespace eb::models
