#include "eb/eigenmodel.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace eb::eigenmodel {

namespace {

// Gram matrices are PSD; anything below this is a real numerical failure.
constexpr double kNegativeEigenvalueTol = 1e-9;

// Make the entry of largest magnitude positive, first index winning ties.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (v(best) < 0.0) v = -v;
}

}  // namespace

EigenModel fit(const Eigen::MatrixXd& deviations, Eigen::VectorXd mean_day) {
  const Eigen::Index days = deviations.rows();
  const Eigen::Index dim = deviations.cols();
  if (days < 1 || dim < 1) throw DataError("eigenmodel needs a non-empty deviation matrix");

  EigenModel model;
  model.mean_day = std::move(mean_day);

  const Eigen::MatrixXd gram = deviations * deviations.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw NumericalError("Gram eigendecomposition failed");

  // Eigen returns ascending order; walk it backwards.
  const Eigen::VectorXd& values = solver.eigenvalues();
  if (values(0) < -kNegativeEigenvalueTol) {
    throw NumericalError("Gram matrix is indefinite: eigenvalue " + std::to_string(values(0)));
  }
  const double value_max = std::max(values(days - 1), 0.0);
  const double rank_tol = value_max * 1e-12;

  std::vector<double> kept_values;
  std::vector<Eigen::VectorXd> basis;
  kept_values.reserve(static_cast<std::size_t>(days));
  for (Eigen::Index l = days - 1; l >= 0; --l) {
    const double lambda = values(l);
    if (!(lambda > rank_tol) || lambda <= 0.0) break;
    Eigen::VectorXd v = deviations.transpose() * solver.eigenvectors().col(l);
    // Two Gram-Schmidt passes keep the basis orthonormal to machine
    // precision even when trailing eigenvalues nearly coincide.
    for (int pass = 0; pass < 2; ++pass) {
      for (const Eigen::VectorXd& b : basis) v -= b.dot(v) * b;
    }
    const double norm = v.norm();
    if (norm <= std::sqrt(rank_tol)) continue;  // direction already spanned
    v /= norm;
    fix_sign(v);
    basis.push_back(std::move(v));
    kept_values.push_back(lambda);
  }

  model.rank = static_cast<int>(basis.size());
  model.eigenvalues.resize(model.rank);
  model.eigenvectors.resize(dim, model.rank);
  for (int i = 0; i < model.rank; ++i) {
    model.eigenvalues(i) = kept_values[static_cast<std::size_t>(i)];
    model.eigenvectors.col(i) = basis[static_cast<std::size_t>(i)];
  }
  return model;
}

EigenModel fit(const matrix::BehaviourMatrix& bm) {
  if (bm.presence.rows() < 2) throw DataError("eigenmodel needs at least 2 days");
  return fit(bm.deviations, bm.mean_day);
}

Eigen::MatrixXd reconstruct(const EigenModel& model, const Eigen::MatrixXd& deviations, int n) {
  if (n < 0 || n > model.rank) {
    throw DataError("reconstruction order " + std::to_string(n) + " outside [0, " +
                    std::to_string(model.rank) + "]");
  }
  if (model.rank > 0 && deviations.cols() != model.eigenvectors.rows()) {
    throw DataError("deviation matrix width does not match the model");
  }
  if (n == 0) return Eigen::MatrixXd::Zero(deviations.rows(), deviations.cols());
  const auto basis = model.eigenvectors.leftCols(n);
  return (deviations * basis) * basis.transpose();
}

double reconstruction_error(const EigenModel& model, const Eigen::MatrixXd& deviations, int n) {
  const Eigen::MatrixXd residual = deviations - reconstruct(model, deviations, n);
  return residual.cwiseAbs().sum() / static_cast<double>(deviations.size());
}

ReconstructionErrorSeries error_series(const matrix::BehaviourMatrix& bm, int n_max) {
  if (n_max < 0) throw DataError("n_max must be non-negative");
  const EigenModel model = fit(bm);
  const int top = std::min(n_max, model.rank);

  ReconstructionErrorSeries series;
  series.person_id = bm.person_id;
  series.windows_per_day = bm.windows_per_day;
  series.rank = model.rank;
  series.errors.reserve(static_cast<std::size_t>(top) + 1);

  const double cells = static_cast<double>(bm.deviations.size());
  Eigen::MatrixXd residual = bm.deviations;
  series.errors.push_back(residual.cwiseAbs().sum() / cells);
  if (top > 0) {
    const Eigen::MatrixXd scores = bm.deviations * model.eigenvectors.leftCols(top);
    for (int n = 1; n <= top; ++n) {
      residual.noalias() -= scores.col(n - 1) * model.eigenvectors.col(n - 1).transpose();
      series.errors.push_back(residual.cwiseAbs().sum() / cells);
    }
  }
  return series;
}

}  // namespace eb::eigenmodel
