#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "eb/matrix.hpp"

namespace eb::eigenmodel {

// Principal directions of a person's day-to-day deviations, ordered by
// decreasing eigenvalue. Eigenvalues are those of the deviation scatter
// matrix (equivalently the squared singular values of the deviation matrix).
struct EigenModel {
  Eigen::VectorXd eigenvalues;   // descending, size == rank
  Eigen::MatrixXd eigenvectors;  // (S*6) x rank, orthonormal columns
  Eigen::VectorXd mean_day;      // the mean day the model was fit against
  int rank = 0;
};

// Fits by the small-Gram route: eigendecompose the D x D Gram matrix of the
// deviation rows and map its eigenvectors into feature space. Equivalent to
// decomposing the (S*6)^2 scatter matrix, but tractable at S = 288.
// An all-zero deviation matrix yields a valid rank-0 model.
EigenModel fit(const Eigen::MatrixXd& deviations, Eigen::VectorXd mean_day = {});
EigenModel fit(const matrix::BehaviourMatrix& bm);

// Projection of the deviations onto the first n eigenvectors; n = 0 gives
// the zero matrix. Requires 0 <= n <= rank.
Eigen::MatrixXd reconstruct(const EigenModel& model, const Eigen::MatrixXd& deviations, int n);

// Normalized n-th reconstruction error: the L1 norm of the reconstruction
// residual divided by the matrix size D*S*6 (mean deviation per cell).
double reconstruction_error(const EigenModel& model, const Eigen::MatrixXd& deviations, int n);

struct ReconstructionErrorSeries {
  std::string person_id;
  int windows_per_day = 0;
  int rank = 0;
  std::vector<double> errors;  // errors[n] for n = 0..min(n_max, rank)
};

ReconstructionErrorSeries error_series(const matrix::BehaviourMatrix& bm, int n_max);

}  // namespace eb::eigenmodel
