#pragma once

#include "ecgraph/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace ecgraph {

/// n equally spaced values on [0, 2]: 2i / (n - 1).
Eigen::VectorXd equidistant(Index n);

/// Corrected eigenvalues mu = beta * lambda + (1 - beta) * upsilon.
///
/// Holds a copy of the source eigenvalues so that operators built from it can
/// check they are paired with the eigensystem it was derived from.
struct CorrectedSpectrum {
  double beta = 1.0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd upsilon;
  Eigen::VectorXd mu;

  bool derived_from(const EigenSystem& eig) const;
};

CorrectedSpectrum correct(const EigenSystem& eig, double beta);

/// Smallest consecutive gap of mu guaranteed for beta in [0, 1).
inline double guaranteed_min_gap(Index n, double beta) {
  return (1.0 - beta) * 2.0 / static_cast<double>(n - 1);
}

struct MonotonicityReport {
  bool strictly_increasing = true;
  double min_gap = 0.0;     // +inf for fewer than two values
  Index min_gap_index = 0;  // i such that values[i] - values[i-1] is the minimum
};

MonotonicityReport verify_strictly_increasing(std::span<const double> values);

/// H = U diag(mu) U^T.
Eigen::MatrixXd corrected_operator(const EigenSystem& eig, const CorrectedSpectrum& spec);

/// H = beta * L + (1 - beta) * U diag(upsilon) U^T. Same matrix as
/// corrected_operator, assembled from the Laplacian instead of from mu.
Eigen::MatrixXd corrected_operator_affine(const Eigen::MatrixXd& lap_norm, const EigenSystem& eig,
                                          const CorrectedSpectrum& spec);

/// Returns a copy of eig whose eigenvector columns are randomly permuted
/// inside each tie group (consecutive eigenvalues within tol). Any such
/// ordering is an equally valid decomposition; useful for probing how much a
/// result depends on the solver's tie ordering.
EigenSystem shuffle_tie_groups(const EigenSystem& eig, double tol, std::uint64_t seed);

// {0, 0.1, ..., 0.9}
std::vector<double> filter_learning_beta_grid();
// {0, 0.01, ..., 0.99}
std::vector<double> classification_beta_grid();

/// CSV with header `index,lambda,upsilon,mu`.
void write_spectrum_csv(std::ostream& out, const CorrectedSpectrum& spec);

}  // namespace ecgraph
