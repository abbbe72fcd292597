#include "ecgraph/correction.hpp"

#include "ecgraph/errors.hpp"
#include "ecgraph/format.hpp"
#include "ecgraph/random.hpp"

#include <limits>
#include <ostream>
#include <string>
#include <utility>

namespace ecgraph {

Eigen::VectorXd equidistant(Index n) {
  if (n < 2) throw ValidationError("equidistant grid needs n >= 2");
  Eigen::VectorXd grid(n);
  const auto denom = static_cast<double>(n - 1);
  for (Index i = 0; i < n; ++i) grid(i) = 2.0 * static_cast<double>(i) / denom;
  return grid;
}

bool CorrectedSpectrum::derived_from(const EigenSystem& eig) const {
  return lambda.size() == eig.size() && lambda == eig.eigenvalues();
}

CorrectedSpectrum correct(const EigenSystem& eig, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError("beta must lie in [0, 1]; got " + std::to_string(beta));
  }
  CorrectedSpectrum spec;
  spec.beta = beta;
  spec.lambda = eig.eigenvalues();
  spec.upsilon = equidistant(eig.size());
  spec.mu = beta * spec.lambda.array() + (1.0 - beta) * spec.upsilon.array();
  return spec;
}

MonotonicityReport verify_strictly_increasing(std::span<const double> values) {
  MonotonicityReport report;
  report.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double gap = values[i] - values[i - 1];
    if (gap < report.min_gap) {
      report.min_gap = gap;
      report.min_gap_index = static_cast<Index>(i);
    }
    if (!(gap > 0.0)) report.strictly_increasing = false;
  }
  return report;
}

namespace {

void require_pairing(const EigenSystem& eig, const CorrectedSpectrum& spec) {
  if (!spec.derived_from(eig)) {
    throw ValidationError("corrected spectrum was not derived from this eigensystem");
  }
}

Eigen::MatrixXd spectral_synthesis(const Eigen::MatrixXd& u, const Eigen::VectorXd& diag) {
  const Eigen::MatrixXd scaled = u * diag.asDiagonal();
  Eigen::MatrixXd out = scaled * u.transpose();
  // Symmetrize away the rounding asymmetry of the two-sided product.
  return 0.5 * (out + out.transpose());
}

}  // namespace

Eigen::MatrixXd corrected_operator(const EigenSystem& eig, const CorrectedSpectrum& spec) {
  require_pairing(eig, spec);
  return spectral_synthesis(eig.eigenvectors(), spec.mu);
}

Eigen::MatrixXd corrected_operator_affine(const Eigen::MatrixXd& lap_norm, const EigenSystem& eig,
                                          const CorrectedSpectrum& spec) {
  require_pairing(eig, spec);
  if (lap_norm.rows() != eig.size() || lap_norm.cols() != eig.size()) {
    throw ValidationError("Laplacian size does not match the eigensystem");
  }
  const Eigen::MatrixXd grid_operator = spectral_synthesis(eig.eigenvectors(), spec.upsilon);
  return spec.beta * lap_norm + (1.0 - spec.beta) * grid_operator;
}

EigenSystem shuffle_tie_groups(const EigenSystem& eig, double tol, std::uint64_t seed) {
  const Eigen::VectorXd& values = eig.eigenvalues();
  const Eigen::MatrixXd& vectors = eig.eigenvectors();
  const Index n = eig.size();
  Rng rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  Index start = 0;
  while (start < n) {
    Index end = start + 1;
    while (end < n && values(end) - values(end - 1) <= tol) ++end;
    // Fisher-Yates on [start, end).
    for (Index i = end - 1; i > start; --i) {
      const auto j = start + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(i - start + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    start = end;
  }

  Eigen::MatrixXd shuffled(n, n);
  for (Index i = 0; i < n; ++i) shuffled.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
  return EigenSystem(values, std::move(shuffled), eig.backend());
}

std::vector<double> filter_learning_beta_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<double> classification_beta_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(i / 100.0);
  return grid;
}

void write_spectrum_csv(std::ostream& out, const CorrectedSpectrum& spec) {
  out << "index,lambda,upsilon,mu\n";
  for (Index i = 0; i < spec.mu.size(); ++i) {
    out << i << ',' << format_double(spec.lambda(i)) << ',' << format_double(spec.upsilon(i)) << ','
        << format_double(spec.mu(i)) << '\n';
  }
}

}  // namespace ecgraph
