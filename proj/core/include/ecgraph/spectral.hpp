#pragma once

#include "ecgraph/graph.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <vector>

namespace ecgraph {

inline constexpr double kDefaultDistinctTolerance = 1e-6;
inline constexpr double kSpectrumRangeSlack = 1e-8;
inline constexpr double kEigenDefectTolerance = 1e-8;

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// Which solver produced an EigenSystem. `Eigen` marks the fallback taken when
/// the LAPACK result fails the post-solve check.
enum class EigenBackend { External, Lapack, Eigen };

/// Eigenvalues of a normalized Laplacian in ascending order together with the
/// orthonormal eigenvectors stored column-wise. Within a group of tied
/// eigenvalues the column order is whatever the solver produced.
class EigenSystem {
 public:
  /// Validates shapes, ascending order and the [0, 2] range (with a 1e-8
  /// slack); values inside the slack are clamped onto [0, 2].
  EigenSystem(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors,
              EigenBackend backend = EigenBackend::External);

  Index size() const noexcept { return eigenvalues_.size(); }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
  EigenBackend backend() const noexcept { return backend_; }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  EigenBackend backend_;
};

/// Cheap O(n^2) consistency check of a decomposition of `op` using a fixed
/// pseudo-random probe p: max of |U^T U p - p| and |op U p - U diag(values) p|,
/// both relative to |p|. Exact decompositions give round-off level values.
double eigensystem_defect(const Eigen::MatrixXd& op, const Eigen::VectorXd& values,
                          const Eigen::MatrixXd& vectors);

/// Full symmetric eigendecomposition of a normalized Laplacian via LAPACK
/// dsyevd. If the result fails eigensystem_defect (some optimized BLAS builds
/// pick broken kernels on newer CPUs) it is recomputed with Eigen's solver.
/// Throws ValidationError for asymmetric input (beyond 1e-12) or a spectrum
/// outside [0, 2], NumericError when the solver fails to converge.
EigenSystem eigendecompose(const Eigen::MatrixXd& lap_norm);

inline EigenSystem eigendecompose(const Graph& g) {
  return eigendecompose(normalized_operators(g).lap_norm);
}

struct SpectrumStats {
  Index n_total = 0;
  Index n_distinct = 0;
  double p_distinct = 0.0;
  Index multiplicity_at_one = 0;  // eigenvalues within tol of 1.0
};

/// Counts distinct values of an ascending sequence in one left-to-right pass:
/// a new group starts whenever the gap to the previous value exceeds tol.
SpectrumStats count_distinct(std::span<const double> sorted, double tol = kDefaultDistinctTolerance);

// Graph Fourier transform and its inverse.
Eigen::VectorXd fourier(const Eigen::MatrixXd& eigenvectors, const Eigen::VectorXd& signal);
Eigen::VectorXd inverse_fourier(const Eigen::MatrixXd& eigenvectors,
                                const Eigen::VectorXd& coefficients);

/// Probability-density histogram over equal-width bins spanning [0, 2].
struct Histogram {
  std::vector<double> bin_edges;  // bins + 1 ascending edges
  std::vector<double> densities;  // count / (n * width)
};

Histogram spectrum_histogram(std::span<const double> values, int bins);

/// Fraction of values inside the closed interval [lo, hi].
double fraction_in_range(std::span<const double> values, double lo, double hi);

/// CSV with header `bin_left,bin_right,density`.
void write_histogram_csv(std::ostream& out, const Histogram& hist);

}  // namespace ecgraph
