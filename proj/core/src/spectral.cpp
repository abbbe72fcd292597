#include "ecgraph/spectral.hpp"

#include "ecgraph/errors.hpp"
#include "ecgraph/format.hpp"
#include "ecgraph/random.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace ecgraph {

EigenSystem::EigenSystem(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors,
                         EigenBackend backend)
    : eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      backend_(backend) {
  const Index n = eigenvalues_.size();
  if (n == 0) throw ValidationError("empty eigensystem");
  if (eigenvectors_.rows() != n || eigenvectors_.cols() != n) {
    throw ValidationError("eigenvector matrix must be " + std::to_string(n) + "x" +
                          std::to_string(n));
  }
  for (Index i = 0; i < n; ++i) {
    const double value = eigenvalues_(i);
    if (!std::isfinite(value)) throw NumericError("non-finite eigenvalue");
    if (i > 0 && value < eigenvalues_(i - 1)) {
      throw ValidationError("eigenvalues must be sorted ascending");
    }
    if (value < -kSpectrumRangeSlack || value > 2.0 + kSpectrumRangeSlack) {
      throw ValidationError("eigenvalue " + std::to_string(value) +
                            " lies outside [0, 2]; input is not a normalized Laplacian");
    }
  }
  eigenvalues_ = eigenvalues_.cwiseMax(0.0).cwiseMin(2.0);
}

double eigensystem_defect(const Eigen::MatrixXd& op, const Eigen::VectorXd& values,
                          const Eigen::MatrixXd& vectors) {
  const Index n = op.rows();
  if (op.cols() != n || values.size() != n || vectors.rows() != n || vectors.cols() != n) {
    throw ValidationError("eigensystem shapes do not match the operator");
  }
  Rng rng(0x5eedULL);
  Eigen::VectorXd probe(n);
  for (Index i = 0; i < n; ++i) probe(i) = rng.normal();
  const double norm = probe.norm();
  if (norm == 0.0) return 0.0;

  const Eigen::VectorXd mapped = vectors * probe;
  const double orth = (vectors.transpose() * mapped - probe).norm();
  const double resid = (op * mapped - vectors * values.cwiseProduct(probe)).norm();
  const double defect = std::max(orth, resid) / norm;
  return std::isfinite(defect) ? defect : std::numeric_limits<double>::infinity();
}

EigenSystem eigendecompose(const Eigen::MatrixXd& lap_norm) {
  const Index n = lap_norm.rows();
  if (n == 0 || lap_norm.cols() != n) throw ValidationError("operator must be square and non-empty");
  if (!lap_norm.allFinite()) throw ValidationError("operator has non-finite entries");
  const double asymmetry = (lap_norm - lap_norm.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12) {
    throw ValidationError("operator is not symmetric (max |A - A^T| = " +
                          std::to_string(asymmetry) + ")");
  }

  Eigen::MatrixXd vectors = lap_norm;
  Eigen::VectorXd values(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n), vectors.data(),
                     static_cast<lapack_int>(vectors.outerStride()), values.data());
  if (info < 0) throw NumericError("dsyevd: illegal argument " + std::to_string(-info));
  if (info > 0) throw NumericError("dsyevd failed to converge (info=" + std::to_string(info) + ")");
  if (eigensystem_defect(lap_norm, values, vectors) <= kEigenDefectTolerance) {
    return EigenSystem(std::move(values), std::move(vectors), EigenBackend::Lapack);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap_norm);
  if (solver.info() != Eigen::Success) throw NumericError("eigen solver failed to converge");
  if (eigensystem_defect(lap_norm, solver.eigenvalues(), solver.eigenvectors()) >
      kEigenDefectTolerance) {
    throw NumericError("eigendecomposition failed its consistency check");
  }
  return EigenSystem(solver.eigenvalues(), solver.eigenvectors(), EigenBackend::Eigen);
}

SpectrumStats count_distinct(std::span<const double> sorted, double tol) {
  if (sorted.empty()) throw ValidationError("cannot count distinct values of an empty spectrum");
  if (!(tol >= 0.0)) throw ValidationError("tolerance must be non-negative");
  SpectrumStats stats;
  stats.n_total = static_cast<Index>(sorted.size());
  stats.n_distinct = 1;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0) {
      const double gap = sorted[i] - sorted[i - 1];
      if (gap < 0.0) throw ValidationError("spectrum must be sorted ascending");
      if (gap > tol) ++stats.n_distinct;
    }
    if (std::abs(sorted[i] - 1.0) <= tol) ++stats.multiplicity_at_one;
  }
  stats.p_distinct = static_cast<double>(stats.n_distinct) / static_cast<double>(stats.n_total);
  return stats;
}

Eigen::VectorXd fourier(const Eigen::MatrixXd& eigenvectors, const Eigen::VectorXd& signal) {
  if (eigenvectors.rows() != signal.size()) {
    throw ValidationError("signal length does not match the eigenvector basis");
  }
  return eigenvectors.transpose() * signal;
}

Eigen::VectorXd inverse_fourier(const Eigen::MatrixXd& eigenvectors,
                                const Eigen::VectorXd& coefficients) {
  if (eigenvectors.cols() != coefficients.size()) {
    throw ValidationError("coefficient count does not match the eigenvector basis");
  }
  return eigenvectors * coefficients;
}

Histogram spectrum_histogram(std::span<const double> values, int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  if (values.empty()) throw ValidationError("histogram of an empty spectrum");
  const double width = 2.0 / bins;
  Histogram hist;
  hist.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) hist.bin_edges[static_cast<std::size_t>(b)] = 2.0 * b / bins;

  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (const double v : values) {
    if (!(v >= 0.0 && v <= 2.0)) {
      throw ValidationError("histogram value " + std::to_string(v) + " outside [0, 2]");
    }
    const auto bin = std::min(static_cast<int>(v / width), bins - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }
  const double scale = 1.0 / (static_cast<double>(values.size()) * width);
  hist.densities.reserve(counts.size());
  for (const std::size_t c : counts) hist.densities.push_back(static_cast<double>(c) * scale);
  return hist;
}

double fraction_in_range(std::span<const double> values, double lo, double hi) {
  if (values.empty()) return 0.0;
  const auto inside =
      std::count_if(values.begin(), values.end(), [&](double v) { return v >= lo && v <= hi; });
  return static_cast<double>(inside) / static_cast<double>(values.size());
}

void write_histogram_csv(std::ostream& out, const Histogram& hist) {
  out << "bin_left,bin_right,density\n";
  for (std::size_t b = 0; b < hist.densities.size(); ++b) {
    out << format_double(hist.bin_edges[b]) << ',' << format_double(hist.bin_edges[b + 1]) << ','
        << format_double(hist.densities[b]) << '\n';
  }
}

}  // namespace ecgraph
