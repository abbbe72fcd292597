#pragma once

#include "ecgraph/correction.hpp"
#include "ecgraph/filters.hpp"
#include "ecgraph/graph.hpp"
#include "ecgraph/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ecgraph {

/// Signals (one per column) and the ground-truth filtered signals.
struct FilterTask {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
};

/// targets[:, j] = U diag(g(lambda)) U^T signals[:, j], always built from the
/// original eigenvalues; corrected eigenvalues only ever enter the model.
FilterTask make_filter_task(const Graph& g, const EigenSystem& eig, TargetFilter kind,
                            const Eigen::MatrixXd& signals);

/// Seeded smooth random fields: white noise passed `passes` times through
/// (2I + A_norm) / 3, a low-pass smoother that keeps every frequency present.
Eigen::MatrixXd smooth_random_signals(const Graph& g, int count, int passes, std::uint64_t seed);

struct FitConfig {
  Basis basis = GprMonomial{};
  int order = 10;
  double learning_rate = 1.0;
  // When true the step is learning_rate / L with L the largest Hessian
  // eigenvalue, so learning_rate < 2 always converges.
  bool scale_by_curvature = true;
  int max_iters = 20000;
  // Stop early once the max-norm of the gradient drops below this.
  double gradient_tolerance = 1e-14;
  std::uint64_t seed = 0;
  double init_jitter = 0.0;
  // Project onto coefficients >= 0 after each step (Bernstein).
  bool nonneg = false;
};

void validate(const FitConfig& config);

struct FitResult {
  FilterModel model;
  double train_mse = 0.0;
  Eigen::VectorXd per_image_mse;
  double wall_seconds = 0.0;
  int iterations = 0;
  std::optional<std::string> warning;
};

/// Mean squared error of a fitted filter, exposed as a function of the
/// coefficient vector. Works in the spectral domain: U is orthonormal, so the
/// loss separates over frequencies and each evaluation costs O(n K).
class FilterFitObjective {
 public:
  FilterFitObjective(const FilterTask& task, const EigenSystem& eig, const CorrectedSpectrum& spec,
                     const Basis& basis, int order);

  double loss(const Eigen::VectorXd& alpha) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& alpha) const;
  Eigen::VectorXd per_image_mse(const Eigen::VectorXd& alpha) const;
  // Constant Hessian of the quadratic loss.
  Eigen::MatrixXd hessian() const;

  const Eigen::MatrixXd& design() const noexcept { return design_; }
  Index num_coefficients() const noexcept { return design_.cols(); }

 private:
  friend FitResult fit_least_squares(const FilterTask&, const EigenSystem&,
                                     const CorrectedSpectrum&, const Basis&, int);

  Eigen::MatrixXd design_;          // n x (K+1)
  Eigen::MatrixXd input_spectrum_;  // U^T inputs
  Eigen::MatrixXd target_spectrum_; // U^T targets
  Eigen::VectorXd energy_;          // sum_j input_spectrum(i, j)^2
  Eigen::VectorXd cross_;           // sum_j input_spectrum(i, j) * target_spectrum(i, j)
  double target_energy_ = 0.0;
  double scale_ = 0.0;              // 1 / (n m)
};

inline constexpr double kLeastSquaresRidge = 1e-10;

/// Closed-form minimizer of the filter MSE (ridge 1e-10). Sets a warning when
/// the design is rank deficient; a solution is still returned.
FitResult fit_least_squares(const FilterTask& task, const EigenSystem& eig,
                            const CorrectedSpectrum& spec, const Basis& basis, int order);

/// Full-batch constant-step gradient descent on the same objective.
/// Throws DivergedError when the loss exceeds 1e6 times its initial value.
FitResult fit_gradient_descent(const FilterTask& task, const EigenSystem& eig,
                               const CorrectedSpectrum& spec, const FitConfig& config);

struct FilterExperimentConfig {
  Index rows = 16;
  Index cols = 16;
  int images = 10;
  int smoothing_passes = 2;
  std::uint64_t signal_seed = 0;
  std::vector<TargetFilter> targets{kAllTargetFilters.begin(), kAllTargetFilters.end()};
  std::vector<Basis> bases{GprMonomial{}, Bernstein{}, Jacobi{}};
  std::vector<double> beta_grid = filter_learning_beta_grid();
  FitConfig fit;  // basis and nonneg are set per basis
  bool with_oracle = false;
  // Randomly permute eigenvectors inside tie groups (seeded by signal_seed).
  bool shuffle_ties = false;
};

void validate(const FilterExperimentConfig& config);

struct FilterRecord {
  TargetFilter target;
  Basis basis;
  double beta;
  int order;
  double mse;
  double seconds;
  std::optional<double> oracle_mse;
};

/// Per (target, basis): the beta = 1 baseline against the best grid beta.
struct FilterSummary {
  TargetFilter target;
  Basis basis;
  double baseline_mse;
  double best_beta;
  double best_mse;
  // (baseline - best) / baseline
  double improvement;
};

struct SignalStats {
  double mean = 0.0;
  double stddev = 0.0;
  double low_frequency_energy = 0.0;  // energy share of the lower half of the spectrum
};

struct FilterExperimentReport {
  std::vector<FilterRecord> records;
  std::vector<FilterSummary> summaries;
  SignalStats signals;
  SpectrumStats spectrum;
};

/// Fits every (target, basis, beta) combination on a grid graph. beta = 1 is
/// always evaluated as the uncorrected baseline in addition to beta_grid.
FilterExperimentReport run_filter_experiment(const FilterExperimentConfig& config);

/// CSV rows `target,basis,beta,K,mse,seconds` (plus `oracle_mse` when the
/// oracle ran). With include_timing = false the seconds column is written as 0
/// so reruns are byte-identical.
void write_filter_report_csv(std::ostream& out, const FilterExperimentReport& report,
                             bool include_timing);
std::string filter_summary_json(const FilterExperimentReport& report);

}  // namespace ecgraph
