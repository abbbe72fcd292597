#include "ecgraph/learning.hpp"

#include "ecgraph/errors.hpp"
#include "ecgraph/format.hpp"
#include "ecgraph/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <string>

namespace ecgraph {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::VectorXd identity_response_coefficients(const Basis& basis, int order) {
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(order + 1);
  if (std::holds_alternative<Bernstein>(basis)) {
    alpha.setOnes();  // Bernstein partition of unity
  } else {
    alpha(0) = 1.0;  // constant term of the monomial / Jacobi basis
  }
  return alpha;
}

void require_task_shape(const FilterTask& task, const EigenSystem& eig) {
  if (task.inputs.rows() != eig.size() || task.targets.rows() != eig.size()) {
    throw ValidationError("task signals must have one row per node");
  }
  if (task.inputs.cols() != task.targets.cols() || task.inputs.cols() == 0) {
    throw ValidationError("task needs matching, non-empty input and target columns");
  }
}

}  // namespace

FilterTask make_filter_task(const Graph& g, const EigenSystem& eig, TargetFilter kind,
                            const Eigen::MatrixXd& signals) {
  if (g.num_nodes() != eig.size()) throw ValidationError("graph and eigensystem sizes differ");
  if (signals.rows() != eig.size() || signals.cols() == 0) {
    throw ValidationError("signals must be an n x m matrix with m >= 1");
  }
  Eigen::VectorXd gain(eig.size());
  for (Index i = 0; i < eig.size(); ++i) gain(i) = target_response(kind, eig.eigenvalues()(i));
  const Eigen::MatrixXd& u = eig.eigenvectors();
  Eigen::MatrixXd spectrum = u.transpose() * signals;
  spectrum = gain.asDiagonal() * spectrum;
  return {signals, u * spectrum};
}

Eigen::MatrixXd smooth_random_signals(const Graph& g, int count, int passes, std::uint64_t seed) {
  if (count < 1) throw ValidationError("need at least one signal");
  if (passes < 0) throw ValidationError("smoothing passes must be non-negative");
  const Index n = g.num_nodes();
  Rng rng(seed);
  Eigen::MatrixXd signals(n, count);
  for (Index j = 0; j < count; ++j) {
    for (Index i = 0; i < n; ++i) signals(i, j) = rng.normal();
  }
  if (passes > 0) {
    const Eigen::MatrixXd adj = normalized_operators(g).adj_norm;
    for (int p = 0; p < passes; ++p) signals = (2.0 * signals + adj * signals) / 3.0;
  }
  return signals;
}

void validate(const FitConfig& config) {
  validate_basis(config.basis);
  if (config.order < 0) throw ValidationError("order must be non-negative");
  if (!(config.learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (config.max_iters < 1) throw ValidationError("max_iters must be positive");
  if (!(config.gradient_tolerance >= 0.0)) throw ValidationError("gradient tolerance must be >= 0");
  if (!(config.init_jitter >= 0.0)) throw ValidationError("init jitter must be >= 0");
}

FilterFitObjective::FilterFitObjective(const FilterTask& task, const EigenSystem& eig,
                                       const CorrectedSpectrum& spec, const Basis& basis,
                                       int order) {
  require_task_shape(task, eig);
  if (!spec.derived_from(eig)) {
    throw ValidationError("corrected spectrum was not derived from this eigensystem");
  }
  design_ = basis_matrix(basis, as_span(spec.mu), order);
  const Eigen::MatrixXd& u = eig.eigenvectors();
  input_spectrum_ = u.transpose() * task.inputs;
  target_spectrum_ = u.transpose() * task.targets;
  energy_ = input_spectrum_.rowwise().squaredNorm();
  cross_ = (input_spectrum_.array() * target_spectrum_.array()).rowwise().sum();
  target_energy_ = target_spectrum_.squaredNorm();
  scale_ = 1.0 / static_cast<double>(task.inputs.rows() * task.inputs.cols());
}

double FilterFitObjective::loss(const Eigen::VectorXd& alpha) const {
  const Eigen::VectorXd h = design_ * alpha;
  const double quadratic = (energy_.array() * h.array().square()).sum();
  return scale_ * (quadratic - 2.0 * cross_.dot(h) + target_energy_);
}

Eigen::VectorXd FilterFitObjective::gradient(const Eigen::VectorXd& alpha) const {
  const Eigen::VectorXd h = design_ * alpha;
  return (2.0 * scale_) * (design_.transpose() * (energy_.cwiseProduct(h) - cross_));
}

Eigen::VectorXd FilterFitObjective::per_image_mse(const Eigen::VectorXd& alpha) const {
  const Eigen::VectorXd h = design_ * alpha;
  const Eigen::MatrixXd residual = h.asDiagonal() * input_spectrum_ - target_spectrum_;
  return residual.colwise().squaredNorm().transpose() / static_cast<double>(residual.rows());
}

Eigen::MatrixXd FilterFitObjective::hessian() const {
  return (2.0 * scale_) * (design_.transpose() * energy_.asDiagonal() * design_);
}

FitResult fit_least_squares(const FilterTask& task, const EigenSystem& eig,
                            const CorrectedSpectrum& spec, const Basis& basis, int order) {
  const auto start = Clock::now();
  const FilterFitObjective objective(task, eig, spec, basis, order);
  const Index n = objective.design_.rows();
  const Index p = objective.design_.cols();

  // Weighted rows sqrt(s_i) B_i with right-hand side r_i / sqrt(s_i); rows
  // with s_i = 0 carry no information (r_i = 0 as well).
  Eigen::MatrixXd weighted(n, p);
  Eigen::VectorXd rhs(n);
  for (Index i = 0; i < n; ++i) {
    const double s = objective.energy_(i);
    const double root = std::sqrt(s);
    weighted.row(i) = root * objective.design_.row(i);
    rhs(i) = s > 0.0 ? objective.cross_(i) / root : 0.0;
  }

  Eigen::MatrixXd stacked(n + p, p);
  stacked << weighted, std::sqrt(kLeastSquaresRidge) * Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd stacked_rhs(n + p);
  stacked_rhs << rhs, Eigen::VectorXd::Zero(p);
  const Eigen::VectorXd alpha = stacked.colPivHouseholderQr().solve(stacked_rhs);
  if (!alpha.allFinite()) throw NumericError("least-squares solve produced non-finite coefficients");

  FitResult result{FilterModel(basis, order, alpha), 0.0, objective.per_image_mse(alpha), 0.0, 0,
                   std::nullopt};
  result.train_mse = result.per_image_mse.mean();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_probe(weighted);
  rank_probe.setThreshold(1e-12);
  if (rank_probe.rank() < p) {
    result.warning = "rank-deficient design: rank " + std::to_string(rank_probe.rank()) + " < " +
                     std::to_string(p) + " coefficients; ridge solution returned";
  }
  result.wall_seconds = seconds_since(start);
  return result;
}

FitResult fit_gradient_descent(const FilterTask& task, const EigenSystem& eig,
                               const CorrectedSpectrum& spec, const FitConfig& config) {
  validate(config);
  const auto start = Clock::now();
  const FilterFitObjective objective(task, eig, spec, config.basis, config.order);

  Eigen::VectorXd alpha = identity_response_coefficients(config.basis, config.order);
  if (config.init_jitter > 0.0) {
    Rng rng(config.seed);
    for (Index k = 0; k < alpha.size(); ++k) alpha(k) += config.init_jitter * rng.normal();
  }
  if (config.nonneg) alpha = alpha.cwiseMax(0.0);

  double step = config.learning_rate;
  if (config.scale_by_curvature) {
    const double curvature =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(objective.hessian(), Eigen::EigenvaluesOnly)
            .eigenvalues()
            .maxCoeff();
    if (curvature > 0.0) step /= curvature;
  }

  const double initial_loss = objective.loss(alpha);
  const double blowup = 1e6 * std::max(initial_loss, 1e-12);
  int iterations = 0;
  for (; iterations < config.max_iters; ++iterations) {
    Eigen::VectorXd grad = objective.gradient(alpha);
    if (config.nonneg) {
      // Components pinned at the bound with an outward gradient are stationary.
      for (Index k = 0; k < grad.size(); ++k) {
        if (alpha(k) <= 0.0 && grad(k) > 0.0) grad(k) = 0.0;
      }
    }
    if (grad.lpNorm<Eigen::Infinity>() < config.gradient_tolerance) break;
    alpha -= step * grad;
    if (config.nonneg) alpha = alpha.cwiseMax(0.0);
    const double current = objective.loss(alpha);
    if (!std::isfinite(current) || current > blowup) {
      throw DivergedError("gradient descent diverged at iteration " + std::to_string(iterations + 1) +
                          " (loss " + format_double(current) + " from " +
                          format_double(initial_loss) + "); lower the learning rate");
    }
  }

  FitResult result{FilterModel(config.basis, config.order, alpha), 0.0,
                   objective.per_image_mse(alpha), 0.0, iterations, std::nullopt};
  result.train_mse = result.per_image_mse.mean();
  result.wall_seconds = seconds_since(start);
  return result;
}

void validate(const FilterExperimentConfig& config) {
  if (config.rows < 1 || config.cols < 1 || config.rows * config.cols < 2) {
    throw ValidationError("grid must have at least 2 nodes");
  }
  if (config.images < 1) throw ValidationError("need at least one image");
  if (config.smoothing_passes < 0) throw ValidationError("smoothing passes must be >= 0");
  if (config.targets.empty()) throw ValidationError("no target filters selected");
  if (config.bases.empty()) throw ValidationError("no bases selected");
  for (const Basis& basis : config.bases) validate_basis(basis);
  for (const double beta : config.beta_grid) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta grid values must lie in [0, 1]");
  }
  validate(config.fit);
}

FilterExperimentReport run_filter_experiment(const FilterExperimentConfig& config) {
  validate(config);
  const Graph grid = grid_graph(config.rows, config.cols);
  const EigenSystem eig = config.shuffle_ties
                              ? shuffle_tie_groups(eigendecompose(grid), kDefaultDistinctTolerance,
                                                   config.signal_seed)
                              : eigendecompose(grid);
  const Eigen::MatrixXd signals =
      smooth_random_signals(grid, config.images, config.smoothing_passes, config.signal_seed);

  FilterExperimentReport report;
  report.spectrum = count_distinct(as_span(eig.eigenvalues()));
  {
    const double count = static_cast<double>(signals.size());
    report.signals.mean = signals.mean();
    report.signals.stddev =
        std::sqrt((signals.array() - report.signals.mean).square().sum() / count);
    const Eigen::MatrixXd spectrum = eig.eigenvectors().transpose() * signals;
    const Index half = eig.size() / 2;
    report.signals.low_frequency_energy =
        spectrum.topRows(half).squaredNorm() / std::max(spectrum.squaredNorm(), 1e-300);
  }

  std::vector<double> betas = config.beta_grid;
  if (std::find(betas.begin(), betas.end(), 1.0) == betas.end()) betas.push_back(1.0);

  for (const TargetFilter target : config.targets) {
    const FilterTask task = make_filter_task(grid, eig, target, signals);
    for (const Basis& basis : config.bases) {
      FitConfig fit = config.fit;
      fit.basis = basis;
      fit.nonneg = std::holds_alternative<Bernstein>(basis);

      FilterSummary summary{target, basis, 0.0, 1.0, 0.0, 0.0};
      bool have_best = false;
      for (const double beta : betas) {
        const CorrectedSpectrum spec = correct(eig, beta);
        const FitResult fitted = fit_gradient_descent(task, eig, spec, fit);
        FilterRecord record{target, basis, beta, fit.order, fitted.train_mse, fitted.wall_seconds,
                            std::nullopt};
        if (config.with_oracle) {
          record.oracle_mse = fit_least_squares(task, eig, spec, basis, fit.order).train_mse;
        }
        report.records.push_back(record);

        if (beta == 1.0) {
          summary.baseline_mse = fitted.train_mse;
        } else if (!have_best || fitted.train_mse < summary.best_mse) {
          summary.best_beta = beta;
          summary.best_mse = fitted.train_mse;
          have_best = true;
        }
      }
      if (!have_best) summary.best_mse = summary.baseline_mse;
      summary.improvement = summary.baseline_mse > 0.0
                                ? (summary.baseline_mse - summary.best_mse) / summary.baseline_mse
                                : 0.0;
      report.summaries.push_back(summary);
    }
  }
  return report;
}

void write_filter_report_csv(std::ostream& out, const FilterExperimentReport& report,
                             bool include_timing) {
  const bool oracle = !report.records.empty() && report.records.front().oracle_mse.has_value();
  out << "target,basis,beta,K,mse,seconds" << (oracle ? ",oracle_mse" : "") << '\n';
  for (const FilterRecord& r : report.records) {
    out << target_name(r.target) << ',' << basis_name(r.basis) << ',' << format_double(r.beta)
        << ',' << r.order << ',' << format_double(r.mse) << ','
        << (include_timing ? format_double(r.seconds) : std::string("0"));
    if (oracle) out << ',' << format_double(r.oracle_mse.value_or(0.0));
    out << '\n';
  }
}

std::string filter_summary_json(const FilterExperimentReport& report) {
  nlohmann::ordered_json j;
  j["spectrum"] = {{"n_total", report.spectrum.n_total},
                   {"n_distinct", report.spectrum.n_distinct},
                   {"p_distinct", report.spectrum.p_distinct},
                   {"multiplicity_at_one", report.spectrum.multiplicity_at_one}};
  j["signals"] = {{"mean", report.signals.mean},
                  {"stddev", report.signals.stddev},
                  {"low_frequency_energy", report.signals.low_frequency_energy}};
  j["beta_selection"] = "best training MSE over the beta grid; beta=1 is the uncorrected baseline";
  auto rows = nlohmann::ordered_json::array();
  for (const FilterSummary& s : report.summaries) {
    rows.push_back({{"target", target_name(s.target)},
                    {"basis", basis_name(s.basis)},
                    {"baseline_mse", s.baseline_mse},
                    {"best_beta", s.best_beta},
                    {"best_mse", s.best_mse},
                    {"improvement", s.improvement}});
  }
  j["summaries"] = std::move(rows);
  return j.dump(2) + "\n";
}

}  // namespace ecgraph
