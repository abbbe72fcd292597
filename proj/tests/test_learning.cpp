#include "ecgraph/correction.hpp"
#include "ecgraph/errors.hpp"
#include "ecgraph/learning.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <sstream>

namespace ecgraph {
namespace {

const std::vector<Basis> kBases{GprMonomial{}, Bernstein{}, Jacobi{}};

// Least-squares floor of fitting `target` from `input` when the filter may
// only scale each listed eigenspace of `lap` by one shared gain.
double projection_floor(const Eigen::MatrixXd& lap, const std::vector<double>& eigenvalues,
                        const Eigen::VectorXd& input, const Eigen::VectorXd& target) {
  Eigen::MatrixXd columns(input.size(), static_cast<Index>(eigenvalues.size()));
  for (std::size_t g = 0; g < eigenvalues.size(); ++g) {
    columns.col(static_cast<Index>(g)) =
        testing::eigenspace_projector(lap, eigenvalues[g], 1e-6) * input;
  }
  const Eigen::VectorXd gains = columns.colPivHouseholderQr().solve(target);
  return (columns * gains - target).squaredNorm() / static_cast<double>(input.size());
}

TEST(MakeFilterTask, Examples) {
  const Graph c4 = testing::cycle_graph(4);
  const EigenSystem eig = eigendecompose(c4);
  const Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(4, 1, 3.0);
  const FilterTask low = make_filter_task(c4, eig, TargetFilter::Low, constant);
  EXPECT_LE((low.targets - constant).norm(), 1e-12);
  EXPECT_EQ(low.inputs, constant);
  EXPECT_LE(make_filter_task(c4, eig, TargetFilter::High, constant).targets.norm(), 1e-6);

  const Graph p2 = testing::path_graph(2);
  const Eigen::MatrixXd signal = Eigen::Vector2d(0.4, -2.0);
  const FilterTask band = make_filter_task(p2, eigendecompose(p2), TargetFilter::Band, signal);
  EXPECT_LE((band.targets - std::exp(-10.0) * signal).norm(), 1e-15);

  EXPECT_THROW(make_filter_task(c4, eig, TargetFilter::Low, Eigen::MatrixXd::Ones(3, 1)),
               ValidationError);
}

TEST(SmoothRandomSignals, DeterministicAndLowPass) {
  const Graph g = grid_graph(8, 8);
  const Eigen::MatrixXd a = smooth_random_signals(g, 5, 2, 1);
  EXPECT_EQ(a.rows(), 64);
  EXPECT_EQ(a.cols(), 5);
  EXPECT_EQ(a, smooth_random_signals(g, 5, 2, 1));
  EXPECT_NE(a, smooth_random_signals(g, 5, 2, 2));

  const EigenSystem eig = eigendecompose(g);
  const Eigen::MatrixXd spectrum = eig.eigenvectors().transpose() * a;
  const double low = spectrum.topRows(32).squaredNorm();
  const double high = spectrum.bottomRows(32).squaredNorm();
  EXPECT_GT(low, high);
  // Every frequency stays present.
  EXPECT_GT(spectrum.rowwise().squaredNorm().minCoeff(), 0.0);
}

TEST(LeastSquares, ThreeNodePathInterpolatesExactly) {
  const Graph p3 = testing::path_graph(3);
  const EigenSystem eig = eigendecompose(p3);
  Rng rng(1);
  const FilterTask task =
      make_filter_task(p3, eig, TargetFilter::Comb, testing::random_matrix(rng, 3, 2));
  for (const Basis& basis : kBases) {
    const FitResult fit = fit_least_squares(task, eig, correct(eig, 1.0), basis, 2);
    EXPECT_LE(fit.train_mse, 1e-16) << basis_name(basis);
    EXPECT_FALSE(fit.warning.has_value());
  }
}

TEST(LeastSquares, StarFloorAndRestoration) {
  const Graph star = testing::star_graph(3);
  const Eigen::MatrixXd lap = testing::reference_laplacian(star);
  const EigenSystem eig = eigendecompose(star);
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd xhat(4);
    for (Index i = 0; i < 4; ++i) {
      xhat(i) = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
    }
    const Eigen::VectorXd x = eig.eigenvectors() * xhat;
    const Eigen::VectorXd t = testing::random_matrix(rng, 4, 1).col(0);
    const FilterTask task{x, t};
    const double floor = projection_floor(lap, {0.0, 1.0, 2.0}, x, t);
    EXPECT_GT(floor, 1e-6);
    for (const Basis& basis : kBases) {
      for (int order : {2, 3, 6, 10}) {
        const FitResult fit = fit_least_squares(task, eig, correct(eig, 1.0), basis, order);
        EXPECT_GE(fit.train_mse, floor - 1e-8);
        EXPECT_NEAR(fit.train_mse, floor, 1e-8);
      }
      const FitResult restored = fit_least_squares(task, eig, correct(eig, 0.5), basis, 3);
      EXPECT_LE(restored.train_mse, 1e-10) << basis_name(basis);
    }
  }
}

TEST(LeastSquares, RankDeficientDesignWarnsButSolves) {
  const Graph star = testing::star_graph(3);
  const EigenSystem eig = eigendecompose(star);
  const FilterTask task{Eigen::Vector4d(1, 2, 3, 4), Eigen::Vector4d(0.5, 0.1, -0.3, 2)};
  const FitResult fit = fit_least_squares(task, eig, correct(eig, 1.0), GprMonomial{}, 3);
  EXPECT_TRUE(fit.warning.has_value());
  EXPECT_TRUE(fit.model.coeffs().allFinite());
}

TEST(LeastSquares, ExpressivityRestoredWithFullOrder) {
  Rng rng(3);
  const std::vector<Graph> graphs{testing::star_graph(3), testing::path_graph(5),
                                  testing::cycle_graph(6), grid_graph(2, 3)};
  for (const Graph& g : graphs) {
    const Index n = g.num_nodes();
    const EigenSystem eig = eigendecompose(g);
    // Input with every Fourier coefficient nonzero.
    const Eigen::VectorXd xhat = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
    const Eigen::VectorXd x = eig.eigenvectors() * xhat;
    const Eigen::VectorXd t = testing::random_matrix(rng, n, 1).col(0);
    for (const Basis& basis : kBases) {
      const FitResult fit =
          fit_least_squares(FilterTask{x, t}, eig, correct(eig, 0.5), basis, static_cast<int>(n - 1));
      EXPECT_LE(fit.train_mse, 1e-8) << basis_name(basis) << " n=" << n;
    }
  }
}

TEST(LeastSquares, MseNonIncreasingInOrder) {
  const Graph g = grid_graph(5, 5);
  const EigenSystem eig = eigendecompose(g);
  const FilterTask task = make_filter_task(g, eig, TargetFilter::Band, smooth_random_signals(g, 4, 2, 5));
  for (const Basis& basis : kBases) {
    for (const double beta : {1.0, 0.3}) {
      double previous = std::numeric_limits<double>::infinity();
      for (int order = 0; order <= 10; ++order) {
        const double mse = fit_least_squares(task, eig, correct(eig, beta), basis, order).train_mse;
        EXPECT_LE(mse, previous + 1e-12) << basis_name(basis) << " K=" << order;
        previous = mse;
      }
    }
  }
}

TEST(LeastSquares, TrainMseIsMeanOfPerImage) {
  const Graph g = grid_graph(4, 4);
  const EigenSystem eig = eigendecompose(g);
  const FilterTask task = make_filter_task(g, eig, TargetFilter::Comb, smooth_random_signals(g, 6, 1, 9));
  const FitResult fit = fit_least_squares(task, eig, correct(eig, 0.5), Jacobi{}, 5);
  ASSERT_EQ(fit.per_image_mse.size(), 6);
  EXPECT_NEAR(fit.train_mse, fit.per_image_mse.mean(), 1e-12);
}

TEST(Objective, GradientMatchesFiniteDifferences) {
  Rng rng(10);
  for (int trial = 0; trial < 6; ++trial) {
    const Graph g = testing::random_graph(rng, 5, 30);
    const EigenSystem eig = eigendecompose(g);
    const FilterTask task = make_filter_task(g, eig, TargetFilter::Reject,
                                             testing::random_matrix(rng, g.num_nodes(), 3));
    for (const Basis& basis : kBases) {
      const FilterFitObjective objective(task, eig, correct(eig, rng.uniform01()), basis, 6);
      const Eigen::VectorXd alpha = testing::random_matrix(rng, 7, 1).col(0);
      const Eigen::VectorXd grad = objective.gradient(alpha);
      Eigen::VectorXd fd(7);
      const double h = 1e-5;
      for (Index k = 0; k < 7; ++k) {
        Eigen::VectorXd plus = alpha, minus = alpha;
        plus(k) += h;
        minus(k) -= h;
        fd(k) = (objective.loss(plus) - objective.loss(minus)) / (2 * h);
      }
      EXPECT_LE((grad - fd).norm(), 1e-5 * grad.norm()) << basis_name(basis);
      // The loss equals the direct per-image residual mean.
      EXPECT_NEAR(objective.loss(alpha), objective.per_image_mse(alpha).mean(),
                  1e-10 * std::max(1.0, objective.loss(alpha)));
    }
  }
}

struct ConvexInstance {
  const char* name;
  Graph graph;
  double beta;
  int order;
};

std::vector<ConvexInstance> convex_suite() {
  return {{"path3", testing::path_graph(3), 1.0, 2},
          {"star", testing::star_graph(3), 0.5, 3},
          {"grid3x3", grid_graph(3, 3), 0.5, 4},
          {"er20", erdos_renyi(20, 4, 3).graph, 0.3, 3},
          {"er30", erdos_renyi(30, 5, 4).graph, 1.0, 4},
          {"grid4x4", grid_graph(4, 4), 0.0, 5}};
}

TEST(GradientDescent, MatchesLeastSquaresOracle) {
  for (const ConvexInstance& inst : convex_suite()) {
    const EigenSystem eig = eigendecompose(inst.graph);
    const CorrectedSpectrum spec = correct(eig, inst.beta);
    const FilterTask task = make_filter_task(inst.graph, eig, TargetFilter::Band,
                                             smooth_random_signals(inst.graph, 3, 1, 7));
    for (const Basis& basis : kBases) {
      FitConfig config;
      config.basis = basis;
      config.order = inst.order;
      config.max_iters = 200000;
      const FitResult gd = fit_gradient_descent(task, eig, spec, config);
      const FitResult ls = fit_least_squares(task, eig, spec, basis, inst.order);
      EXPECT_NEAR(gd.train_mse, ls.train_mse, 1e-6) << inst.name << " " << basis_name(basis);
    }
  }
}

TEST(GradientDescent, ZeroTargetDrivesCoefficientsToZero) {
  const Graph g = grid_graph(3, 3);
  const EigenSystem eig = eigendecompose(g);
  Rng rng(4);
  const FilterTask task{testing::random_matrix(rng, 9, 2), Eigen::MatrixXd::Zero(9, 2)};
  for (const Basis& basis : kBases) {
    FitConfig config;
    config.basis = basis;
    config.order = 3;
    config.max_iters = 200000;
    const FitResult fit = fit_gradient_descent(task, eig, correct(eig, 0.5), config);
    EXPECT_LE(fit.train_mse, 1e-12) << basis_name(basis);
    EXPECT_LE(fit.model.coeffs().norm(), 1e-4) << basis_name(basis);
  }
}

TEST(GradientDescent, NonnegativeProjectionInactiveAtPositiveOptimum) {
  const Graph star = testing::star_graph(3);
  const EigenSystem eig = eigendecompose(star);
  const CorrectedSpectrum spec = correct(eig, 0.5);
  const Eigen::Vector4d theta(0.5, 1.2, 0.8, 1.5);
  const Eigen::MatrixXd response = basis_matrix(Bernstein{}, as_span(spec.mu), 3) * theta;
  Rng rng(5);
  const Eigen::MatrixXd x = testing::random_matrix(rng, 4, 3);
  const Eigen::MatrixXd& u = eig.eigenvectors();
  const FilterTask task{x, u * response.col(0).asDiagonal() * u.transpose() * x};

  FitConfig config;
  config.basis = Bernstein{};
  config.order = 3;
  config.nonneg = true;
  config.max_iters = 200000;
  const FitResult constrained = fit_gradient_descent(task, eig, spec, config);
  const FitResult oracle = fit_least_squares(task, eig, spec, Bernstein{}, 3);
  EXPECT_NEAR(constrained.train_mse, oracle.train_mse, 1e-6);
  EXPECT_TRUE(constrained.model.coefficients_nonnegative());
  EXPECT_LE((constrained.model.coeffs().col(0) - theta).norm(), 1e-3);
}

TEST(GradientDescent, NonnegativeProjectionHoldsWhenActive) {
  const Graph g = grid_graph(4, 4);
  const EigenSystem eig = eigendecompose(g);
  const FilterTask task = make_filter_task(g, eig, TargetFilter::Comb, smooth_random_signals(g, 3, 1, 2));
  FitConfig config;
  config.basis = Bernstein{};
  config.order = 8;
  config.nonneg = true;
  config.max_iters = 5000;
  EXPECT_TRUE(fit_gradient_descent(task, eig, correct(eig, 0.2), config)
                  .model.coefficients_nonnegative());
}

TEST(GradientDescent, DivergenceIsReported) {
  const Graph g = grid_graph(4, 4);
  const EigenSystem eig = eigendecompose(g);
  const FilterTask task = make_filter_task(g, eig, TargetFilter::Low, smooth_random_signals(g, 2, 1, 3));
  FitConfig config;
  config.scale_by_curvature = false;
  config.learning_rate = 1e3;
  config.order = 6;
  EXPECT_THROW(fit_gradient_descent(task, eig, correct(eig, 1.0), config), DivergedError);
}

TEST(GradientDescent, DeterministicGivenSeed) {
  const Graph g = grid_graph(4, 4);
  const EigenSystem eig = eigendecompose(g);
  const FilterTask task = make_filter_task(g, eig, TargetFilter::Band, smooth_random_signals(g, 2, 1, 3));
  FitConfig config;
  config.max_iters = 3000;
  config.init_jitter = 0.1;
  config.seed = 9;
  const FitResult a = fit_gradient_descent(task, eig, correct(eig, 0.4), config);
  const FitResult b = fit_gradient_descent(task, eig, correct(eig, 0.4), config);
  EXPECT_EQ(a.model.coeffs(), b.model.coeffs());
  EXPECT_EQ(a.train_mse, b.train_mse);
}

TEST(FitConfig, Validation) {
  FitConfig config;
  EXPECT_NO_THROW(validate(config));
  config.order = -1;
  EXPECT_THROW(validate(config), ValidationError);
  config = FitConfig{};
  config.learning_rate = 0.0;
  EXPECT_THROW(validate(config), ValidationError);
  config = FitConfig{};
  config.max_iters = 0;
  EXPECT_THROW(validate(config), ValidationError);
  config = FitConfig{};
  config.basis = Jacobi{-2.0, 0.0};
  EXPECT_THROW(validate(config), ValidationError);
}

FilterExperimentConfig small_experiment() {
  FilterExperimentConfig config;
  config.rows = 4;
  config.cols = 4;
  config.images = 2;
  config.targets = {TargetFilter::Band, TargetFilter::Low};
  config.bases = {GprMonomial{}, Jacobi{}};
  config.beta_grid = {0.0, 0.5};
  config.fit.order = 4;
  config.fit.max_iters = 2000;
  return config;
}

TEST(FilterExperiment, RecordsBaselineAndBest) {
  FilterExperimentConfig config = small_experiment();
  config.with_oracle = true;
  const FilterExperimentReport report = run_filter_experiment(config);
  EXPECT_EQ(report.records.size(), 2u * 2u * 3u);
  EXPECT_EQ(report.summaries.size(), 4u);
  EXPECT_EQ(report.spectrum.n_total, 16);
  for (const FilterRecord& r : report.records) {
    ASSERT_TRUE(r.oracle_mse.has_value());
    EXPECT_GE(r.mse, *r.oracle_mse - 1e-12);
  }
  for (const FilterSummary& s : report.summaries) {
    EXPECT_TRUE(s.best_beta == 0.0 || s.best_beta == 0.5);
    EXPECT_DOUBLE_EQ(s.improvement, (s.baseline_mse - s.best_mse) / s.baseline_mse);
  }
}

TEST(FilterExperiment, Deterministic) {
  const FilterExperimentConfig config = small_experiment();
  std::ostringstream a, b;
  write_filter_report_csv(a, run_filter_experiment(config), false);
  write_filter_report_csv(b, run_filter_experiment(config), false);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "target,basis,beta,K,mse,seconds");
}

TEST(FilterExperiment, SummaryJsonParses) {
  const auto j = nlohmann::json::parse(filter_summary_json(run_filter_experiment(small_experiment())));
  EXPECT_EQ(j.at("summaries").size(), 4u);
  EXPECT_TRUE(j.contains("signals"));
}

TEST(FilterExperiment, Validation) {
  FilterExperimentConfig config = small_experiment();
  config.images = 0;
  EXPECT_THROW(validate(config), ValidationError);
  config = small_experiment();
  config.rows = 1;
  config.cols = 1;
  EXPECT_THROW(validate(config), ValidationError);
  config = small_experiment();
  config.beta_grid = {1.5};
  EXPECT_THROW(validate(config), ValidationError);
  config = small_experiment();
  config.bases.clear();
  EXPECT_THROW(validate(config), ValidationError);
}

}  // namespace
}  // namespace ecgraph
