#include "ecgraph/correction.hpp"
#include "ecgraph/filters.hpp"
#include "ecgraph/graph.hpp"
#include "ecgraph/random.hpp"
#include "ecgraph/spectral.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ecgraph;

Eigen::MatrixXd gaussian(Rng& rng, Index rows, Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

struct Fixture {
  EigenSystem eig;
  CorrectedSpectrum spec;
  Eigen::MatrixXd op;
  Eigen::MatrixXd x;
  Eigen::MatrixXd w;

  explicit Fixture(Index n)
      : eig(eigendecompose(erdos_renyi(n, 10, 1).graph)), spec(correct(eig, 0.5)),
        op(corrected_operator(eig, spec)) {
    Rng rng(2);
    x = gaussian(rng, n, 64);
    w = gaussian(rng, 64, 16);
  }
};

const Fixture& fixture(Index n) {
  static const Fixture small(250);
  static const Fixture large(1000);
  return n == 250 ? small : large;
}

void BM_EigenvalueRoute(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const int order = static_cast<int>(state.range(1));
  const FilterModel model(Jacobi{}, order, Eigen::MatrixXd::Ones(order + 1, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_filter(f.eig, model, as_span(f.spec.mu), f.x, f.w));
  }
}
BENCHMARK(BM_EigenvalueRoute)->ArgsProduct({{250, 1000}, {2, 10}})->Unit(benchmark::kMillisecond);

void BM_MatrixRoute(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  const int order = static_cast<int>(state.range(1));
  const FilterModel model(Jacobi{}, order, Eigen::MatrixXd::Ones(order + 1, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_filter_matrix_form(f.op, model, f.x, f.w));
  }
}
BENCHMARK(BM_MatrixRoute)->ArgsProduct({{250, 1000}, {2, 10}})->Unit(benchmark::kMillisecond);

void BM_Eigendecompose(benchmark::State& state) {
  const Eigen::MatrixXd lap =
      normalized_operators(erdos_renyi(state.range(0), 10, 3).graph).lap_norm;
  for (auto _ : state) benchmark::DoNotOptimize(eigendecompose(lap));
}
BENCHMARK(BM_Eigendecompose)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
