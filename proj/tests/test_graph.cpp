#include "ecgraph/errors.hpp"
#include "ecgraph/graph.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace ecgraph {
namespace {

TEST(EdgeList, ParsesSimplePath) {
  const Graph g = from_edge_list("0 1\n1 2");
  EXPECT_EQ(g.num_nodes(), 3);
  ASSERT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1}));
  EXPECT_EQ(g.edges()[1], (Edge{1, 2}));
}

TEST(EdgeList, DeduplicatesReversedPairs) {
  const Graph g = from_edge_list("0 1\n1 0");
  EXPECT_EQ(g.num_nodes(), 2);
  EXPECT_EQ(g.num_edges(), 1u);
}

TEST(EdgeList, IdempotentUnderDuplicationAndReversal) {
  const Graph base = from_edge_list("0 1\n1 2\n2 3\n3 0\n0 2");
  const Graph noisy = from_edge_list("2 0\n0 1\n1 0\n3 2\n2 1\n0 3\n0 1\n3 0\n2 3");
  EXPECT_EQ(base, noisy);
}

TEST(EdgeList, SkipsCommentsAndBlankLines) {
  const Graph g = from_edge_list("# header\n\n0 1\n   \n# 5 6\n1 2\n");
  EXPECT_EQ(g.num_nodes(), 3);
  EXPECT_EQ(g.num_edges(), 2u);
}

TEST(EdgeList, RejectsSelfLoop) { EXPECT_THROW(from_edge_list("0 0"), ValidationError); }

TEST(EdgeList, ReportsLineOfMalformedInput) {
  try {
    from_edge_list("0 1\n# comment\n1 x\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(from_edge_list("0 1 2"), ParseError);
  EXPECT_THROW(from_edge_list("0"), ParseError);
  EXPECT_THROW(from_edge_list("0 -1"), ParseError);
}

TEST(EdgeList, HintAddsIsolatedNodesWhichAreRejected) {
  EXPECT_EQ(from_edge_list("0 1", 2).num_nodes(), 2);
  EXPECT_THROW(from_edge_list("0 1", 3), ValidationError);
}

TEST(EdgeList, RejectsEmptyInput) { EXPECT_THROW(from_edge_list("# nothing\n"), ValidationError); }

TEST(EdgeList, LoadsFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "ecgraph_edges_test.txt";
  {
    std::ofstream out(path);
    out << "# star\n0 1\n0 2\n0 3\n";
  }
  const Graph g = load_edge_list(path);
  EXPECT_EQ(g.num_nodes(), 4);
  EXPECT_EQ(g.num_edges(), 3u);
  std::filesystem::remove(path);
  EXPECT_THROW(load_edge_list(path), ValidationError);
}

TEST(GraphInvariants, RejectsInvalidEdges) {
  EXPECT_THROW(Graph(2, {{0, 2}}), ValidationError);
  EXPECT_THROW(Graph(2, {{1, 1}, {0, 1}}), ValidationError);
  EXPECT_THROW(Graph(3, {{0, 1}}), ValidationError);
  EXPECT_THROW(Graph(0, {}), ValidationError);
}

TEST(GridGraph, SmallCases) {
  const Graph p2 = grid_graph(1, 2);
  EXPECT_EQ(p2.num_nodes(), 2);
  EXPECT_EQ(p2.num_edges(), 1u);
  const Graph c4 = grid_graph(2, 2);
  EXPECT_EQ(c4.num_nodes(), 4);
  EXPECT_EQ(c4.num_edges(), 4u);
  for (const Index d : c4.degrees()) EXPECT_EQ(d, 2);
  EXPECT_EQ(grid_graph(3, 3).num_edges(), 12u);
}

TEST(GridGraph, EdgeCountFormula) {
  for (Index r = 1; r <= 6; ++r) {
    for (Index c = 1; c <= 6; ++c) {
      if (r * c < 2) continue;
      EXPECT_EQ(static_cast<Index>(grid_graph(r, c).num_edges()), 2 * r * c - r - c)
          << r << "x" << c;
    }
  }
}

TEST(GridGraph, RejectsDegenerateSizes) {
  EXPECT_THROW(grid_graph(1, 1), ValidationError);
  EXPECT_THROW(grid_graph(0, 5), ValidationError);
}

TEST(ErdosRenyi, FullDegreeGivesCompleteGraph) {
  const RandomGraph rg = erdos_renyi(100, 99, 3);
  EXPECT_EQ(rg.graph.num_edges(), 100u * 99u / 2u);
  EXPECT_EQ(rg.repaired_nodes, 0u);
}

TEST(ErdosRenyi, DeterministicGivenSeed) {
  EXPECT_EQ(erdos_renyi(300, 4, 11).graph, erdos_renyi(300, 4, 11).graph);
  EXPECT_NE(erdos_renyi(300, 4, 11).graph, erdos_renyi(300, 4, 12).graph);
}

TEST(ErdosRenyi, RepairsIsolatedNodes) {
  // Average degree 1 leaves about e^-1 of the nodes isolated before repair.
  const RandomGraph rg = erdos_renyi(500, 1.0, 5);
  EXPECT_GT(rg.repaired_nodes, 0u);
  for (const Index d : rg.graph.degrees()) EXPECT_GE(d, 1);
}

TEST(ErdosRenyi, EdgeCountNearExpectation) {
  const RandomGraph rg = erdos_renyi(1000, 10, 1);
  const double expected = 1000 * 10 / 2.0;
  EXPECT_NEAR(static_cast<double>(rg.graph.num_edges()), expected, 5 * std::sqrt(expected));
}

TEST(ErdosRenyi, RejectsInfeasibleDegree) {
  EXPECT_THROW(erdos_renyi(10, 10, 0), ValidationError);
  EXPECT_THROW(erdos_renyi(10, 0, 0), ValidationError);
  EXPECT_THROW(erdos_renyi(1, 0.5, 0), ValidationError);
}

TEST(StochasticBlockModel, DenseInsideSparseAcross) {
  const std::vector<Index> sizes{50, 50};
  const RandomGraph rg = stochastic_block_model(sizes, 0.3, 0.0, 2);
  for (const Edge& e : rg.graph.edges()) EXPECT_EQ(e.u < 50, e.v < 50);
  EXPECT_GE(testing::connected_components(rg.graph), 2);
  EXPECT_THROW(stochastic_block_model(sizes, 1.5, 0.0, 2), ValidationError);
}

TEST(NormalizedOperators, TwoNodePath) {
  const auto ops = normalized_operators(grid_graph(1, 2));
  Eigen::Matrix2d expected;
  expected << 1, -1, -1, 1;
  EXPECT_EQ(ops.lap_norm, expected);
}

TEST(NormalizedOperators, FourCycleHasHalfEntries) {
  const auto ops = normalized_operators(grid_graph(2, 2));
  const Graph g = grid_graph(2, 2);
  for (const Edge& e : g.edges()) EXPECT_DOUBLE_EQ(ops.adj_norm(e.u, e.v), 0.5);
}

TEST(NormalizedOperators, ThreeNodePath) {
  const auto ops = normalized_operators(from_edge_list("0 1\n1 2"));
  EXPECT_NEAR(ops.adj_norm(0, 1), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(ops.adj_norm(1, 2), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(ops.adj_norm(0, 2), 0.0);
}

TEST(NormalizedOperators, MatchesReferenceOnRandomGraphs) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = testing::random_graph(rng, 2, 60);
    const auto ops = normalized_operators(g);
    EXPECT_LE((ops.lap_norm - testing::reference_laplacian(g)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(ops.lap_norm, ops.lap_norm.transpose());
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(g.num_nodes(), g.num_nodes());
    EXPECT_LE((ops.lap_norm + ops.adj_norm - identity).cwiseAbs().maxCoeff(), 1e-15);
  }
}

}  // namespace
}  // namespace ecgraph
