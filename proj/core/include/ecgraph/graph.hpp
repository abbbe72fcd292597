#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ecgraph {

using Index = Eigen::Index;

/// Undirected edge stored with u < v.
struct Edge {
  Index u = 0;
  Index v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph with 0-based nodes.
///
/// Construction canonicalizes the edge set (orders each pair, sorts and
/// deduplicates) and enforces the invariants every normalized operator relies
/// on: endpoints in range, no self-loops, and no isolated nodes so that the
/// degree matrix is invertible.
class Graph {
 public:
  Graph(Index num_nodes, std::vector<Edge> edges);

  Index num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const std::vector<Index>& degrees() const noexcept { return degrees_; }

  Eigen::MatrixXd adjacency() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  Index num_nodes_;
  std::vector<Edge> edges_;
  std::vector<Index> degrees_;
};

/// Parses edge-list text: one edge per line as two whitespace-separated
/// non-negative integers; blank lines and lines starting with '#' are skipped.
/// The node count is max index + 1, or n_hint when that is larger.
Graph from_edge_list(std::string_view text, std::optional<Index> n_hint = std::nullopt);

Graph load_edge_list(const std::filesystem::path& path,
                     std::optional<Index> n_hint = std::nullopt);

/// 4-neighbour grid; node id is row * cols + col.
Graph grid_graph(Index rows, Index cols);

/// A sampled graph plus the number of isolated nodes that had to be repaired
/// by attaching one uniformly random edge.
struct RandomGraph {
  Graph graph;
  std::size_t repaired_nodes = 0;
};

/// G(n, p) with p = avg_degree / (n - 1). avg_degree == n - 1 yields the
/// complete graph.
RandomGraph erdos_renyi(Index n, double avg_degree, std::uint64_t seed);

/// Planted-partition graph: pairs in the same block connect with p_in,
/// pairs across blocks with p_out. Node ids are assigned block by block.
RandomGraph stochastic_block_model(std::span<const Index> block_sizes, double p_in,
                                   double p_out, std::uint64_t seed);

struct NormalizedOperators {
  Eigen::MatrixXd adj_norm;  // D^{-1/2} A D^{-1/2}
  Eigen::MatrixXd lap_norm;  // I - adj_norm
};

NormalizedOperators normalized_operators(const Graph& g);

}  // namespace ecgraph
