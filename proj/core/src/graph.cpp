#include "ecgraph/graph.hpp"

#include "ecgraph/errors.hpp"
#include "ecgraph/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace ecgraph {

Graph::Graph(Index num_nodes, std::vector<Edge> edges)
    : num_nodes_(num_nodes), edges_(std::move(edges)) {
  if (num_nodes_ <= 0) throw ValidationError("graph must have at least one node");
  for (Edge& e : edges_) {
    if (e.u < 0 || e.v < 0 || e.u >= num_nodes_ || e.v >= num_nodes_) {
      throw ValidationError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                            ") has an endpoint outside [0, " + std::to_string(num_nodes_) +
                            ")");
    }
    if (e.u == e.v) {
      throw ValidationError("self-loop on node " + std::to_string(e.u));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  degrees_.assign(static_cast<std::size_t>(num_nodes_), 0);
  for (const Edge& e : edges_) {
    ++degrees_[static_cast<std::size_t>(e.u)];
    ++degrees_[static_cast<std::size_t>(e.v)];
  }
  const auto isolated = std::find(degrees_.begin(), degrees_.end(), 0);
  if (isolated != degrees_.end()) {
    throw ValidationError("node " + std::to_string(isolated - degrees_.begin()) +
                          " is isolated; the normalized Laplacian needs every degree >= 1");
  }
}

Eigen::MatrixXd Graph::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(num_nodes_, num_nodes_);
  for (const Edge& e : edges_) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_blank(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_blank(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

Index parse_node(std::string_view token, std::size_t line_no) {
  if (!token.empty() && token.front() == '-') {
    throw ParseError(line_no, "negative node index '" + std::string(token) + "'");
  }
  Index value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(line_no, "expected a non-negative integer, got '" + std::string(token) + "'");
  }
  return value;
}

void repair_isolated(Index n, std::vector<Edge>& edges, Rng& rng, std::size_t& repaired) {
  std::vector<Index> degree(static_cast<std::size_t>(n), 0);
  for (const Edge& e : edges) {
    ++degree[static_cast<std::size_t>(e.u)];
    ++degree[static_cast<std::size_t>(e.v)];
  }
  for (Index v = 0; v < n; ++v) {
    if (degree[static_cast<std::size_t>(v)] > 0) continue;
    // Uniform over the n - 1 other nodes.
    auto u = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n - 1)));
    if (u >= v) ++u;
    edges.push_back({std::min(u, v), std::max(u, v)});
    ++degree[static_cast<std::size_t>(u)];
    ++degree[static_cast<std::size_t>(v)];
    ++repaired;
  }
}

}  // namespace

Graph from_edge_list(std::string_view text, std::optional<Index> n_hint) {
  std::vector<Edge> edges;
  Index max_index = -1;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    const auto tokens = split_tokens(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 2) {
      throw ParseError(line_no, "expected two node indices, found " +
                                    std::to_string(tokens.size()) + " tokens");
    }
    const Index u = parse_node(tokens[0], line_no);
    const Index v = parse_node(tokens[1], line_no);
    if (u == v) throw ValidationError("line " + std::to_string(line_no) + ": self-loop on node " +
                                      std::to_string(u));
    edges.push_back({u, v});
    max_index = std::max({max_index, u, v});
  }
  Index n = max_index + 1;
  if (n_hint) {
    if (*n_hint < 0) throw ValidationError("node-count hint must be non-negative");
    n = std::max(n, *n_hint);
  }
  if (n == 0) throw ValidationError("edge list contains no edges");
  return Graph(n, std::move(edges));
}

Graph load_edge_list(const std::filesystem::path& path, std::optional<Index> n_hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open edge list '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_edge_list(buffer.str(), n_hint);
}

Graph grid_graph(Index rows, Index cols) {
  if (rows <= 0 || cols <= 0 || rows * cols < 2) {
    throw ValidationError("grid needs positive dimensions with at least 2 nodes");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2 * rows * cols));
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const Index id = r * cols + c;
      if (c + 1 < cols) edges.push_back({id, id + 1});
      if (r + 1 < rows) edges.push_back({id, id + cols});
    }
  }
  return Graph(rows * cols, std::move(edges));
}

RandomGraph erdos_renyi(Index n, double avg_degree, std::uint64_t seed) {
  if (n < 2) throw ValidationError("random graph needs at least 2 nodes");
  if (!(avg_degree > 0.0) || avg_degree > static_cast<double>(n - 1)) {
    throw ValidationError("average degree must lie in (0, n-1]; got " +
                          std::to_string(avg_degree) + " for n=" + std::to_string(n));
  }
  const double p = avg_degree / static_cast<double>(n - 1);
  Rng rng(seed);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(avg_degree * static_cast<double>(n) / 2.0 * 1.1) + 16);
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      if (rng.uniform01() < p) edges.push_back({u, v});
    }
  }
  std::size_t repaired = 0;
  repair_isolated(n, edges, rng, repaired);
  return {Graph(n, std::move(edges)), repaired};
}

RandomGraph stochastic_block_model(std::span<const Index> block_sizes, double p_in,
                                   double p_out, std::uint64_t seed) {
  if (block_sizes.empty()) throw ValidationError("need at least one block");
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    throw ValidationError("block probabilities must lie in [0, 1]");
  }
  std::vector<Index> block_of;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    if (block_sizes[b] <= 0) throw ValidationError("block sizes must be positive");
    block_of.insert(block_of.end(), static_cast<std::size_t>(block_sizes[b]),
                    static_cast<Index>(b));
  }
  const auto n = static_cast<Index>(block_of.size());
  if (n < 2) throw ValidationError("random graph needs at least 2 nodes");

  Rng rng(seed);
  std::vector<Edge> edges;
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      const double p = block_of[static_cast<std::size_t>(u)] == block_of[static_cast<std::size_t>(v)]
                           ? p_in
                           : p_out;
      if (rng.uniform01() < p) edges.push_back({u, v});
    }
  }
  std::size_t repaired = 0;
  repair_isolated(n, edges, rng, repaired);
  return {Graph(n, std::move(edges)), repaired};
}

NormalizedOperators normalized_operators(const Graph& g) {
  const Index n = g.num_nodes();
  Eigen::VectorXd inv_sqrt_degree(n);
  for (Index i = 0; i < n; ++i) {
    inv_sqrt_degree(i) = 1.0 / std::sqrt(static_cast<double>(g.degrees()[static_cast<std::size_t>(i)]));
  }
  NormalizedOperators ops{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Identity(n, n)};
  for (const Edge& e : g.edges()) {
    const double w = inv_sqrt_degree(e.u) * inv_sqrt_degree(e.v);
    ops.adj_norm(e.u, e.v) = w;
    ops.adj_norm(e.v, e.u) = w;
    ops.lap_norm(e.u, e.v) = -w;
    ops.lap_norm(e.v, e.u) = -w;
  }
  return ops;
}

}  // namespace ecgraph
