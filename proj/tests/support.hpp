#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's spectral or basis code.

#include "ecgraph/graph.hpp"
#include "ecgraph/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

namespace ecgraph::testing {

inline int connected_components(const Graph& g) {
  const auto n = static_cast<std::size_t>(g.num_nodes());
  std::vector<std::vector<Index>> adj(n);
  for (const Edge& e : g.edges()) {
    adj[static_cast<std::size_t>(e.u)].push_back(e.v);
    adj[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  std::vector<bool> seen(n, false);
  int components = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    ++components;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    seen[start] = true;
    while (!frontier.empty()) {
      const auto v = frontier.front();
      frontier.pop();
      for (const Index w : adj[v]) {
        const auto wi = static_cast<std::size_t>(w);
        if (!seen[wi]) {
          seen[wi] = true;
          frontier.push(wi);
        }
      }
    }
  }
  return components;
}

// L = I - D^{-1/2} A D^{-1/2} built entry by entry from the edge list.
inline Eigen::MatrixXd reference_laplacian(const Graph& g) {
  const Index n = g.num_nodes();
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (const Edge& e : g.edges()) {
    degree(e.u) += 1.0;
    degree(e.v) += 1.0;
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
  for (const Edge& e : g.edges()) {
    const double w = 1.0 / std::sqrt(degree(e.u) * degree(e.v));
    lap(e.u, e.v) -= w;
    lap(e.v, e.u) -= w;
  }
  return lap;
}

// Closed-form normalized Laplacian spectra, ascending.
inline std::vector<double> path_spectrum(int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(1.0 - std::cos(std::numbers::pi * k / (n - 1)));
  return v;
}

inline std::vector<double> cycle_spectrum(int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(1.0 - std::cos(2.0 * std::numbers::pi * k / n));
  std::sort(v.begin(), v.end());
  return v;
}

inline std::vector<double> star_spectrum(int leaves) {
  std::vector<double> v{0.0};
  for (int i = 0; i < leaves - 1; ++i) v.push_back(1.0);
  v.push_back(2.0);
  return v;
}

inline Graph path_graph(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return Graph(n, edges);
}

inline Graph cycle_graph(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return Graph(n, edges);
}

inline Graph star_graph(Index leaves) {
  std::vector<Edge> edges;
  for (Index i = 1; i <= leaves; ++i) edges.push_back({0, i});
  return Graph(leaves + 1, edges);
}

inline Graph complete_graph(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) edges.push_back({i, j});
  }
  return Graph(n, edges);
}

// Random graph for property tests: Erdos-Renyi with n in [lo, hi] and an
// average degree drawn from [1, min(n - 1, 12)].
inline Graph random_graph(Rng& rng, Index lo, Index hi) {
  const Index n = lo + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
  const double max_degree = std::min<double>(static_cast<double>(n - 1), 12.0);
  const double degree = max_degree <= 1.0 ? max_degree : rng.uniform(1.0, max_degree);
  return erdos_renyi(n, degree, rng.next_u64()).graph;
}

inline Eigen::MatrixXd random_matrix(Rng& rng, Index rows, Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

inline double legendre(int degree, double x) {
  switch (degree) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return (3 * x * x - 1) / 2;
    case 3: return (5 * x * x * x - 3 * x) / 2;
    case 4: return (35 * std::pow(x, 4) - 30 * x * x + 3) / 8;
    case 5: return (63 * std::pow(x, 5) - 70 * std::pow(x, 3) + 15 * x) / 8;
    default: return std::nan("");
  }
}

// Generalized binomial coefficient C(z, k) for real z.
inline double binomial(double z, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c *= (z - k + i) / i;
  return c;
}

// Explicit sum form of the Jacobi polynomial P_n^{(a,b)}(x).
inline double jacobi_explicit(int n, double a, double b, double x) {
  double sum = 0.0;
  for (int s = 0; s <= n; ++s) {
    sum += binomial(n + a, n - s) * binomial(n + b, s) * std::pow((x - 1) / 2, s) *
           std::pow((x + 1) / 2, n - s);
  }
  return sum;
}

// Orthogonal projector onto the eigenspace of `lap` for eigenvalue `value`,
// built from an independent Eigen decomposition. Projectors do not depend on
// how a solver orders vectors inside a tie group.
inline Eigen::MatrixXd eigenspace_projector(const Eigen::MatrixXd& lap, double value, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  const Index n = lap.rows();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    if (std::abs(solver.eigenvalues()(i) - value) <= tol) {
      p += solver.eigenvectors().col(i) * solver.eigenvectors().col(i).transpose();
    }
  }
  return p;
}

}  // namespace ecgraph::testing
