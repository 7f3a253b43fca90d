#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "graph.hpp"

namespace netcontrast {

/// Per-node measure aligned with the owning graph's node indices.
struct NodeVector {
  std::string name;
  Eigen::VectorXd values;
};

enum class DegreeMode { in, out, total };

/// Self-loops do not count. Total degree on a digraph is in + out.
NodeVector degree(const Graph& graph, DegreeMode mode, bool weighted = false);

/// Core numbers by bucket peeling on total degree.
NodeVector kcore(const Graph& graph);

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-9;
  int max_iter = 200;
  bool weighted = false;
};

/// Power iteration with uniform redistribution of dangling mass. Stops once
/// the L1 change between iterates drops below tol.
NodeVector pagerank(const Graph& graph, const PageRankOptions& options = {});

struct EigenvectorOptions {
  double tol = 1e-9;
  int max_iter = 1000;
  bool weighted = false;
};

/// Dominant right eigenvector of the adjacency matrix (x_v sums over the
/// out-neighbors of v), unit L2 norm, non-negative. Iterates with A + I so
/// connected bipartite graphs converge too.
NodeVector eigenvector_centrality(const Graph& graph, const EigenvectorOptions& options = {});

struct KatzOptions {
  /// Unset: 0.9 / estimated spectral radius (0.1 when the graph is acyclic).
  std::optional<double> attenuation;
  double beta = 1.0;
  double tol = 1e-9;
  int max_iter = 1000;
  bool weighted = false;
};

/// Solves x = attenuation * A^T x + beta * 1 by fixed-point iteration and
/// returns it with unit L2 norm.
NodeVector katz_centrality(const Graph& graph, const KatzOptions& options = {});

/// Spectral radius of the (optionally weighted) adjacency matrix, estimated
/// per strongly connected component with Collatz-Wielandt bounds. Returns the
/// upper bound, so 1/rho is a safe cap for Katz attenuation.
double spectral_radius_estimate(const Graph& graph, bool weighted = false, double tol = 1e-10,
                                int max_iter = 5000);

/// Harmonic closeness: sum of 1/dist(v, u) over reachable u != v, divided by
/// n - 1. Distances follow edge direction on digraphs.
NodeVector closeness(const Graph& graph);

/// Unnormalized Brandes betweenness over unweighted shortest paths. On
/// undirected graphs each unordered pair is counted once.
NodeVector betweenness(const Graph& graph);

}  // namespace netcontrast
