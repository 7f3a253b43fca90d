#pragma once

// Independent reference implementations. None of these call into the
// library's algorithms; they work from the raw edge list with dense or
// brute-force methods.

#include <cstdint>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "features.hpp"
#include "graph.hpp"

namespace oracle {

using netcontrast::Graph;

/// Dense adjacency built from the edge list: A(u, v) = 1 for an edge u -> v
/// (both directions when undirected). Self-loops dropped.
Eigen::MatrixXd adjacency(const Graph& g);

/// Neighbor set of v by scanning every edge.
std::set<netcontrast::NodeId> scan_neighbors(const Graph& g, netcontrast::NodeId v,
                                             netcontrast::NeighborMode mode);

/// Degree by edge scan; total on a digraph is in + out.
std::vector<double> scan_degree(const Graph& g, netcontrast::DegreeMode mode);

/// Core numbers by literally deleting nodes of degree < k for k = 1, 2, ...
std::vector<int> peeling_kcore(const Graph& g);

/// Floyd-Warshall hop distances; -1 when unreachable.
std::vector<std::vector<int>> hop_distances(const Graph& g);

std::vector<double> harmonic_closeness(const Graph& g);

/// Sum over pairs (s, t) of the fraction of shortest paths through v, with
/// path counts from dynamic programming over the distance matrix.
std::vector<double> path_count_betweenness(const Graph& g);

/// Solves (I - d P^T) x = (1 - d)/n with dangling rows of P set to 1/n.
Eigen::VectorXd pagerank_solve(const Graph& g, double damping = 0.85);

/// Dominant eigenvector of A from a general dense eigensolver, unit norm,
/// non-negative orientation.
Eigen::VectorXd dominant_eigenvector(const Graph& g);

/// (I - alpha A^T)^{-1} beta 1, unit norm.
Eigen::VectorXd katz_solve(const Graph& g, double alpha, double beta = 1.0);

/// Summaries over the scanned neighbor set.
Eigen::VectorXd rfo(const Graph& g, const Eigen::VectorXd& x, netcontrast::RelationalOperator op);

/// Base values from the oracles above for the centrality bases that have an
/// exact oracle (degrees, k-core, closeness, betweenness) or an attribute.
Eigen::VectorXd base_values(const Graph& g, netcontrast::BaseFeature base);

/// Chain applied one operator at a time on top of the given base values.
std::vector<Eigen::VectorXd> compose(const Graph& g, const Eigen::VectorXd& base,
                                     const std::vector<netcontrast::RelationalOperator>& chain);

/// Two-pass textbook covariance with divisor n.
Eigen::MatrixXd two_pass_covariance(const Eigen::MatrixXd& x);

/// Triple-loop product.
Eigen::MatrixXd naive_multiply(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// First k principal axes of x from an SVD of the centered matrix.
Eigen::MatrixXd pca_axes(const Eigen::MatrixXd& x, int k);

/// Centered projection of x on the first k PCA axes.
Eigen::MatrixXd pca_projection(const Eigen::MatrixXd& x, int k);

/// Largest |a_ij - b_ij| after flipping each column of b to best match a.
double max_deviation_up_to_sign(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Pairwise Euclidean distances between rows.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& y);

}  // namespace oracle
