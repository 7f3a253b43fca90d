#include "centrality.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "error.hpp"

namespace netcontrast {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

NodeVector degree(const Graph& graph, DegreeMode mode, bool weighted) {
  const std::size_t n = graph.node_count();
  NodeVector result{mode == DegreeMode::in    ? "in-degree"
                    : mode == DegreeMode::out ? "out-degree"
                                              : "total-degree",
                    Eigen::VectorXd::Zero(idx(n))};
  auto accumulate = [&](NeighborMode nm) {
    for (NodeId v = 0; v < n; ++v) {
      if (weighted) {
        for (double w : graph.neighbor_weights(v, nm)) result.values[v] += w;
      } else {
        result.values[v] += static_cast<double>(graph.neighbors(v, nm).size());
      }
    }
  };
  if (!graph.directed()) {
    accumulate(NeighborMode::all);
  } else if (mode == DegreeMode::in) {
    accumulate(NeighborMode::in);
  } else if (mode == DegreeMode::out) {
    accumulate(NeighborMode::out);
  } else {
    accumulate(NeighborMode::in);
    accumulate(NeighborMode::out);
  }
  return result;
}

NodeVector kcore(const Graph& graph) {
  const std::size_t n = graph.node_count();
  std::vector<std::size_t> deg(n);
  const Eigen::VectorXd total = degree(graph, DegreeMode::total).values;
  std::size_t max_deg = 0;
  for (std::size_t v = 0; v < n; ++v) {
    deg[v] = static_cast<std::size_t>(total[idx(v)]);
    max_deg = std::max(max_deg, deg[v]);
  }

  // Batagelj-Zaversnik: nodes sorted by degree, buckets addressed by bin[].
  std::vector<std::size_t> bin(max_deg + 1, 0);
  for (auto d : deg) ++bin[d];
  std::size_t start = 0;
  for (auto& b : bin) {
    const std::size_t count = b;
    b = start;
    start += count;
  }
  std::vector<std::size_t> pos(n);
  std::vector<NodeId> order(n);
  for (NodeId v = 0; v < n; ++v) {
    pos[v] = bin[deg[v]]++;
    order[pos[v]] = v;
  }
  for (std::size_t d = max_deg; d > 0; --d) bin[d] = bin[d - 1];
  if (!bin.empty()) bin[0] = 0;

  auto lower = [&](NodeId u, std::size_t current) {
    if (deg[u] <= current) return;
    const std::size_t du = deg[u];
    const std::size_t pu = pos[u];
    const std::size_t pw = bin[du];
    const NodeId w = order[pw];
    if (u != w) {
      std::swap(order[pu], order[pw]);
      pos[u] = pw;
      pos[w] = pu;
    }
    ++bin[du];
    --deg[u];
  };

  for (std::size_t i = 0; i < n; ++i) {
    const NodeId v = order[i];
    if (graph.directed()) {
      for (NodeId u : graph.neighbors(v, NeighborMode::in)) lower(u, deg[v]);
      for (NodeId u : graph.neighbors(v, NeighborMode::out)) lower(u, deg[v]);
    } else {
      for (NodeId u : graph.neighbors(v, NeighborMode::all)) lower(u, deg[v]);
    }
  }

  NodeVector result{"k-core", Eigen::VectorXd(idx(n))};
  for (std::size_t v = 0; v < n; ++v) result.values[idx(v)] = static_cast<double>(deg[v]);
  return result;
}

NodeVector pagerank(const Graph& graph, const PageRankOptions& options) {
  const std::size_t n = graph.node_count();
  if (n == 0) fail(ErrorCode::invalid_argument, "pagerank needs at least one node");
  if (options.damping < 0.0 || options.damping >= 1.0)
    fail(ErrorCode::invalid_argument, "pagerank damping must lie in [0, 1)");

  const NeighborMode out = graph.directed() ? NeighborMode::out : NeighborMode::all;
  std::vector<double> out_strength(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    if (options.weighted) {
      for (double w : graph.neighbor_weights(v, out)) out_strength[v] += w;
    } else {
      out_strength[v] = static_cast<double>(graph.neighbors(v, out).size());
    }
  }

  const double d = options.damping;
  const double nd = static_cast<double>(n);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(idx(n), 1.0 / nd);
  Eigen::VectorXd next(idx(n));
  for (int iter = 0; iter < options.max_iter; ++iter) {
    double dangling = 0.0;
    next.setZero();
    for (NodeId u = 0; u < n; ++u) {
      const double xu = x[u];
      if (out_strength[u] <= 0.0) {
        dangling += xu;
        continue;
      }
      auto targets = graph.neighbors(u, out);
      auto weights = graph.neighbor_weights(u, out);
      for (std::size_t k = 0; k < targets.size(); ++k) {
        const double share = options.weighted ? weights[k] / out_strength[u] : 1.0 / out_strength[u];
        next[targets[k]] += xu * share;
      }
    }
    next = (d * next).array() + (d * dangling + (1.0 - d)) / nd;
    const double change = (next - x).cwiseAbs().sum();
    x.swap(next);
    if (change < options.tol) return {"pagerank", x};
  }
  throw ConvergenceError("pagerank did not converge in " + std::to_string(options.max_iter) +
                             " iterations",
                         to_std(x));
}

NodeVector eigenvector_centrality(const Graph& graph, const EigenvectorOptions& options) {
  const std::size_t n = graph.node_count();
  if (graph.proper_edge_count() == 0)
    fail(ErrorCode::numerical, "eigenvector centrality is undefined on a graph without edges");

  const NeighborMode out = graph.directed() ? NeighborMode::out : NeighborMode::all;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(idx(n), 1.0 / std::sqrt(static_cast<double>(n)));
  Eigen::VectorXd next(idx(n));
  for (int iter = 0; iter < options.max_iter; ++iter) {
    next = x;
    for (NodeId v = 0; v < n; ++v) {
      auto targets = graph.neighbors(v, out);
      auto weights = graph.neighbor_weights(v, out);
      double acc = 0.0;
      for (std::size_t k = 0; k < targets.size(); ++k)
        acc += (options.weighted ? weights[k] : 1.0) * x[targets[k]];
      next[v] += acc;
    }
    const double norm = next.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      fail(ErrorCode::numerical, "eigenvector centrality collapsed to the zero vector");
    next /= norm;
    const double change = (next - x).cwiseAbs().sum();
    x.swap(next);
    if (change < options.tol) {
      if (x.sum() < 0.0) x = -x;
      return {"eigenvector", x};
    }
  }
  throw ConvergenceError(
      "eigenvector centrality did not converge in " + std::to_string(options.max_iter) +
          " iterations; the dominant eigenvalue is not unique (try Katz centrality)",
      to_std(x));
}

namespace {

// Iterative Tarjan over out-neighbors. Returns component id per node.
std::vector<std::size_t> strongly_connected_components(const Graph& graph, std::size_t& count) {
  const std::size_t n = graph.node_count();
  const NeighborMode out = graph.directed() ? NeighborMode::out : NeighborMode::all;
  constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeId> stack;
  std::vector<std::pair<NodeId, std::size_t>> call;
  std::size_t next_index = 0;
  count = 0;
  for (NodeId root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, child] = call.back();
      auto nbrs = graph.neighbors(v, out);
      if (child < nbrs.size()) {
        const NodeId w = nbrs[child++];
        if (index[w] == unvisited) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const NodeId done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != done);
        ++count;
      }
    }
  }
  return comp;
}

}  // namespace

double spectral_radius_estimate(const Graph& graph, bool weighted, double tol, int max_iter) {
  const std::size_t n = graph.node_count();
  if (graph.proper_edge_count() == 0) return 0.0;
  const NeighborMode out = graph.directed() ? NeighborMode::out : NeighborMode::all;
  std::size_t count = 0;
  const auto comp = strongly_connected_components(graph, count);
  std::vector<std::vector<NodeId>> members(count);
  for (NodeId v = 0; v < n; ++v) members[comp[v]].push_back(v);

  double rho = 0.0;
  std::vector<double> x(n, 0.0), y(n, 0.0);
  for (std::size_t c = 0; c < count; ++c) {
    const auto& nodes = members[c];
    if (nodes.size() < 2) continue;
    for (NodeId v : nodes) x[v] = 1.0;
    double upper = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      double norm = 0.0;
      for (NodeId v : nodes) {
        double acc = x[v];
        auto targets = graph.neighbors(v, out);
        auto weights = graph.neighbor_weights(v, out);
        for (std::size_t k = 0; k < targets.size(); ++k)
          if (comp[targets[k]] == c) acc += (weighted ? weights[k] : 1.0) * x[targets[k]];
        y[v] = acc;
        lo = std::min(lo, acc / x[v]);
        hi = std::max(hi, acc / x[v]);
        norm = std::max(norm, acc);
      }
      upper = hi;
      for (NodeId v : nodes) x[v] = y[v] / norm;
      if (hi - lo <= tol * hi) break;
    }
    rho = std::max(rho, upper - 1.0);
  }
  return rho;
}

NodeVector katz_centrality(const Graph& graph, const KatzOptions& options) {
  const std::size_t n = graph.node_count();
  if (options.beta == 0.0) fail(ErrorCode::invalid_argument, "katz beta must be non-zero");
  const double rho = spectral_radius_estimate(graph, options.weighted);
  double attenuation = 0.0;
  if (options.attenuation) {
    attenuation = *options.attenuation;
    if (attenuation < 0.0) fail(ErrorCode::invalid_argument, "katz attenuation must be non-negative");
    if (rho > 0.0 && attenuation >= 1.0 / rho)
      fail(ErrorCode::invalid_argument,
           "katz attenuation " + std::to_string(attenuation) + " must stay below 1/rho = " +
               std::to_string(1.0 / rho));
  } else {
    attenuation = rho > 0.0 ? 0.9 / rho : 0.1;
  }

  const NeighborMode in = graph.directed() ? NeighborMode::in : NeighborMode::all;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(idx(n), options.beta);
  Eigen::VectorXd next(idx(n));
  for (int iter = 0; iter < options.max_iter; ++iter) {
    for (NodeId v = 0; v < n; ++v) {
      auto sources = graph.neighbors(v, in);
      auto weights = graph.neighbor_weights(v, in);
      double acc = 0.0;
      for (std::size_t k = 0; k < sources.size(); ++k)
        acc += (options.weighted ? weights[k] : 1.0) * x[sources[k]];
      next[v] = attenuation * acc + options.beta;
    }
    const double change = (next - x).cwiseAbs().sum();
    const double scale = next.cwiseAbs().sum();
    x.swap(next);
    if (!std::isfinite(scale)) break;
    if (change <= options.tol * scale) {
      const double norm = x.norm();
      if (x.sum() < 0.0) x = -x;
      return {"katz", x / norm};
    }
  }
  throw ConvergenceError("katz centrality did not converge in " + std::to_string(options.max_iter) +
                             " iterations",
                         to_std(x));
}

NodeVector closeness(const Graph& graph) {
  const std::size_t n = graph.node_count();
  const NeighborMode out = graph.directed() ? NeighborMode::out : NeighborMode::all;
  NodeVector result{"closeness", Eigen::VectorXd::Zero(idx(n))};
  if (n < 2) return result;
  std::vector<std::size_t> dist(n);
  std::vector<NodeId> queue(n);
  constexpr std::size_t unreached = std::numeric_limits<std::size_t>::max();
  for (NodeId s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), unreached);
    dist[s] = 0;
    std::size_t head = 0, tail = 0;
    queue[tail++] = s;
    double acc = 0.0;
    while (head < tail) {
      const NodeId v = queue[head++];
      for (NodeId w : graph.neighbors(v, out)) {
        if (dist[w] != unreached) continue;
        dist[w] = dist[v] + 1;
        acc += 1.0 / static_cast<double>(dist[w]);
        queue[tail++] = w;
      }
    }
    result.values[s] = acc / static_cast<double>(n - 1);
  }
  return result;
}

NodeVector betweenness(const Graph& graph) {
  const std::size_t n = graph.node_count();
  const NeighborMode out = graph.directed() ? NeighborMode::out : NeighborMode::all;
  NodeVector result{"betweenness", Eigen::VectorXd::Zero(idx(n))};
  std::vector<double> sigma(n), delta(n);
  std::vector<long long> dist(n);
  std::vector<NodeId> order;
  order.reserve(n);
  std::vector<NodeId> queue(n);
  for (NodeId s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::size_t head = 0, tail = 0;
    queue[tail++] = s;
    while (head < tail) {
      const NodeId v = queue[head++];
      order.push_back(v);
      for (NodeId w : graph.neighbors(v, out)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue[tail++] = w;
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    // Predecessors of w are the in-neighbors one level closer to s.
    const NeighborMode in = graph.directed() ? NeighborMode::in : NeighborMode::all;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeId w = *it;
      for (NodeId v : graph.neighbors(w, in)) {
        if (dist[v] >= 0 && dist[v] + 1 == dist[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) result.values[w] += delta[w];
    }
  }
  if (!graph.directed()) result.values /= 2.0;
  return result;
}

}  // namespace netcontrast
