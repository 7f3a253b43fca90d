#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"

namespace fixtures {

using netcontrast::Graph;

/// Graph on nodes "0".."n-1" from index pairs.
Graph from_pairs(std::size_t n, const std::vector<std::pair<int, int>>& pairs, bool directed);

Graph path(std::size_t n);
Graph star(std::size_t n);  // node 0 is the center, n nodes in total
Graph complete(std::size_t n);
Graph cycle(std::size_t n, bool directed);

/// Each ordered (directed) or unordered pair is an edge with probability p.
Graph random_graph(std::size_t n, double p, bool directed, std::uint64_t seed);

/// random_graph plus a ring 0 -> 1 -> ... -> 0, so it is (strongly) connected.
Graph random_connected(std::size_t n, double p, bool directed, std::uint64_t seed);

/// Directory holding the bundled and fetched datasets.
std::string data_dir();

/// Loads <name>.edgelist from the data directory, if present.
std::optional<Graph> dataset(const std::string& name, bool directed);

}  // namespace fixtures
