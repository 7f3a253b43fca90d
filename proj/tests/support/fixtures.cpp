#include "fixtures.hpp"

#include <cstdlib>
#include <filesystem>

#include "rng.hpp"

namespace fixtures {

using netcontrast::Edge;
using netcontrast::NodeId;

namespace {

std::vector<std::string> labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

}  // namespace

Graph from_pairs(std::size_t n, const std::vector<std::pair<int, int>>& pairs, bool directed) {
  std::vector<Edge> edges;
  for (auto [u, v] : pairs) edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), 1.0});
  return Graph(directed, labels(n), std::move(edges));
}

Graph path(std::size_t n) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i + 1 < n; ++i) pairs.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  return from_pairs(n, pairs, false);
}

Graph star(std::size_t n) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 1; i < n; ++i) pairs.emplace_back(0, static_cast<int>(i));
  return from_pairs(n, pairs, false);
}

Graph complete(std::size_t n) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return from_pairs(n, pairs, false);
}

Graph cycle(std::size_t n, bool directed) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(static_cast<int>(i), static_cast<int>((i + 1) % n));
  return from_pairs(n, pairs, directed);
}

Graph random_graph(std::size_t n, double p, bool directed, std::uint64_t seed) {
  netcontrast::Rng rng(seed);
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = directed ? 0 : i + 1; j < n; ++j)
      if (i != j && rng.uniform() < p) pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return from_pairs(n, pairs, directed);
}

Graph random_connected(std::size_t n, double p, bool directed, std::uint64_t seed) {
  const Graph base = random_graph(n, p, directed, seed);
  std::vector<std::pair<int, int>> pairs;
  for (const auto& e : base.edges()) pairs.emplace_back(static_cast<int>(e.source), static_cast<int>(e.target));
  for (std::size_t i = 0; i < n && n > 1; ++i)
    pairs.emplace_back(static_cast<int>(i), static_cast<int>((i + 1) % n));
  return from_pairs(n, pairs, directed);
}

std::string data_dir() {
  if (const char* env = std::getenv("NETCONTRAST_DATA_DIR")) return env;
  return NETCONTRAST_TEST_DATA_DIR;
}

std::optional<Graph> dataset(const std::string& name, bool directed) {
  const std::filesystem::path file = std::filesystem::path(data_dir()) / (name + ".edgelist");
  if (!std::filesystem::exists(file)) return std::nullopt;
  netcontrast::EdgeListOptions options;
  options.directed = directed;
  return netcontrast::load_edge_list(netcontrast::read_text_file(file.string()), options);
}

}  // namespace fixtures
