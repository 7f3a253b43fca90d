#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace netcontrast {

using NodeId = std::uint32_t;

enum class NeighborMode { in, out, all };

std::string_view to_string(NeighborMode mode);
NeighborMode neighbor_mode_from_string(std::string_view text);

struct Edge {
  NodeId source = 0;
  NodeId target = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Node attribute matrix: one row per node, one named column per attribute.
struct AttributeTable {
  std::vector<std::string> names;
  Eigen::MatrixXd values;

  bool empty() const { return names.empty(); }
};

/// Immutable node-link structure with dense node indices 0..n-1.
///
/// Duplicate input edges are collapsed with their weights summed. For
/// undirected graphs (u, v) and (v, u) are the same edge and it is stored once
/// with source <= target. Self-loops stay in the edge list but never show up
/// in neighbor sets or degrees.
class Graph {
 public:
  Graph() = default;
  Graph(bool directed, std::vector<std::string> labels, std::vector<Edge> edges,
        AttributeTable attributes = {});

  bool directed() const noexcept { return directed_; }
  std::size_t node_count() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const std::string& label(NodeId v) const;
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<NodeId> find(std::string_view label) const;

  /// Sorted, duplicate-free neighbor set. Throws on out-of-range v.
  std::span<const NodeId> neighbors(NodeId v, NeighborMode mode) const;

  /// Edge weights aligned with neighbors(v, mode) for in/out. For `all` on a
  /// directed graph a reciprocal pair reports the sum of both directions.
  std::span<const double> neighbor_weights(NodeId v, NeighborMode mode) const;

  const AttributeTable& attributes() const noexcept { return attributes_; }
  bool has_attributes() const noexcept { return !attributes_.empty(); }
  std::size_t attribute_count() const noexcept { return attributes_.names.size(); }

  /// Copy of this graph with an attribute table attached.
  Graph with_attributes(AttributeTable attributes) const;

  /// Number of non-loop edges.
  std::size_t proper_edge_count() const noexcept { return proper_edges_; }

 private:
  struct Adjacency {
    std::vector<std::size_t> offsets;
    std::vector<NodeId> targets;
    std::vector<double> weights;
  };

  const Adjacency& adjacency(NeighborMode mode) const;
  void check_node(NodeId v) const;

  bool directed_ = false;
  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  AttributeTable attributes_;
  std::unordered_map<std::string, NodeId> index_;
  Adjacency out_;
  Adjacency in_;
  Adjacency all_;
  std::size_t proper_edges_ = 0;
};

struct EdgeListOptions {
  bool directed = false;
  char delimiter = 0;  // 0: split on whitespace and commas
  bool has_weights = false;
  char comment_prefix = '#';
};

/// Parses `source target [weight]` lines. Node tokens are arbitrary strings
/// mapped to indices in order of first appearance. A `# nodes: a b c` comment
/// pre-registers labels, so isolated nodes survive a write/read cycle.
Graph load_edge_list(std::string_view text, const EdgeListOptions& options = {});

/// Header row of attribute names (the first cell names the key column), then
/// one row per node keyed by its label.
Graph load_attributes(const Graph& graph, std::string_view csv);

/// Edge-list text that load_edge_list reads back to the same graph.
std::string write_edge_list(const Graph& graph);

void to_json(nlohmann::json& j, const Graph& graph);
Graph graph_from_json(const nlohmann::json& j);

std::string read_text_file(const std::string& path);

/// Shortest text that reads back to the same double.
std::string format_double(double value);

}  // namespace netcontrast
