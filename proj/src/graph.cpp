#include "graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "error.hpp"

namespace netcontrast {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::numerical: return "numerical_error";
    case ErrorCode::io: return "io_error";
    case ErrorCode::cancelled: return "cancelled";
    case ErrorCode::limit: return "limit_exceeded";
    case ErrorCode::internal: return "internal_error";
  }
  return "internal_error";
}

std::string_view to_string(NeighborMode mode) {
  switch (mode) {
    case NeighborMode::in: return "in";
    case NeighborMode::out: return "out";
    case NeighborMode::all: return "all";
  }
  return "all";
}

NeighborMode neighbor_mode_from_string(std::string_view text) {
  if (text == "in") return NeighborMode::in;
  if (text == "out") return NeighborMode::out;
  if (text == "all" || text == "total") return NeighborMode::all;
  fail(ErrorCode::invalid_argument, "unknown neighbor mode '" + std::string(text) + "'");
}

namespace {

struct PendingArc {
  NodeId from;
  NodeId to;
  double weight;
};

// CSR from arcs; parallel arcs (possible for `all` on digraphs) get merged.
void build_adjacency(std::size_t n, std::vector<PendingArc> arcs, std::vector<std::size_t>& offsets,
                     std::vector<NodeId>& targets, std::vector<double>& weights) {
  std::sort(arcs.begin(), arcs.end(), [](const PendingArc& a, const PendingArc& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  offsets.assign(n + 1, 0);
  targets.clear();
  weights.clear();
  targets.reserve(arcs.size());
  weights.reserve(arcs.size());
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const auto& a = arcs[i];
    if (!targets.empty() && i > 0 && arcs[i - 1].from == a.from && arcs[i - 1].to == a.to) {
      weights.back() += a.weight;
      continue;
    }
    targets.push_back(a.to);
    weights.push_back(a.weight);
    ++offsets[a.from + 1];
  }
  for (std::size_t v = 0; v < n; ++v) offsets[v + 1] += offsets[v];
}

}  // namespace

Graph::Graph(bool directed, std::vector<std::string> labels, std::vector<Edge> edges,
             AttributeTable attributes)
    : directed_(directed), labels_(std::move(labels)), attributes_(std::move(attributes)) {
  const std::size_t n = labels_.size();
  for (std::size_t v = 0; v < n; ++v) {
    if (!index_.emplace(labels_[v], static_cast<NodeId>(v)).second)
      fail(ErrorCode::invalid_argument, "duplicate node label '" + labels_[v] + "'");
  }
  if (!attributes_.empty() && static_cast<std::size_t>(attributes_.values.rows()) != n)
    fail(ErrorCode::invalid_argument, "attribute matrix must have one row per node");
  if (!attributes_.empty() &&
      static_cast<std::size_t>(attributes_.values.cols()) != attributes_.names.size())
    fail(ErrorCode::invalid_argument, "attribute names do not match attribute columns");

  std::map<std::pair<NodeId, NodeId>, double> merged;
  for (const auto& e : edges) {
    if (e.source >= n || e.target >= n)
      fail(ErrorCode::invalid_argument, "edge endpoint out of range");
    auto key = std::make_pair(e.source, e.target);
    if (!directed_ && key.first > key.second) std::swap(key.first, key.second);
    merged[key] += e.weight;
  }
  edges_.reserve(merged.size());
  std::vector<PendingArc> out_arcs;
  std::vector<PendingArc> in_arcs;
  for (const auto& [key, w] : merged) {
    edges_.push_back({key.first, key.second, w});
    if (key.first == key.second) continue;
    ++proper_edges_;
    out_arcs.push_back({key.first, key.second, w});
    in_arcs.push_back({key.second, key.first, w});
  }

  if (!directed_) {
    std::vector<PendingArc> arcs = out_arcs;
    arcs.insert(arcs.end(), in_arcs.begin(), in_arcs.end());
    build_adjacency(n, std::move(arcs), all_.offsets, all_.targets, all_.weights);
    return;
  }
  std::vector<PendingArc> all_arcs = out_arcs;
  all_arcs.insert(all_arcs.end(), in_arcs.begin(), in_arcs.end());
  build_adjacency(n, std::move(out_arcs), out_.offsets, out_.targets, out_.weights);
  build_adjacency(n, std::move(in_arcs), in_.offsets, in_.targets, in_.weights);
  build_adjacency(n, std::move(all_arcs), all_.offsets, all_.targets, all_.weights);
}

const std::string& Graph::label(NodeId v) const {
  check_node(v);
  return labels_[v];
}

std::optional<NodeId> Graph::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Graph::check_node(NodeId v) const {
  if (v >= labels_.size())
    fail(ErrorCode::invalid_argument,
         "node index " + std::to_string(v) + " out of range (n=" + std::to_string(labels_.size()) + ")");
}

const Graph::Adjacency& Graph::adjacency(NeighborMode mode) const {
  if (!directed_) return all_;
  switch (mode) {
    case NeighborMode::in: return in_;
    case NeighborMode::out: return out_;
    case NeighborMode::all: return all_;
  }
  return all_;
}

std::span<const NodeId> Graph::neighbors(NodeId v, NeighborMode mode) const {
  check_node(v);
  const auto& adj = adjacency(mode);
  return std::span<const NodeId>(adj.targets).subspan(adj.offsets[v], adj.offsets[v + 1] - adj.offsets[v]);
}

std::span<const double> Graph::neighbor_weights(NodeId v, NeighborMode mode) const {
  check_node(v);
  const auto& adj = adjacency(mode);
  return std::span<const double>(adj.weights).subspan(adj.offsets[v], adj.offsets[v + 1] - adj.offsets[v]);
}

Graph Graph::with_attributes(AttributeTable attributes) const {
  return Graph(directed_, labels_, edges_, std::move(attributes));
}

// ---------------------------------------------------------------------------
// Text formats

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  auto is_sep = [delimiter](char c) {
    if (delimiter != 0) return c == delimiter;
    return c == ' ' || c == '\t' || c == ',' || c == '\r';
  };
  std::size_t i = 0;
  while (i < line.size()) {
    if (delimiter == 0) {
      while (i < line.size() && is_sep(line[i])) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !is_sep(line[j])) ++j;
      fields.push_back(line.substr(i, j - i));
      i = j;
    } else {
      std::size_t j = line.find(delimiter, i);
      if (j == std::string_view::npos) j = line.size();
      fields.push_back(line.substr(i, j - i));
      i = j + 1;
      if (j == line.size()) break;
    }
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    f(line_no, text.substr(pos, end - pos));
    if (end == text.size()) break;
    pos = end + 1;
  }
}

}  // namespace

Graph load_edge_list(std::string_view text, const EdgeListOptions& options) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> index;
  std::vector<Edge> edges;
  auto intern = [&](std::string_view token) {
    std::string key(token);
    auto [it, inserted] = index.emplace(key, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(std::move(key));
    return it->second;
  };

  const std::string_view nodes_directive = "nodes:";
  for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    std::string_view line = trim(raw);
    if (line.empty()) return;
    if (options.comment_prefix != 0 && line.front() == options.comment_prefix) {
      std::string_view body = trim(line.substr(1));
      if (body.substr(0, nodes_directive.size()) == nodes_directive) {
        for (auto token : split_fields(body.substr(nodes_directive.size()), 0)) intern(token);
      }
      return;
    }
    auto fields = split_fields(line, options.delimiter);
    for (auto& f : fields) f = trim(f);
    const bool count_ok = options.has_weights ? (fields.size() == 2 || fields.size() == 3)
                                              : fields.size() == 2;
    if (!count_ok)
      fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                       (options.has_weights ? "2 or 3" : "2") + " fields, got " +
                                       std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty())
      fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": empty node token");
    double weight = 1.0;
    if (fields.size() == 3) {
      auto parsed = parse_double(fields[2]);
      if (!parsed)
        fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": non-numeric weight '" +
                                         std::string(fields[2]) + "'");
      weight = *parsed;
    }
    const NodeId s = intern(fields[0]);
    const NodeId t = intern(fields[1]);
    edges.push_back({s, t, weight});
  });
  if (labels.empty()) fail(ErrorCode::parse_error, "edge list is empty");
  return Graph(options.directed, std::move(labels), std::move(edges));
}

Graph load_attributes(const Graph& graph, std::string_view csv) {
  std::vector<std::string> names;
  bool header_seen = false;
  const std::size_t n = graph.node_count();
  std::vector<std::vector<double>> rows(n);
  std::vector<bool> seen(n, false);
  std::size_t row_count = 0;

  for_each_line(csv, [&](std::size_t line_no, std::string_view raw) {
    std::string_view line = trim(raw);
    if (line.empty()) return;
    auto fields = split_fields(line, ',');
    for (auto& f : fields) f = trim(f);
    if (!header_seen) {
      if (fields.size() < 2)
        fail(ErrorCode::parse_error, "attribute header needs a key column and at least one attribute");
      for (std::size_t i = 1; i < fields.size(); ++i) names.emplace_back(fields[i]);
      header_seen = true;
      return;
    }
    if (fields.size() != names.size() + 1)
      fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(names.size() + 1) + " cells");
    auto node = graph.find(fields[0]);
    if (!node)
      fail(ErrorCode::not_found, "line " + std::to_string(line_no) + ": unknown node label '" +
                                     std::string(fields[0]) + "'");
    if (seen[*node])
      fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": duplicate node label '" +
                                       std::string(fields[0]) + "'");
    seen[*node] = true;
    ++row_count;
    auto& row = rows[*node];
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto value = parse_double(fields[i]);
      if (!value)
        fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": non-numeric cell '" +
                                         std::string(fields[i]) + "'");
      row.push_back(*value);
    }
  });
  if (!header_seen) fail(ErrorCode::parse_error, "attribute CSV is empty");
  if (row_count != n)
    fail(ErrorCode::invalid_argument, "attribute CSV has " + std::to_string(row_count) +
                                          " rows but the graph has " + std::to_string(n) + " nodes");

  AttributeTable table;
  table.names = std::move(names);
  table.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(table.names.size()));
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t j = 0; j < table.names.size(); ++j)
      table.values(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(j)) = rows[v][j];
  return graph.with_attributes(std::move(table));
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string write_edge_list(const Graph& graph) {
  std::ostringstream out;
  out << "# netcontrast edge list v1\n";
  out << "# directed: " << (graph.directed() ? "true" : "false") << "\n";
  out << "# nodes:";
  for (const auto& label : graph.labels()) out << ' ' << label;
  out << "\n";
  bool weighted = std::any_of(graph.edges().begin(), graph.edges().end(),
                              [](const Edge& e) { return e.weight != 1.0; });
  for (const auto& e : graph.edges()) {
    out << graph.labels()[e.source] << ' ' << graph.labels()[e.target];
    if (weighted) out << ' ' << format_double(e.weight);
    out << '\n';
  }
  return out.str();
}

void to_json(nlohmann::json& j, const Graph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t v = 0; v < graph.node_count(); ++v)
    nodes.push_back({{"id", v}, {"label", graph.labels()[v]}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : graph.edges()) edges.push_back({e.source, e.target, e.weight});
  j = {{"directed", graph.directed()}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  if (graph.has_attributes()) {
    const auto& attrs = graph.attributes();
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < attrs.values.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < attrs.values.cols(); ++c) row.push_back(attrs.values(r, c));
      rows.push_back(std::move(row));
    }
    j["attributes"] = {{"names", attrs.names}, {"values", std::move(rows)}};
  }
}

Graph graph_from_json(const nlohmann::json& j) {
  try {
    const bool directed = j.at("directed").get<bool>();
    std::vector<std::string> labels;
    for (const auto& node : j.at("nodes")) {
      if (node.at("id").get<std::size_t>() != labels.size())
        fail(ErrorCode::parse_error, "graph JSON node ids must be dense and ordered");
      labels.push_back(node.at("label").get<std::string>());
    }
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges"))
      edges.push_back({e.at(0).get<NodeId>(), e.at(1).get<NodeId>(), e.at(2).get<double>()});
    AttributeTable attrs;
    if (j.contains("attributes")) {
      const auto& a = j.at("attributes");
      attrs.names = a.at("names").get<std::vector<std::string>>();
      const auto& rows = a.at("values");
      attrs.values.resize(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(attrs.names.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != attrs.names.size())
          fail(ErrorCode::parse_error, "graph JSON attribute row has wrong width");
        for (std::size_t c = 0; c < attrs.names.size(); ++c)
          attrs.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              rows[r][c].get<double>();
      }
    }
    return Graph(directed, std::move(labels), std::move(edges), std::move(attrs));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse_error, std::string("malformed graph JSON: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace netcontrast
