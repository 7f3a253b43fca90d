#include "features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "error.hpp"

namespace netcontrast {

namespace {

constexpr std::pair<BaseKind, std::string_view> kBaseNames[] = {
    {BaseKind::in_degree, "in-degree"},     {BaseKind::out_degree, "out-degree"},
    {BaseKind::total_degree, "total-degree"}, {BaseKind::kcore, "k-core"},
    {BaseKind::pagerank, "pagerank"},       {BaseKind::eigenvector, "eigenvector"},
    {BaseKind::katz, "katz"},               {BaseKind::closeness, "closeness"},
    {BaseKind::betweenness, "betweenness"},
};

NeighborMode to_mode(Direction d) {
  switch (d) {
    case Direction::in: return NeighborMode::in;
    case Direction::out: return NeighborMode::out;
    case Direction::all: return NeighborMode::all;
  }
  return NeighborMode::all;
}

}  // namespace

std::string to_string(BaseFeature base) {
  if (base.kind == BaseKind::attribute) return "attribute:" + std::to_string(base.attribute);
  for (const auto& [kind, name] : kBaseNames)
    if (kind == base.kind) return std::string(name);
  return "unknown";
}

BaseFeature base_feature_from_string(std::string_view text) {
  constexpr std::string_view attr = "attribute:";
  if (text.substr(0, attr.size()) == attr) {
    const std::string digits(text.substr(attr.size()));
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
      fail(ErrorCode::invalid_argument, "bad attribute base '" + std::string(text) + "'");
    return {BaseKind::attribute, std::stoi(digits)};
  }
  for (const auto& [kind, name] : kBaseNames)
    if (name == text) return {kind, -1};
  if (text == "degree") return {BaseKind::total_degree, -1};
  fail(ErrorCode::invalid_argument, "unknown base feature '" + std::string(text) + "'");
}

std::string_view to_string(Summary summary) {
  switch (summary) {
    case Summary::mean: return "mean";
    case Summary::sum: return "sum";
    case Summary::max: return "max";
    case Summary::l2norm: return "l2norm";
  }
  return "mean";
}

Summary summary_from_string(std::string_view text) {
  if (text == "mean") return Summary::mean;
  if (text == "sum") return Summary::sum;
  if (text == "max") return Summary::max;
  if (text == "l2norm" || text == "l2") return Summary::l2norm;
  fail(ErrorCode::invalid_argument, "unknown summary '" + std::string(text) + "'");
}

std::string_view to_string(Direction direction) { return to_string(to_mode(direction)); }

Direction direction_from_string(std::string_view text) {
  switch (neighbor_mode_from_string(text)) {
    case NeighborMode::in: return Direction::in;
    case NeighborMode::out: return Direction::out;
    case NeighborMode::all: return Direction::all;
  }
  return Direction::all;
}

std::string describe(const FeatureDefinition& def) {
  std::string text = to_string(def.base);
  for (const auto& op : def.chain) {
    text = std::string(to_string(op.summary)) + "_" + std::string(to_string(op.direction)) + "(" +
           text + ")";
  }
  return text;
}

void to_json(nlohmann::json& j, const FeatureDefinition& def) {
  nlohmann::json chain = nlohmann::json::array();
  for (const auto& op : def.chain)
    chain.push_back({{"summary", to_string(op.summary)}, {"direction", to_string(op.direction)}});
  j = {{"id", def.id}, {"base", to_string(def.base)}, {"chain", std::move(chain)}};
}

FeatureDefinition feature_definition_from_json(const nlohmann::json& j) {
  try {
    FeatureDefinition def;
    def.id = j.at("id").get<int>();
    def.base = base_feature_from_string(j.at("base").get<std::string>());
    for (const auto& op : j.at("chain"))
      def.chain.push_back({summary_from_string(op.at("summary").get<std::string>()),
                           direction_from_string(op.at("direction").get<std::string>())});
    return def;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse_error, std::string("malformed feature definition: ") + e.what());
  }
}

NodeVector compute_base(const Graph& graph, BaseFeature base) {
  switch (base.kind) {
    case BaseKind::in_degree: return degree(graph, DegreeMode::in);
    case BaseKind::out_degree: return degree(graph, DegreeMode::out);
    case BaseKind::total_degree: return degree(graph, DegreeMode::total);
    case BaseKind::kcore: return kcore(graph);
    case BaseKind::pagerank: return pagerank(graph);
    case BaseKind::eigenvector: return eigenvector_centrality(graph);
    case BaseKind::katz: return katz_centrality(graph);
    case BaseKind::closeness: return closeness(graph);
    case BaseKind::betweenness: return betweenness(graph);
    case BaseKind::attribute: {
      if (base.attribute < 0 || static_cast<std::size_t>(base.attribute) >= graph.attribute_count())
        fail(ErrorCode::invalid_argument,
             "attribute " + std::to_string(base.attribute) + " out of range (graph has " +
                 std::to_string(graph.attribute_count()) + ")");
      const auto& attrs = graph.attributes();
      return {attrs.names[static_cast<std::size_t>(base.attribute)], attrs.values.col(base.attribute)};
    }
  }
  fail(ErrorCode::internal, "unhandled base feature");
}

NodeVector apply_rfo(const Graph& graph, const NodeVector& values, RelationalOperator op) {
  const std::size_t n = graph.node_count();
  if (static_cast<std::size_t>(values.values.size()) != n)
    fail(ErrorCode::invalid_argument, "value vector length does not match the graph");
  const NeighborMode mode = to_mode(op.direction);
  NodeVector out{std::string(to_string(op.summary)) + "_" + std::string(to_string(op.direction)) +
                     "(" + values.name + ")",
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))};
  for (NodeId v = 0; v < n; ++v) {
    auto nbrs = graph.neighbors(v, mode);
    if (nbrs.empty()) continue;
    double acc = 0.0;
    switch (op.summary) {
      case Summary::sum:
      case Summary::mean:
        for (NodeId u : nbrs) acc += values.values[u];
        if (op.summary == Summary::mean) acc /= static_cast<double>(nbrs.size());
        break;
      case Summary::max:
        acc = values.values[nbrs.front()];
        for (NodeId u : nbrs) acc = std::max(acc, values.values[u]);
        break;
      case Summary::l2norm:
        for (NodeId u : nbrs) acc += values.values[u] * values.values[u];
        acc = std::sqrt(acc);
        break;
    }
    out.values[v] = acc;
  }
  return out;
}

FeatureEvaluation evaluate_feature(const Graph& graph, const FeatureDefinition& def) {
  FeatureEvaluation result;
  result.stages.push_back(compute_base(graph, def.base));
  for (const auto& op : def.chain) result.stages.push_back(apply_rfo(graph, result.stages.back(), op));
  result.final = result.stages.back();
  return result;
}

std::vector<int> log_binning(const Eigen::VectorXd& values, double bin_fraction) {
  if (!(bin_fraction > 0.0 && bin_fraction < 1.0))
    fail(ErrorCode::invalid_argument, "bin_fraction must lie strictly between 0 and 1");
  const std::size_t n = static_cast<std::size_t>(values.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<int> bins(n, 0);
  std::size_t assigned = 0;
  int bin = 0;
  while (assigned < n) {
    const std::size_t remaining = n - assigned;
    std::size_t take = static_cast<std::size_t>(std::ceil(bin_fraction * static_cast<double>(remaining)));
    take = std::clamp<std::size_t>(take, 1, remaining);
    for (std::size_t k = assigned; k < assigned + take; ++k) bins[order[k]] = bin;
    assigned += take;
    ++bin;
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (values[order[k]] == values[order[k - 1]]) bins[order[k]] = bins[order[k - 1]];
  }
  return bins;
}

double bin_agreement(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) fail(ErrorCode::invalid_argument, "bin vectors differ in length");
  if (a.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

FeatureLearningConfig FeatureLearningConfig::defaults(bool directed) {
  FeatureLearningConfig config;
  config.bases.push_back({BaseKind::total_degree, -1});
  if (directed) {
    config.bases.push_back({BaseKind::in_degree, -1});
    config.bases.push_back({BaseKind::out_degree, -1});
  }
  config.bases.push_back({BaseKind::kcore, -1});
  config.bases.push_back({BaseKind::pagerank, -1});
  config.bases.push_back({BaseKind::eigenvector, -1});
  config.bases.push_back({BaseKind::katz, -1});
  config.summaries = {Summary::mean, Summary::sum, Summary::max};
  if (directed)
    config.directions = {Direction::in, Direction::out, Direction::all};
  else
    config.directions = {Direction::all};
  return config;
}

const Eigen::VectorXd& FeatureEvaluator::base(BaseFeature b) {
  Key key{b, {}};
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(std::move(key), compute_base(graph_, b).values).first->second;
}

const Eigen::VectorXd& FeatureEvaluator::prefix(const FeatureDefinition& def, std::size_t depth) {
  if (depth == 0) return base(def.base);
  Key key{def.base, std::vector<RelationalOperator>(def.chain.begin(),
                                                    def.chain.begin() + static_cast<std::ptrdiff_t>(depth))};
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  NodeVector parent{"", prefix(def, depth - 1)};
  auto values = apply_rfo(graph_, parent, def.chain[depth - 1]).values;
  return cache_.emplace(std::move(key), std::move(values)).first->second;
}

namespace {

struct Candidate {
  FeatureDefinition def;
  std::vector<std::size_t> order_key;  // chain length, base position, op positions
  Eigen::VectorXd values;
  std::vector<int> bins;
};

void check_stop(const std::stop_token& stop) {
  if (stop.stop_requested()) fail(ErrorCode::cancelled, "feature learning cancelled");
}

// Connected components of the "agreement >= threshold" graph; returns the
// index of the smallest-key member of each component, in candidate order.
std::vector<std::size_t> component_representatives(const std::vector<Candidate>& cands,
                                                   double threshold) {
  const std::size_t k = cands.size();
  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      if (find(a) != find(b) && bin_agreement(cands[a].bins, cands[b].bins) >= threshold)
        parent[find(a)] = find(b);

  std::map<std::size_t, std::size_t> best;  // root -> candidate index
  for (std::size_t a = 0; a < k; ++a) {
    auto [it, inserted] = best.emplace(find(a), a);
    if (!inserted && cands[a].order_key < cands[it->second].order_key) it->second = a;
  }
  std::vector<std::size_t> reps;
  for (const auto& [root, index] : best) reps.push_back(index);
  std::sort(reps.begin(), reps.end(),
            [&](std::size_t a, std::size_t b) { return cands[a].order_key < cands[b].order_key; });
  return reps;
}

}  // namespace

FeatureLearningResult learn_features(const Graph& target, const FeatureLearningConfig& config,
                                     const ProgressFn& progress, std::stop_token stop) {
  if (config.bases.empty()) fail(ErrorCode::invalid_argument, "feature learning needs at least one base");
  if (config.max_hops < 0) fail(ErrorCode::invalid_argument, "max_hops must be non-negative");
  if (config.max_hops > 0 && (config.summaries.empty() || config.directions.empty()))
    fail(ErrorCode::invalid_argument, "relational operators need at least one summary and direction");

  std::vector<RelationalOperator> ops;
  for (auto s : config.summaries)
    for (auto d : config.directions) ops.push_back({s, d});

  FeatureEvaluator evaluator(target);
  FeatureLearningResult result;
  std::vector<Candidate> survivors;
  std::vector<Candidate> frontier;

  auto report = [&](int layer) {
    if (progress)
      progress("feature_learning", static_cast<double>(layer + 1) / static_cast<double>(config.max_hops + 1));
  };

  std::vector<Candidate> layer;
  for (std::size_t b = 0; b < config.bases.size(); ++b) {
    Candidate c;
    c.def.base = config.bases[b];
    c.order_key = {0, b};
    layer.push_back(std::move(c));
  }

  for (int hop = 0; hop <= config.max_hops; ++hop) {
    check_stop(stop);
    if (hop > 0) {
      layer.clear();
      for (const auto& parent : frontier) {
        for (std::size_t o = 0; o < ops.size(); ++o) {
          Candidate c;
          c.def.base = parent.def.base;
          c.def.chain = parent.def.chain;
          c.def.chain.push_back(ops[o]);
          c.order_key = parent.order_key;
          c.order_key[0] = static_cast<std::size_t>(hop);
          c.order_key.push_back(o);
          layer.push_back(std::move(c));
        }
      }
    }
    result.candidates_per_layer.push_back(layer.size());

    std::vector<Candidate> fresh;
    for (auto& c : layer) {
      check_stop(stop);
      c.values = evaluator.values(c.def);
      c.bins = log_binning(c.values, config.bin_fraction);
      const bool redundant = std::any_of(survivors.begin(), survivors.end(), [&](const Candidate& s) {
        return bin_agreement(s.bins, c.bins) >= config.prune_threshold;
      });
      if (!redundant) fresh.push_back(std::move(c));
    }
    frontier.clear();
    for (std::size_t index : component_representatives(fresh, config.prune_threshold))
      frontier.push_back(fresh[index]);
    result.survivors_per_layer.push_back(frontier.size());
    survivors.insert(survivors.end(), frontier.begin(), frontier.end());
    report(hop);
    if (frontier.empty()) {
      for (int rest = hop + 1; rest <= config.max_hops; ++rest) {
        result.candidates_per_layer.push_back(0);
        result.survivors_per_layer.push_back(0);
      }
      break;
    }
  }

  if (survivors.empty()) fail(ErrorCode::internal, "feature learning produced no features");
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    survivors[i].def.id = static_cast<int>(i);
    result.definitions.push_back(std::move(survivors[i].def));
  }
  return result;
}

std::pair<FeatureMatrix, FeatureMatrix> build_feature_matrices(
    std::shared_ptr<const DefinitionList> definitions, const Graph& target, const Graph& background) {
  if (!definitions) fail(ErrorCode::invalid_argument, "no feature definitions");
  std::vector<std::string> offending;
  for (const auto& def : *definitions) {
    if (def.base.kind != BaseKind::attribute) continue;
    const auto j = static_cast<std::size_t>(def.base.attribute);
    if (def.base.attribute < 0 || j >= target.attribute_count() || j >= background.attribute_count())
      offending.push_back("F" + std::to_string(def.id) + " " + describe(def));
  }
  if (!offending.empty()) {
    std::string message = "feature definitions not computable on both graphs:";
    for (const auto& o : offending) message += " [" + o + "]";
    fail(ErrorCode::invalid_argument, message);
  }

  auto fill = [&](const Graph& graph) {
    FeatureEvaluator evaluator(graph);
    FeatureMatrix m;
    m.definitions = definitions;
    m.values.resize(static_cast<Eigen::Index>(graph.node_count()),
                    static_cast<Eigen::Index>(definitions->size()));
    for (std::size_t j = 0; j < definitions->size(); ++j)
      m.values.col(static_cast<Eigen::Index>(j)) = evaluator.values((*definitions)[j]);
    if (!m.values.allFinite()) fail(ErrorCode::numerical, "feature matrix contains non-finite values");
    return m;
  };
  return {fill(target), fill(background)};
}

}  // namespace netcontrast
