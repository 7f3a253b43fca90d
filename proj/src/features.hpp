#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "centrality.hpp"
#include "graph.hpp"

namespace netcontrast {

enum class BaseKind {
  in_degree,
  out_degree,
  total_degree,
  kcore,
  pagerank,
  eigenvector,
  katz,
  closeness,
  betweenness,
  attribute,
};

struct BaseFeature {
  BaseKind kind = BaseKind::total_degree;
  int attribute = -1;  // column index, only for BaseKind::attribute

  friend bool operator==(const BaseFeature&, const BaseFeature&) = default;
  friend auto operator<=>(const BaseFeature&, const BaseFeature&) = default;
};

enum class Summary { mean, sum, max, l2norm };
enum class Direction { in, out, all };

/// One relational step: summarize a value over a node's one-hop neighbors.
struct RelationalOperator {
  Summary summary = Summary::mean;
  Direction direction = Direction::all;

  friend bool operator==(const RelationalOperator&, const RelationalOperator&) = default;
  friend auto operator<=>(const RelationalOperator&, const RelationalOperator&) = default;
};

/// A base feature followed by relational operators in computation order:
/// chain[0] is applied to the base values first.
struct FeatureDefinition {
  int id = 0;
  BaseFeature base;
  std::vector<RelationalOperator> chain;

  friend bool operator==(const FeatureDefinition&, const FeatureDefinition&) = default;
};

using DefinitionList = std::vector<FeatureDefinition>;

/// Values for n nodes x d shared definitions. Paired target/background
/// matrices point at the same definition list object.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::shared_ptr<const DefinitionList> definitions;
};

std::string to_string(BaseFeature base);
BaseFeature base_feature_from_string(std::string_view text);
std::string_view to_string(Summary summary);
Summary summary_from_string(std::string_view text);
std::string_view to_string(Direction direction);
Direction direction_from_string(std::string_view text);

/// Readable name in composition notation, e.g. "sum+(sum(mean-(total-degree)))".
std::string describe(const FeatureDefinition& def);

void to_json(nlohmann::json& j, const FeatureDefinition& def);
FeatureDefinition feature_definition_from_json(const nlohmann::json& j);

NodeVector compute_base(const Graph& graph, BaseFeature base);

/// out[v] = summary over values of neighbors(v, direction); 0 when empty.
NodeVector apply_rfo(const Graph& graph, const NodeVector& values, RelationalOperator op);

struct FeatureEvaluation {
  NodeVector final;
  std::vector<NodeVector> stages;  // stages[0] = base, one more per operator
};

FeatureEvaluation evaluate_feature(const Graph& graph, const FeatureDefinition& def);

/// Logarithmic binning of ranks: the lowest ceil(f*n) values get bin 0, the
/// next ceil(f*remaining) bin 1, and so on. Tied values share the bin of the
/// first of them.
std::vector<int> log_binning(const Eigen::VectorXd& values, double bin_fraction = 0.5);

/// Fraction of nodes whose bins agree.
double bin_agreement(const std::vector<int>& a, const std::vector<int>& b);

struct FeatureLearningConfig {
  std::vector<BaseFeature> bases;
  std::vector<Summary> summaries;
  std::vector<Direction> directions;
  int max_hops = 2;
  double prune_threshold = 0.9;
  double bin_fraction = 0.5;

  /// Study defaults for a target graph of the given directedness.
  static FeatureLearningConfig defaults(bool directed);
};

struct FeatureLearningResult {
  DefinitionList definitions;
  /// Candidates generated per layer, before pruning (layer 0 = bases).
  std::vector<std::size_t> candidates_per_layer;
  /// Survivors added per layer.
  std::vector<std::size_t> survivors_per_layer;
};

using ProgressFn = std::function<void(std::string_view phase, double fraction)>;

/// Layer-wise candidate generation and pruning on the target graph only.
FeatureLearningResult learn_features(const Graph& target, const FeatureLearningConfig& config,
                                     const ProgressFn& progress = {}, std::stop_token stop = {});

/// Evaluates every definition on both graphs. Never re-runs selection.
std::pair<FeatureMatrix, FeatureMatrix> build_feature_matrices(
    std::shared_ptr<const DefinitionList> definitions, const Graph& target, const Graph& background);

/// Memoizes base features and operator-chain prefixes for one graph.
class FeatureEvaluator {
 public:
  explicit FeatureEvaluator(const Graph& graph) : graph_(graph) {}

  const Eigen::VectorXd& base(BaseFeature base);
  /// Values after the first `depth` operators of def.chain.
  const Eigen::VectorXd& prefix(const FeatureDefinition& def, std::size_t depth);
  const Eigen::VectorXd& values(const FeatureDefinition& def) { return prefix(def, def.chain.size()); }

 private:
  using Key = std::pair<BaseFeature, std::vector<RelationalOperator>>;
  const Graph& graph_;
  std::map<Key, Eigen::VectorXd> cache_;
};

}  // namespace netcontrast
