#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stop_token>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "cpca.hpp"
#include "features.hpp"
#include "graph.hpp"
#include "layout.hpp"

namespace netcontrast {

enum class NetworkTag { target, background };

std::string_view to_string(NetworkTag tag);
NetworkTag network_tag_from_string(std::string_view text);

struct SelectionItem {
  NetworkTag network = NetworkTag::target;
  NodeId node = 0;

  friend auto operator<=>(const SelectionItem&, const SelectionItem&) = default;
};

struct PipelineConfig {
  /// Empty bases mean FeatureLearningConfig::defaults for the target's directedness.
  FeatureLearningConfig features;
  /// Unset: pick alpha on `alpha_grid` automatically.
  std::optional<double> alpha;
  std::vector<double> alpha_grid = default_alpha_grid();
  bool standardize = false;
  bool layouts = true;
  LayoutParams layout;
};

void to_json(nlohmann::json& j, const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

/// Per-node values of one feature scaled to [0, 1] over both networks.
struct ScaledPair {
  Eigen::VectorXd target;
  Eigen::VectorXd background;
};

enum class YScale { linear, log };

struct Histogram {
  std::vector<double> centers;
  std::vector<double> target;      // relative frequencies, sum to 1
  std::vector<double> background;
  YScale y_scale = YScale::linear;
};

/// Graphs as the session sees them: shared, immutable, with an optional
/// dataset reference used in snapshots.
struct GraphRef {
  std::string id;
  std::shared_ptr<const Graph> graph;
};

/// The full analysis state. Not internally synchronized: callers serialize
/// mutations per session.
class Session {
 public:
  /// Feature learning on the target, matrices for both, alpha selection,
  /// fit, projection and layouts. Base features that cannot be computed on
  /// either graph are dropped with a warning.
  static Session run_pipeline(std::string id, GraphRef target, GraphRef background, PipelineConfig config,
                              const ProgressFn& progress = {}, std::stop_token stop = {});

  /// Rebuilds a session from a snapshot; graphs are resolved by the caller.
  static Session from_snapshot(const nlohmann::json& snapshot, GraphRef target, GraphRef background);

  const std::string& id() const { return id_; }
  const Graph& target() const { return *target_.graph; }
  const Graph& background() const { return *background_.graph; }
  const GraphRef& target_ref() const { return target_; }
  const GraphRef& background_ref() const { return background_; }
  const PipelineConfig& config() const { return config_; }
  const DefinitionList& definitions() const { return *definitions_; }
  const FeatureMatrix& target_features() const { return x_target_; }
  const FeatureMatrix& background_features() const { return x_background_; }
  const CpcaModel& model() const { return model_; }
  const Embedding& embedding() const { return embedding_; }
  const std::optional<LayoutPositions>& target_layout() const { return layout_target_; }
  const std::optional<LayoutPositions>& background_layout() const { return layout_background_; }
  const std::vector<AlphaScore>& alpha_scores() const { return alpha_scores_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  int current_feature() const { return current_feature_; }
  const std::set<SelectionItem>& selection() const { return selection_; }

  /// Refit at alpha and stabilize signs against the current embedding.
  /// Returns true when a user rotation was discarded.
  bool update_alpha(double alpha);

  /// Rotates so cPC1 follows the line through a and b. Returns theta.
  double rotate_embedding(const Eigen::Vector2d& a, const Eigen::Vector2d& b);

  void select_feature(int definition_id);

  ScaledPair feature_colors(int definition_id) const;

  /// Every computation stage of the feature on one network, each stage
  /// scaled over both networks' values at that stage.
  std::vector<Eigen::VectorXd> feature_stages(int definition_id, NetworkTag which) const;

  /// Shared bins over the union range of the scaled feature values.
  Histogram histogram(int definition_id, int bins = 30, YScale y_scale = YScale::linear) const;

  void set_selection(const std::vector<SelectionItem>& items);

  nlohmann::json snapshot(bool include_matrices = false) const;

 private:
  Session() = default;

  std::size_t column_of(int definition_id) const;
  void refresh_embedding();
  void choose_default_feature();

  std::string id_;
  GraphRef target_;
  GraphRef background_;
  PipelineConfig config_;
  std::shared_ptr<const DefinitionList> definitions_;
  FeatureMatrix x_target_;
  FeatureMatrix x_background_;
  CpcaModel model_;
  Embedding embedding_;
  std::optional<LayoutPositions> layout_target_;
  std::optional<LayoutPositions> layout_background_;
  std::vector<AlphaScore> alpha_scores_;
  std::vector<std::string> warnings_;
  int current_feature_ = 0;
  std::set<SelectionItem> selection_;
};

/// Min-max scaling over the union of two vectors; constant union gives 0.5.
ScaledPair scale_union(const Eigen::VectorXd& target, const Eigen::VectorXd& background);

}  // namespace netcontrast
