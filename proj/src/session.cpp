#include "session.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "error.hpp"

namespace netcontrast {

std::string_view to_string(NetworkTag tag) { return tag == NetworkTag::target ? "target" : "background"; }

NetworkTag network_tag_from_string(std::string_view text) {
  if (text == "target" || text == "T") return NetworkTag::target;
  if (text == "background" || text == "B") return NetworkTag::background;
  fail(ErrorCode::invalid_argument, "unknown network tag '" + std::string(text) + "'");
}

namespace {

template <typename T, typename F>
nlohmann::json string_list(const std::vector<T>& items, F&& name) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& item : items) out.push_back(std::string(name(item)));
  return out;
}

nlohmann::json rows_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd rows_from_json(const nlohmann::json& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != cols) fail(ErrorCode::parse_error, "ragged matrix in snapshot");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

// Runs one pipeline phase and labels any failure with the phase name.
template <typename F>
auto phase(std::string_view name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::cancelled) throw;
    throw Error(e.code(), std::string(name) + ": " + e.what());
  }
}

}  // namespace

void to_json(nlohmann::json& j, const PipelineConfig& config) {
  const auto& f = config.features;
  nlohmann::json features = {
      {"bases", string_list(f.bases, [](BaseFeature b) { return to_string(b); })},
      {"summaries", string_list(f.summaries, [](Summary s) { return to_string(s); })},
      {"directions", string_list(f.directions, [](Direction d) { return to_string(d); })},
      {"max_hops", f.max_hops},
      {"prune_threshold", f.prune_threshold},
      {"bin_fraction", f.bin_fraction}};
  nlohmann::json layout = {{"iterations", config.layout.iterations},
                           {"seed", config.layout.seed},
                           {"theta", config.layout.theta},
                           {"optimal_distance", nullptr},
                           {"repulsion", config.layout.repulsion},
                           {"tolerance", config.layout.tolerance}};
  if (config.layout.optimal_distance) layout["optimal_distance"] = *config.layout.optimal_distance;
  j = {{"features", std::move(features)},
       {"alpha", nullptr},
       {"alpha_grid", config.alpha_grid},
       {"standardize", config.standardize},
       {"layouts", config.layouts},
       {"layout", std::move(layout)}};
  if (config.alpha) j["alpha"] = *config.alpha;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  try {
    PipelineConfig config;
    if (j.contains("features")) {
      const auto& f = j.at("features");
      auto& out = config.features;
      for (const auto& b : f.value("bases", nlohmann::json::array()))
        out.bases.push_back(base_feature_from_string(b.get<std::string>()));
      for (const auto& s : f.value("summaries", nlohmann::json::array()))
        out.summaries.push_back(summary_from_string(s.get<std::string>()));
      for (const auto& d : f.value("directions", nlohmann::json::array()))
        out.directions.push_back(direction_from_string(d.get<std::string>()));
      out.max_hops = f.value("max_hops", out.max_hops);
      out.prune_threshold = f.value("prune_threshold", out.prune_threshold);
      out.bin_fraction = f.value("bin_fraction", out.bin_fraction);
    }
    if (j.contains("alpha") && !j.at("alpha").is_null()) config.alpha = j.at("alpha").get<double>();
    if (j.contains("alpha_grid")) config.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    config.standardize = j.value("standardize", false);
    config.layouts = j.value("layouts", true);
    if (j.contains("layout")) {
      const auto& l = j.at("layout");
      config.layout.iterations = l.value("iterations", config.layout.iterations);
      config.layout.seed = l.value("seed", config.layout.seed);
      config.layout.theta = l.value("theta", config.layout.theta);
      if (l.contains("optimal_distance") && !l.at("optimal_distance").is_null())
        config.layout.optimal_distance = l.at("optimal_distance").get<double>();
      config.layout.repulsion = l.value("repulsion", config.layout.repulsion);
      config.layout.tolerance = l.value("tolerance", config.layout.tolerance);
    }
    return config;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("malformed pipeline config: ") + e.what());
  }
}

ScaledPair scale_union(const Eigen::VectorXd& target, const Eigen::VectorXd& background) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (target.size()) {
    lo = std::min(lo, target.minCoeff());
    hi = std::max(hi, target.maxCoeff());
  }
  if (background.size()) {
    lo = std::min(lo, background.minCoeff());
    hi = std::max(hi, background.maxCoeff());
  }
  if (!(hi > lo))
    return {Eigen::VectorXd::Constant(target.size(), 0.5), Eigen::VectorXd::Constant(background.size(), 0.5)};
  const double span = hi - lo;
  return {(target.array() - lo) / span, (background.array() - lo) / span};
}

Session Session::run_pipeline(std::string id, GraphRef target, GraphRef background, PipelineConfig config,
                              const ProgressFn& progress, std::stop_token stop) {
  if (!target.graph || !background.graph) fail(ErrorCode::invalid_argument, "pipeline needs two graphs");
  auto report = [&](std::string_view name, double fraction) {
    if (progress) progress(name, fraction);
  };
  auto check_stop = [&] {
    if (stop.stop_requested()) fail(ErrorCode::cancelled, "pipeline cancelled");
  };

  Session s;
  s.id_ = std::move(id);
  s.target_ = std::move(target);
  s.background_ = std::move(background);
  const Graph& gt = *s.target_.graph;
  const Graph& gb = *s.background_.graph;

  const FeatureLearningConfig defaults = FeatureLearningConfig::defaults(gt.directed());
  auto& fc = config.features;
  if (fc.bases.empty()) fc.bases = defaults.bases;
  if (fc.summaries.empty()) fc.summaries = defaults.summaries;
  if (fc.directions.empty()) fc.directions = defaults.directions;

  // A base that fails on either graph (e.g. eigenvector centrality on an
  // acyclic graph) would make the whole run fail later; drop it up front.
  phase("screen_bases", [&] {
    std::vector<BaseFeature> usable;
    for (std::size_t i = 0; i < fc.bases.size(); ++i) {
      check_stop();
      const BaseFeature base = fc.bases[i];
      try {
        compute_base(gt, base);
        compute_base(gb, base);
        if (std::find(usable.begin(), usable.end(), base) == usable.end()) usable.push_back(base);
      } catch (const Error& e) {
        s.warnings_.push_back("dropped base feature " + to_string(base) + ": " + e.what());
      }
      report("screen_bases", static_cast<double>(i + 1) / static_cast<double>(fc.bases.size()));
    }
    if (usable.empty()) fail(ErrorCode::invalid_argument, "no base feature is computable on both graphs");
    fc.bases = std::move(usable);
    return 0;
  });

  auto learned = phase("feature_learning", [&] { return learn_features(gt, fc, progress, stop); });
  s.definitions_ = std::make_shared<const DefinitionList>(std::move(learned.definitions));
  check_stop();

  report("feature_matrices", 0.0);
  std::tie(s.x_target_, s.x_background_) =
      phase("feature_matrices", [&] { return build_feature_matrices(s.definitions_, gt, gb); });
  report("feature_matrices", 1.0);
  check_stop();

  const Eigen::MatrixXd& xt = s.x_target_.values;
  const Eigen::MatrixXd& xb = s.x_background_.values;
  double alpha = 0.0;
  if (config.alpha) {
    alpha = *config.alpha;
  } else {
    report("alpha_selection", 0.0);
    alpha = phase("alpha_selection",
                  [&] { return auto_alpha(xt, xb, config.alpha_grid, config.standardize, &s.alpha_scores_); });
    report("alpha_selection", 1.0);
  }
  check_stop();

  s.model_ = phase("fit", [&] { return fit_cpca(xt, xb, alpha, 2, config.standardize); });
  s.refresh_embedding();
  if (s.model_.degenerate) s.warnings_.push_back("no contrast found: C_T - alpha C_B vanishes");
  report("fit", 1.0);

  if (config.layouts) {
    auto sub = [&](std::string_view name) {
      return [&, name](std::string_view, double f) { report(name, f); };
    };
    s.layout_target_ = phase("layout_target", [&] { return force_layout(gt, config.layout, sub("layout_target"), stop); });
    s.layout_background_ =
        phase("layout_background", [&] { return force_layout(gb, config.layout, sub("layout_background"), stop); });
  }
  check_stop();

  s.config_ = std::move(config);
  s.choose_default_feature();
  report("done", 1.0);
  return s;
}

void Session::refresh_embedding() {
  embedding_ = embed(x_target_.values, x_background_.values, model_);
}

void Session::choose_default_feature() {
  Eigen::Index best = 0;
  model_.scaled_loadings.col(0).cwiseAbs().maxCoeff(&best);
  current_feature_ = (*definitions_)[static_cast<std::size_t>(best)].id;
}

std::size_t Session::column_of(int definition_id) const {
  for (std::size_t j = 0; j < definitions_->size(); ++j)
    if ((*definitions_)[j].id == definition_id) return j;
  fail(ErrorCode::not_found, "unknown feature definition " + std::to_string(definition_id));
}

bool Session::update_alpha(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorCode::invalid_argument, "alpha must be finite and >= 0");
  const bool was_rotated = model_.rotated;
  CpcaModel next = fit_cpca(x_target_.values, x_background_.values, alpha, 2, config_.standardize);
  model_ = stabilize_signs(embedding_, std::move(next), x_target_.values, x_background_.values);
  refresh_embedding();
  return was_rotated;
}

double Session::rotate_embedding(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  if (d.norm() == 0.0) fail(ErrorCode::invalid_argument, "rotation line needs two distinct points");
  // A line has no direction: fold the angle into (-pi/2, pi/2].
  double theta = std::atan2(d.y(), d.x());
  if (theta > std::numbers::pi / 2) theta -= std::numbers::pi;
  if (theta <= -std::numbers::pi / 2) theta += std::numbers::pi;
  model_ = rotate(model_, theta, x_target_.values);
  refresh_embedding();
  return theta;
}

void Session::select_feature(int definition_id) {
  column_of(definition_id);
  current_feature_ = definition_id;
}

ScaledPair Session::feature_colors(int definition_id) const {
  const auto j = static_cast<Eigen::Index>(column_of(definition_id));
  return scale_union(x_target_.values.col(j), x_background_.values.col(j));
}

std::vector<Eigen::VectorXd> Session::feature_stages(int definition_id, NetworkTag which) const {
  const FeatureDefinition& def = (*definitions_)[column_of(definition_id)];
  const auto t = evaluate_feature(*target_.graph, def);
  const auto b = evaluate_feature(*background_.graph, def);
  std::vector<Eigen::VectorXd> out;
  for (std::size_t k = 0; k < t.stages.size(); ++k) {
    ScaledPair scaled = scale_union(t.stages[k].values, b.stages[k].values);
    out.push_back(which == NetworkTag::target ? std::move(scaled.target) : std::move(scaled.background));
  }
  return out;
}

Histogram Session::histogram(int definition_id, int bins, YScale y_scale) const {
  if (bins < 1) fail(ErrorCode::invalid_argument, "histogram needs at least one bin");
  const ScaledPair values = feature_colors(definition_id);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Eigen::VectorXd* v : {&values.target, &values.background}) {
    if (v->size() == 0) continue;
    lo = std::min(lo, v->minCoeff());
    hi = std::max(hi, v->maxCoeff());
  }
  if (!std::isfinite(lo)) lo = hi = 0.5;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.y_scale = y_scale;
  const double width = (hi - lo) / bins;
  for (int k = 0; k < bins; ++k) h.centers.push_back(lo + (k + 0.5) * width);
  auto count = [&](const Eigen::VectorXd& v) {
    std::vector<double> freq(static_cast<std::size_t>(bins), 0.0);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      auto k = static_cast<int>(std::floor((v[i] - lo) / width));
      k = std::clamp(k, 0, bins - 1);
      freq[static_cast<std::size_t>(k)] += 1.0;
    }
    if (v.size())
      for (double& f : freq) f /= static_cast<double>(v.size());
    return freq;
  };
  h.target = count(values.target);
  h.background = count(values.background);
  return h;
}

void Session::set_selection(const std::vector<SelectionItem>& items) {
  std::set<SelectionItem> next;
  for (const auto& item : items) {
    const std::size_t n = item.network == NetworkTag::target ? target_.graph->node_count()
                                                             : background_.graph->node_count();
    if (item.node >= n)
      fail(ErrorCode::invalid_argument, "node " + std::to_string(item.node) + " is not in the " +
                                            std::string(to_string(item.network)) + " network");
    next.insert(item);
  }
  selection_ = std::move(next);
}

nlohmann::json Session::snapshot(bool include_matrices) const {
  nlohmann::json defs = nlohmann::json::array();
  for (const auto& d : *definitions_) defs.push_back(d);
  nlohmann::json selection = nlohmann::json::array();
  for (const auto& item : selection_)
    selection.push_back({{"network", to_string(item.network)}, {"node", item.node}});
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& s : alpha_scores_) scores.push_back({s.alpha, s.score});
  nlohmann::json layouts = {{"target", nullptr}, {"background", nullptr}};
  if (layout_target_) layouts["target"] = *layout_target_;
  if (layout_background_) layouts["background"] = *layout_background_;

  nlohmann::json j = {
      {"version", 1},
      {"id", id_},
      {"target", {{"dataset", target_.id}, {"nodes", target_.graph->node_count()}}},
      {"background", {{"dataset", background_.id}, {"nodes", background_.graph->node_count()}}},
      {"config", config_},
      {"definitions", std::move(defs)},
      {"model", model_},
      {"embedding", {{"target", rows_json(embedding_.target)}, {"background", rows_json(embedding_.background)}}},
      {"layouts", std::move(layouts)},
      {"alpha_scores", std::move(scores)},
      {"warnings", warnings_},
      {"current_feature", current_feature_},
      {"selection", std::move(selection)}};
  if (include_matrices)
    j["matrices"] = {{"target", rows_json(x_target_.values)}, {"background", rows_json(x_background_.values)}};
  return j;
}

Session Session::from_snapshot(const nlohmann::json& j, GraphRef target, GraphRef background) {
  if (!target.graph || !background.graph) fail(ErrorCode::invalid_argument, "snapshot reload needs two graphs");
  try {
    if (j.at("version").get<int>() != 1) fail(ErrorCode::parse_error, "unsupported snapshot version");
    Session s;
    s.id_ = j.at("id").get<std::string>();
    s.target_ = std::move(target);
    s.background_ = std::move(background);
    if (j.at("target").at("nodes").get<std::size_t>() != s.target_.graph->node_count() ||
        j.at("background").at("nodes").get<std::size_t>() != s.background_.graph->node_count())
      fail(ErrorCode::invalid_argument, "snapshot node counts do not match the graphs");
    s.config_ = pipeline_config_from_json(j.at("config"));

    DefinitionList defs;
    for (const auto& d : j.at("definitions")) defs.push_back(feature_definition_from_json(d));
    s.definitions_ = std::make_shared<const DefinitionList>(std::move(defs));
    const auto d = static_cast<Eigen::Index>(s.definitions_->size());
    if (j.contains("matrices")) {
      s.x_target_ = {rows_from_json(j.at("matrices").at("target"), d), s.definitions_};
      s.x_background_ = {rows_from_json(j.at("matrices").at("background"), d), s.definitions_};
    } else {
      std::tie(s.x_target_, s.x_background_) =
          build_feature_matrices(s.definitions_, *s.target_.graph, *s.background_.graph);
    }
    s.model_ = cpca_model_from_json(j.at("model"));
    if (s.model_.components.rows() != d) fail(ErrorCode::parse_error, "model does not match the definitions");
    s.refresh_embedding();

    const auto& layouts = j.at("layouts");
    if (!layouts.at("target").is_null()) s.layout_target_ = layout_from_json(layouts.at("target"));
    if (!layouts.at("background").is_null()) s.layout_background_ = layout_from_json(layouts.at("background"));
    for (const auto& score : j.at("alpha_scores"))
      s.alpha_scores_.push_back({score.at(0).get<double>(), score.at(1).get<double>()});
    s.warnings_ = j.at("warnings").get<std::vector<std::string>>();
    s.select_feature(j.at("current_feature").get<int>());
    std::vector<SelectionItem> items;
    for (const auto& item : j.at("selection"))
      items.push_back({network_tag_from_string(item.at("network").get<std::string>()), item.at("node").get<NodeId>()});
    s.set_selection(items);
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse_error, std::string("malformed snapshot: ") + e.what());
  }
}

}  // namespace netcontrast
