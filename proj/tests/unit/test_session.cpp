#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "error.hpp"
#include "export.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "session.hpp"

using namespace netcontrast;

namespace {

GraphRef ref(std::string id, Graph g) { return {std::move(id), std::make_shared<const Graph>(std::move(g))}; }

PipelineConfig quick_config() {
  PipelineConfig config;
  config.layout.iterations = 60;
  return config;
}

Session small_session() {
  static const Session s = Session::run_pipeline("s1", ref("t", gilbert(40, 0.12, 3)), ref("b", fixtures::random_graph(30, 0.1, false, 4)),
                                                 quick_config());
  return s;
}

void expect_consistent(const Session& s) {
  const Embedding fresh = embed(s.target_features().values, s.background_features().values, s.model());
  EXPECT_LT((fresh.target - s.embedding().target).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((fresh.background - s.embedding().background).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace

TEST(Pipeline, KarateAsBackground) {
  const auto karate = fixtures::dataset("karate", false);
  ASSERT_TRUE(karate.has_value());
  std::vector<std::string> phases;
  const Session s = Session::run_pipeline("k", ref("t", gilbert(62, 0.08, 1)), ref("karate", *karate), quick_config(),
                                          [&](std::string_view p, double) {
                                            if (phases.empty() || phases.back() != p) phases.emplace_back(p);
                                          });
  EXPECT_EQ(s.embedding().target.rows(), 62);
  EXPECT_EQ(s.embedding().background.rows(), 34);
  EXPECT_EQ(s.embedding().target.cols(), 2);
  ASSERT_TRUE(s.target_layout().has_value());
  EXPECT_EQ(s.background_layout()->xy.rows(), 34);
  EXPECT_EQ(s.target_features().definitions.get(), s.background_features().definitions.get());
  const std::set<std::string> seen(phases.begin(), phases.end());
  for (const char* p : {"screen_bases", "feature_learning", "feature_matrices", "alpha_selection", "fit", "layout_target",
                        "layout_background", "done"})
    EXPECT_TRUE(seen.count(p)) << p;
  expect_consistent(s);
}

TEST(Pipeline, IdenticalGraphsAtAlphaOneAreDegenerate) {
  const Graph g = fixtures::random_graph(30, 0.15, false, 8);
  PipelineConfig config = quick_config();
  config.alpha = 1.0;
  const Session s = Session::run_pipeline("same", ref("g", g), ref("g", g), config);
  EXPECT_TRUE(s.model().degenerate);
  EXPECT_FALSE(s.warnings().empty());
}

TEST(Pipeline, IdenticalGraphsAutoAlphaRatioNearOne) {
  const Graph g = fixtures::random_graph(30, 0.15, false, 9);
  const Session s = Session::run_pipeline("same", ref("g", g), ref("g", g), quick_config());
  const double ratio = trace_variance(s.embedding().target) / trace_variance(s.embedding().background);
  EXPECT_NEAR(ratio, 1.0, 1e-9);
}

TEST(Pipeline, DropsBasesThatFailOnAcyclicGraphs) {
  // Eigenvector centrality does not exist on a DAG.
  const Session s = Session::run_pipeline("p", ref("price", price(200, 3, 1.0, 1)),
                                          ref("gilbert", gilbert(100, 0.05, 2)), quick_config());
  bool warned = false;
  for (const auto& w : s.warnings()) warned |= w.find("eigenvector") != std::string::npos;
  EXPECT_TRUE(warned);
  for (const auto& d : s.definitions()) EXPECT_NE(d.base.kind, BaseKind::eigenvector);
}

TEST(Pipeline, FailuresNamePhase) {
  PipelineConfig config = quick_config();
  config.features.bases = {{BaseKind::total_degree}};
  config.features.max_hops = 0;
  try {
    Session::run_pipeline("x", ref("a", fixtures::path(5)), ref("b", fixtures::path(6)), config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("alpha_selection: ", 0), 0u) << e.what();
  }
}

TEST(Pipeline, CancelledBeforeStart) {
  std::stop_source source;
  source.request_stop();
  try {
    Session::run_pipeline("x", ref("a", fixtures::path(5)), ref("b", fixtures::path(6)), quick_config(), {},
                          source.get_token());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::cancelled);
  }
}

TEST(Pipeline, DefaultFeatureIsTopCpc1Loading) {
  const Session s = small_session();
  Eigen::Index best;
  s.model().scaled_loadings.col(0).cwiseAbs().maxCoeff(&best);
  EXPECT_EQ(s.current_feature(), s.definitions()[static_cast<std::size_t>(best)].id);
}

TEST(UpdateAlpha, UnchangedAlphaKeepsEmbedding) {
  Session s = small_session();
  const Embedding before = s.embedding();
  s.update_alpha(s.model().alpha);
  EXPECT_LT((s.embedding().target - before.target).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((s.embedding().background - before.background).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(UpdateAlpha, RoundTripUpToSign) {
  Session s = small_session();
  const double alpha = s.model().alpha;
  const Embedding before = s.embedding();
  s.update_alpha(alpha + 5.0);
  expect_consistent(s);
  s.update_alpha(alpha);
  EXPECT_LT(oracle::max_deviation_up_to_sign(before.target, s.embedding().target), 1e-9);
  EXPECT_LT(oracle::max_deviation_up_to_sign(before.background, s.embedding().background), 1e-9);
}

TEST(UpdateAlpha, ZeroIsPca) {
  Session s = small_session();
  s.update_alpha(0.0);
  EXPECT_LT(oracle::max_deviation_up_to_sign(s.embedding().target, oracle::pca_projection(s.target_features().values, 2)),
            1e-8);
}

TEST(UpdateAlpha, ResetsRotation) {
  Session s = small_session();
  s.rotate_embedding({0, 0}, {1, 1});
  EXPECT_TRUE(s.model().rotated);
  EXPECT_TRUE(s.update_alpha(s.model().alpha));
  EXPECT_FALSE(s.model().rotated);
  EXPECT_FALSE(s.update_alpha(1.0));
  EXPECT_THROW(s.update_alpha(-1.0), Error);
}

TEST(UpdateAlpha, SweepKeepsAxesAligned) {
  Session s = small_session();
  s.update_alpha(138.0);
  for (double alpha = 138.0; alpha >= 38.0; alpha -= 10.0) {
    const Embedding prev = s.embedding();
    s.update_alpha(alpha);
    for (int j = 0; j < 2; ++j)
      EXPECT_GE(prev.target.col(j).dot(s.embedding().target.col(j)) +
                    prev.background.col(j).dot(s.embedding().background.col(j)),
                0.0);
  }
}

TEST(RotateEmbedding, HorizontalIsNoOp) {
  Session s = small_session();
  const CpcaModel before = s.model();
  EXPECT_EQ(s.rotate_embedding({0, 0}, {2, 0}), 0.0);
  EXPECT_EQ(s.model().components, before.components);
  EXPECT_EQ(s.rotate_embedding({2, 0}, {0, 0}), 0.0);
}

TEST(RotateEmbedding, VerticalSwapsAxes) {
  Session s = small_session();
  const CpcaModel before = s.model();
  EXPECT_DOUBLE_EQ(s.rotate_embedding({0, 0}, {0, 1}), std::numbers::pi / 2);
  EXPECT_LT((s.model().components.col(0) - before.components.col(1)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((s.model().components.col(1) + before.components.col(0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RotateEmbedding, ThirtyDegrees) {
  Session s = small_session();
  const CpcaModel before = s.model();
  const Eigen::MatrixXd y = s.embedding().target;
  const double theta = s.rotate_embedding({1, 1}, {1 + std::sqrt(3.0), 2});
  EXPECT_NEAR(theta, std::numbers::pi / 6, 1e-15);
  EXPECT_LT((oracle::pairwise_distances(y) - oracle::pairwise_distances(s.embedding().target)).cwiseAbs().maxCoeff(), 1e-9);
  const Eigen::MatrixXd w = before.components * rotation_matrix(theta);
  EXPECT_LT((s.model().components - w).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(s.model().scaled_loadings, scaled_loadings(s.model().components));
  expect_consistent(s);
}

TEST(RotateEmbedding, CoincidentPointsRejected) {
  Session s = small_session();
  EXPECT_THROW(s.rotate_embedding({1, 1}, {1, 1}), Error);
}

TEST(FeatureColors, UnionScaling) {
  Eigen::VectorXd t(2), b(1);
  t << 2, 10;
  b << 6;
  const ScaledPair p = scale_union(t, b);
  EXPECT_EQ(p.target[0], 0.0);
  EXPECT_EQ(p.target[1], 1.0);
  EXPECT_EQ(p.background[0], 0.5);
  const ScaledPair c = scale_union(Eigen::VectorXd::Constant(3, 4.0), Eigen::VectorXd::Constant(2, 4.0));
  EXPECT_EQ(c.target, Eigen::VectorXd::Constant(3, 0.5));
  EXPECT_EQ(c.background, Eigen::VectorXd::Constant(2, 0.5));
}

TEST(FeatureColors, MaxOverBothMapsToOne) {
  const Session s = small_session();
  for (const auto& d : s.definitions()) {
    const ScaledPair p = s.feature_colors(d.id);
    const double hi = std::max(p.target.maxCoeff(), p.background.maxCoeff());
    const double lo = std::min(p.target.minCoeff(), p.background.minCoeff());
    if (hi == 0.5 && lo == 0.5) continue;
    EXPECT_EQ(hi, 1.0);
    EXPECT_EQ(lo, 0.0);
  }
  EXPECT_THROW(s.feature_colors(9999), Error);
}

TEST(FeatureStages, ChainlessEqualsColors) {
  const Session s = small_session();
  for (const auto& d : s.definitions()) {
    if (!d.chain.empty()) continue;
    const auto stages = s.feature_stages(d.id, NetworkTag::target);
    ASSERT_EQ(stages.size(), 1u);
    EXPECT_EQ(stages[0], s.feature_colors(d.id).target);
  }
}

TEST(FeatureStages, StagesMatchComposition) {
  const Session s = small_session();
  for (const auto& d : s.definitions()) {
    if (d.chain.empty() || d.base.kind != BaseKind::total_degree) continue;
    const auto t = oracle::compose(s.target(), oracle::base_values(s.target(), d.base), d.chain);
    const auto b = oracle::compose(s.background(), oracle::base_values(s.background(), d.base), d.chain);
    const auto stages = s.feature_stages(d.id, NetworkTag::background);
    ASSERT_EQ(stages.size(), d.chain.size() + 1);
    for (std::size_t k = 0; k < stages.size(); ++k) {
      EXPECT_EQ(stages[k].size(), 30);
      EXPECT_EQ(stages[k], scale_union(t[k], b[k]).background);
    }
  }
}

TEST(Histogram, SumsToOneAndSharesEdges) {
  const Session s = small_session();
  for (const auto& d : s.definitions()) {
    const Histogram h = s.histogram(d.id, 30);
    ASSERT_EQ(h.centers.size(), 30u);
    double st = 0, sb = 0;
    for (double f : h.target) st += f;
    for (double f : h.background) sb += f;
    EXPECT_NEAR(st, 1.0, 1e-12);
    EXPECT_NEAR(sb, 1.0, 1e-12);
  }
  EXPECT_THROW(s.histogram(s.current_feature(), 0), Error);
}

TEST(Histogram, SingleValueOneBin) {
  const Graph g = fixtures::complete(4);
  PipelineConfig config = quick_config();
  config.features.bases = {{BaseKind::total_degree}, {BaseKind::kcore}};
  config.features.max_hops = 0;
  config.features.prune_threshold = 1.01;
  config.alpha = 0.5;
  const Session s = Session::run_pipeline("h", ref("a", g), ref("b", fixtures::complete(4)), config);
  const Histogram h = s.histogram(s.definitions()[0].id, 1);
  EXPECT_EQ(h.target, std::vector<double>{1.0});
  EXPECT_EQ(h.background, std::vector<double>{1.0});
}

TEST(Histogram, IdenticalNetworksIdenticalHistograms) {
  const Graph g = fixtures::random_graph(25, 0.2, false, 14);
  PipelineConfig config = quick_config();
  config.alpha = 0.0;
  const Session s = Session::run_pipeline("h", ref("a", g), ref("b", g), config);
  for (const auto& d : s.definitions()) {
    const Histogram h = s.histogram(d.id, 12, YScale::log);
    EXPECT_EQ(h.target, h.background);
    EXPECT_EQ(h.y_scale, YScale::log);
  }
}

TEST(Histogram, UsesSameValuesAsColors) {
  const Session s = small_session();
  const int id = s.current_feature();
  const ScaledPair c = s.feature_colors(id);
  const Histogram h = s.histogram(id, 10);
  for (int k = 0; k < 10; ++k) {
    const double lo = k / 10.0, hi = (k + 1) / 10.0;
    int count = 0;
    for (Eigen::Index i = 0; i < c.target.size(); ++i)
      if (c.target[i] >= lo && (c.target[i] < hi || (k == 9 && c.target[i] <= hi))) ++count;
    EXPECT_NEAR(h.target[static_cast<std::size_t>(k)], count / static_cast<double>(c.target.size()), 1e-12);
  }
}

TEST(Selection, SetGetClear) {
  Session s = small_session();
  std::vector<SelectionItem> all;
  for (NodeId v = 0; v < 40; ++v) all.push_back({NetworkTag::target, v});
  s.set_selection(all);
  EXPECT_EQ(s.selection().size(), 40u);
  const std::vector<SelectionItem> mixed{{NetworkTag::background, 3}, {NetworkTag::target, 7}};
  s.set_selection(mixed);
  EXPECT_EQ(s.selection(), std::set<SelectionItem>(mixed.begin(), mixed.end()));
  s.set_selection({});
  EXPECT_TRUE(s.selection().empty());
  EXPECT_THROW(s.set_selection({{NetworkTag::background, 30}}), Error);
}

TEST(Snapshot, RoundTripIsByteEqual) {
  Session s = small_session();
  s.set_selection({{NetworkTag::background, 2}, {NetworkTag::target, 5}});
  s.rotate_embedding({0, 0}, {1, 2});
  for (bool matrices : {false, true}) {
    const std::string first = s.snapshot(matrices).dump();
    const Session back = Session::from_snapshot(nlohmann::json::parse(first), s.target_ref(), s.background_ref());
    EXPECT_EQ(back.snapshot(matrices).dump(), first);
  }
}

TEST(Snapshot, RejectsMismatchedGraphs) {
  const Session s = small_session();
  EXPECT_THROW(Session::from_snapshot(s.snapshot(), ref("x", fixtures::path(3)), s.background_ref()), Error);
}

TEST(Snapshot, EmbeddingRowCounts) {
  const nlohmann::json j = small_session().snapshot();
  EXPECT_EQ(j.at("embedding").at("target").size(), 40u);
  EXPECT_EQ(j.at("embedding").at("background").size(), 30u);
}

TEST(Export, CsvFilesHaveSchemaLineAndRows) {
  const Session s = small_session();
  const auto files = render_exports(s, ExportFormat::csv);
  for (const char* name : {"embedding.csv", "loadings.csv", "features_T.csv", "features_B.csv", "model.json", "plot.json"})
    ASSERT_TRUE(files.count(name)) << name;
  const std::string& emb = files.at("embedding.csv");
  EXPECT_EQ(emb.rfind("# netcontrast-export v1", 0), 0u);
  EXPECT_EQ(std::count(emb.begin(), emb.end(), '\n'), 2 + 40 + 30);
  EXPECT_EQ(render_exports(s, ExportFormat::csv), files);
  const auto json_files = render_exports(s, ExportFormat::json);
  EXPECT_TRUE(json_files.count("embedding.json"));
  EXPECT_EQ(nlohmann::json::parse(json_files.at("embedding.json")).at("target").size(), 40u);
}

TEST(PipelineConfig, JsonRoundTrip) {
  PipelineConfig c;
  c.features = FeatureLearningConfig::defaults(true);
  c.alpha = 2.5;
  c.layout.optimal_distance = 3.0;
  c.standardize = true;
  const nlohmann::json j = c;
  EXPECT_EQ(nlohmann::json(pipeline_config_from_json(j)).dump(), j.dump());
}
