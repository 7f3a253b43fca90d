#include "export.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace netcontrast {

namespace {

constexpr const char* kSchema = "# netcontrast-export v1";

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string axis_name(const CpcaModel& model, int k) {
  // alpha = 0 is ordinary PCA.
  return (model.alpha == 0.0 && !model.rotated ? "PC" : "cPC") + std::to_string(k + 1);
}

std::string embedding_csv(const Session& s) {
  std::ostringstream out;
  out << kSchema << " embedding\n";
  out << "network,node,label," << axis_name(s.model(), 0) << ',' << axis_name(s.model(), 1) << '\n';
  auto rows = [&](NetworkTag tag, const Graph& g, const Eigen::MatrixXd& y) {
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      out << to_string(tag) << ',' << i << ',' << csv_field(g.label(static_cast<NodeId>(i))) << ','
          << format_double(y(i, 0)) << ',' << format_double(y(i, 1)) << '\n';
  };
  rows(NetworkTag::target, s.target(), s.embedding().target);
  rows(NetworkTag::background, s.background(), s.embedding().background);
  return out.str();
}

std::string loadings_csv(const Session& s) {
  std::ostringstream out;
  out << kSchema << " loadings\n";
  out << "id,name,definition," << axis_name(s.model(), 0) << ',' << axis_name(s.model(), 1) << '\n';
  const auto& l = s.model().scaled_loadings;
  for (std::size_t j = 0; j < s.definitions().size(); ++j) {
    const auto& def = s.definitions()[j];
    const auto r = static_cast<Eigen::Index>(j);
    out << def.id << ',' << csv_field(describe(def)) << ',' << csv_field(nlohmann::json(def).dump()) << ','
        << format_double(l(r, 0)) << ',' << format_double(l(r, 1)) << '\n';
  }
  return out.str();
}

std::string features_csv(const Session& s, const Graph& g, const FeatureMatrix& x, std::string_view which) {
  std::ostringstream out;
  out << kSchema << " features " << which << '\n';
  out << "node,label";
  for (const auto& def : s.definitions()) out << ",F" << def.id;
  out << '\n';
  for (Eigen::Index i = 0; i < x.values.rows(); ++i) {
    out << i << ',' << csv_field(g.label(static_cast<NodeId>(i)));
    for (Eigen::Index j = 0; j < x.values.cols(); ++j) out << ',' << format_double(x.values(i, j));
    out << '\n';
  }
  return out.str();
}

nlohmann::json definitions_json(const Session& s) {
  nlohmann::json defs = nlohmann::json::array();
  for (const auto& d : s.definitions()) {
    nlohmann::json j = d;
    j["name"] = describe(d);
    defs.push_back(std::move(j));
  }
  return defs;
}

nlohmann::json model_json(const Session& s) {
  return {{"model", s.model()}, {"definitions", definitions_json(s)}, {"config", s.config()},
          {"warnings", s.warnings()}};
}

nlohmann::json plot_json(const Session& s) {
  const ScaledPair colors = s.feature_colors(s.current_feature());
  nlohmann::json points = nlohmann::json::array();
  auto add = [&](NetworkTag tag, const Graph& g, const Eigen::MatrixXd& y, const Eigen::VectorXd& c) {
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      points.push_back({{"network", to_string(tag)},
                        {"node", i},
                        {"label", g.label(static_cast<NodeId>(i))},
                        {"x", y(i, 0)},
                        {"y", y(i, 1)},
                        {"color", c[i]}});
  };
  add(NetworkTag::target, s.target(), s.embedding().target, colors.target);
  add(NetworkTag::background, s.background(), s.embedding().background, colors.background);
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& a : s.alpha_scores()) scores.push_back({{"alpha", a.alpha}, {"score", a.score}});
  return {{"axes", {axis_name(s.model(), 0), axis_name(s.model(), 1)}},
          {"alpha", s.model().alpha},
          {"rotated", s.model().rotated},
          {"degenerate", s.model().degenerate},
          {"color_feature", s.current_feature()},
          {"points", std::move(points)},
          {"definitions", definitions_json(s)},
          {"alpha_scores", std::move(scores)}};
}

nlohmann::json matrix_records(const Graph& g, const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> values(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) values[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back({{"node", i}, {"label", g.label(static_cast<NodeId>(i))}, {"values", values}});
  }
  return rows;
}

}  // namespace

ExportFormat export_format_from_string(std::string_view text) {
  if (text == "csv") return ExportFormat::csv;
  if (text == "json") return ExportFormat::json;
  fail(ErrorCode::invalid_argument, "unknown export format '" + std::string(text) + "'");
}

std::map<std::string, std::string> render_exports(const Session& s, ExportFormat format) {
  std::map<std::string, std::string> files;
  files["model.json"] = model_json(s).dump(2) + "\n";
  files["plot.json"] = plot_json(s).dump(2) + "\n";
  if (format == ExportFormat::csv) {
    files["embedding.csv"] = embedding_csv(s);
    files["loadings.csv"] = loadings_csv(s);
    files["features_T.csv"] = features_csv(s, s.target(), s.target_features(), "target");
    files["features_B.csv"] = features_csv(s, s.background(), s.background_features(), "background");
    return files;
  }
  nlohmann::json embedding = {{"schema", "netcontrast-export v1 embedding"},
                              {"axes", {axis_name(s.model(), 0), axis_name(s.model(), 1)}},
                              {"target", matrix_records(s.target(), s.embedding().target)},
                              {"background", matrix_records(s.background(), s.embedding().background)}};
  nlohmann::json loadings = {{"schema", "netcontrast-export v1 loadings"}, {"rows", nlohmann::json::array()}};
  const auto& l = s.model().scaled_loadings;
  for (std::size_t j = 0; j < s.definitions().size(); ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    loadings["rows"].push_back({{"definition", s.definitions()[j]},
                                {"name", describe(s.definitions()[j])},
                                {"scaled", {l(r, 0), l(r, 1)}}});
  }
  files["embedding.json"] = embedding.dump(2) + "\n";
  files["loadings.json"] = loadings.dump(2) + "\n";
  files["features_T.json"] =
      nlohmann::json{{"schema", "netcontrast-export v1 features target"},
                     {"rows", matrix_records(s.target(), s.target_features().values)}}
          .dump(2) + "\n";
  files["features_B.json"] =
      nlohmann::json{{"schema", "netcontrast-export v1 features background"},
                     {"rows", matrix_records(s.background(), s.background_features().values)}}
          .dump(2) + "\n";
  return files;
}

void write_exports(const Session& session, const std::string& dir, ExportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create '" + dir + "': " + ec.message());
  for (const auto& [name, content] : render_exports(session, format)) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) fail(ErrorCode::io, "cannot write '" + path.string() + "'");
  }
}

}  // namespace netcontrast
