#include "datasets.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "service_error.hpp"

namespace netcontrast::service {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifest = "manifest.json";

std::string attributes_csv(const Graph& graph) {
  const auto& attrs = graph.attributes();
  std::ostringstream out;
  out << "node";
  for (const auto& name : attrs.names) out << ',' << name;
  out << '\n';
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    out << graph.labels()[v];
    for (Eigen::Index c = 0; c < attrs.values.cols(); ++c)
      out << ',' << format_double(attrs.values(static_cast<Eigen::Index>(v), c));
    out << '\n';
  }
  return out.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) fail(ErrorCode::io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::io, "cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace

void to_json(nlohmann::json& j, const DatasetEntry& entry) {
  j = {{"id", entry.id}};
  if (entry.generator) {
    j["generator"] = *entry.generator;
  } else {
    j["file"] = entry.file;
    j["directed"] = entry.directed;
    j["weighted"] = entry.weighted;
    if (!entry.attributes.empty()) j["attributes"] = entry.attributes;
  }
  if (!entry.description.empty()) j["description"] = entry.description;
}

DatasetEntry dataset_entry_from_json(const nlohmann::json& j) {
  try {
    DatasetEntry entry;
    entry.id = j.at("id").get<std::string>();
    if (!valid_dataset_id(entry.id)) fail(ErrorCode::parse_error, "invalid dataset id '" + entry.id + "'");
    if (j.contains("generator")) {
      entry.generator = generator_spec_from_json(j.at("generator"));
      entry.directed = entry.generator->kind == GeneratorKind::price;
    } else {
      entry.file = j.at("file").get<std::string>();
      entry.directed = j.value("directed", false);
      entry.weighted = j.value("weighted", false);
      entry.attributes = j.value("attributes", std::string{});
    }
    entry.description = j.value("description", std::string{});
    return entry;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse_error, std::string("bad manifest entry: ") + e.what());
  }
}

bool valid_dataset_id(std::string_view id) {
  if (id.empty() || id.size() > 64 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.';
  });
}

DatasetStore::DatasetStore(std::string data_dir) : data_dir_(std::move(data_dir)) {
  const fs::path manifest = fs::path(data_dir_) / kManifest;
  if (!fs::exists(manifest)) return;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(manifest.string()));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse_error, manifest.string() + ": " + e.what());
  }
  if (!j.contains("datasets") || !j.at("datasets").is_array())
    fail(ErrorCode::parse_error, manifest.string() + ": missing datasets array");
  for (const auto& item : j.at("datasets")) {
    DatasetEntry entry = dataset_entry_from_json(item);
    if (contains(entry.id)) fail(ErrorCode::parse_error, "duplicate dataset id '" + entry.id + "'");
    entries_.push_back(std::move(entry));
  }
}

std::string DatasetStore::path_of(const std::string& file) const { return (fs::path(data_dir_) / file).string(); }

bool DatasetStore::contains(const std::string& id) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const DatasetEntry& e) { return e.id == id; });
}

nlohmann::json DatasetStore::list() const {
  std::lock_guard lock(mutex_);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& entry : entries_) {
    nlohmann::json item = entry;
    const bool available = entry.generator || fs::exists(path_of(entry.file));
    item["available"] = available;
    item["directed"] = entry.directed;
    if (auto it = cache_.find(entry.id); it != cache_.end()) {
      item["nodes"] = it->second->node_count();
      item["edges"] = it->second->edge_count();
    } else if (entry.generator) {
      item["nodes"] = entry.generator->n;
    }
    out.push_back(std::move(item));
  }
  return out;
}

GraphRef DatasetStore::get(const std::string& id) {
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(id); it != cache_.end()) return {id, it->second};
  const auto entry = std::find_if(entries_.begin(), entries_.end(), [&](const DatasetEntry& e) { return e.id == id; });
  if (entry == entries_.end()) throw ServiceError("dataset_not_found", "no dataset '" + id + "'");

  Graph graph;
  if (entry->generator) {
    graph = generate(*entry->generator);
  } else {
    const std::string path = path_of(entry->file);
    if (!fs::exists(path))
      throw ServiceError("dataset_not_found",
                         "dataset '" + id + "' has no file " + entry->file + "; run scripts/fetch_datasets.sh");
    EdgeListOptions options;
    options.directed = entry->directed;
    options.has_weights = entry->weighted;
    graph = load_edge_list(read_text_file(path), options);
    if (!entry->attributes.empty()) graph = load_attributes(graph, read_text_file(path_of(entry->attributes)));
  }
  auto shared = std::make_shared<const Graph>(std::move(graph));
  cache_[id] = shared;
  return {id, shared};
}

std::string DatasetStore::claim_id(std::string id, std::string_view prefix) {
  if (id.empty()) {
    for (std::size_t k = 1;; ++k) {
      id = std::string(prefix) + std::to_string(k);
      if (!contains(id)) break;
    }
  }
  if (!valid_dataset_id(id)) throw ServiceError("bad_request", "invalid dataset id '" + id + "'");
  if (contains(id)) throw ServiceError("dataset_exists", "dataset '" + id + "' already exists");
  return id;
}

void DatasetStore::save_manifest() const {
  nlohmann::json datasets = nlohmann::json::array();
  for (const auto& entry : entries_) datasets.push_back(entry);
  fs::create_directories(data_dir_);
  write_file_atomic(fs::path(data_dir_) / kManifest,
                    nlohmann::json{{"version", 1}, {"datasets", std::move(datasets)}}.dump(2) + "\n");
}

GraphRef DatasetStore::add_graph(std::string id, const Graph& graph, std::string description) {
  std::lock_guard lock(mutex_);
  id = claim_id(std::move(id), "graph");
  DatasetEntry entry;
  entry.id = id;
  entry.file = id + ".edgelist";
  entry.directed = graph.directed();
  entry.weighted = std::any_of(graph.edges().begin(), graph.edges().end(),
                               [](const Edge& e) { return e.weight != 1.0; });
  entry.description = std::move(description);
  fs::create_directories(data_dir_);
  write_file_atomic(path_of(entry.file), write_edge_list(graph));
  if (graph.has_attributes()) {
    entry.attributes = id + "_attributes.csv";
    write_file_atomic(path_of(entry.attributes), attributes_csv(graph));
  }
  entries_.push_back(entry);
  try {
    save_manifest();
  } catch (...) {
    entries_.pop_back();
    throw;
  }
  auto shared = std::make_shared<const Graph>(graph);
  cache_[id] = shared;
  return {id, shared};
}

GraphRef DatasetStore::add_generated(std::string id, const GeneratorSpec& spec) {
  auto shared = std::make_shared<const Graph>(generate(spec));
  std::lock_guard lock(mutex_);
  id = claim_id(std::move(id), "generated");
  DatasetEntry entry;
  entry.id = id;
  entry.generator = spec;
  entry.directed = spec.kind == GeneratorKind::price;
  entries_.push_back(entry);
  try {
    save_manifest();
  } catch (...) {
    entries_.pop_back();
    throw;
  }
  cache_[id] = shared;
  return {id, shared};
}

}  // namespace netcontrast::service
