#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "generators.hpp"
#include "graph.hpp"
#include "session.hpp"

namespace netcontrast::service {

struct DatasetEntry {
  std::string id;
  std::string file;        // relative to the data dir
  std::string attributes;  // relative to the data dir, optional
  bool directed = false;
  bool weighted = false;
  std::optional<GeneratorSpec> generator;
  std::string description;
};

void to_json(nlohmann::json& j, const DatasetEntry& entry);
DatasetEntry dataset_entry_from_json(const nlohmann::json& j);

/// Letters, digits, '_', '-' and '.', at most 64 characters, not starting with '.'.
bool valid_dataset_id(std::string_view id);

/// Datasets under one directory, described by manifest.json. File entries are
/// parsed and generator entries materialized on first use, then cached.
class DatasetStore {
 public:
  explicit DatasetStore(std::string data_dir);

  const std::string& data_dir() const { return data_dir_; }

  nlohmann::json list() const;
  bool contains(const std::string& id) const;

  /// Throws ServiceError dataset_not_found for unknown ids and missing files.
  GraphRef get(const std::string& id);

  /// Writes the graph (and attributes) as files and adds a manifest entry.
  /// An empty id picks the next free "graph<k>".
  GraphRef add_graph(std::string id, const Graph& graph, std::string description = {});

  /// Adds a generator entry and materializes it.
  GraphRef add_generated(std::string id, const GeneratorSpec& spec);

 private:
  std::string claim_id(std::string id, std::string_view prefix);
  void save_manifest() const;
  std::string path_of(const std::string& file) const;

  std::string data_dir_;
  mutable std::mutex mutex_;
  std::vector<DatasetEntry> entries_;
  std::map<std::string, std::shared_ptr<const Graph>> cache_;
};

}  // namespace netcontrast::service
