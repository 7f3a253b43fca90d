#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "netcontrast/netcontrast.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int code;
  std::string message;
};

void check(nc_status status, const std::string& what) {
  if (status != NC_OK) throw Failure{kExitFailure, what + ": " + nc_last_error()};
}

/// "# directed: true" as written by `generate`, else undirected.
bool sniff_directed(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  for (int i = 0; i < 8 && std::getline(in, line); ++i) {
    if (line.rfind('#', 0) != 0) break;
    if (line.find("directed: true") != std::string::npos) return true;
  }
  return false;
}

struct GraphHandle {
  nc_graph* graph = nullptr;
  ~GraphHandle() { nc_graph_free(graph); }
};

void load_graph(GraphHandle& handle, const std::string& path, std::optional<bool> directed, bool weighted,
                const std::string& attributes) {
  if (!std::filesystem::is_regular_file(path)) throw Failure{kExitUsage, "no such file: " + path};
  if (!attributes.empty() && !std::filesystem::is_regular_file(attributes))
    throw Failure{kExitUsage, "no such file: " + attributes};
  check(nc_graph_load_edge_list(path.c_str(), directed.value_or(sniff_directed(path)) ? 1 : 0, weighted ? 1 : 0,
                                &handle.graph),
        path);
  if (!attributes.empty()) check(nc_graph_load_attributes(handle.graph, attributes.c_str()), attributes);
}

struct RunOptions {
  std::string target;
  std::string background;
  std::string target_attributes;
  std::string background_attributes;
  bool directed = false;
  bool undirected = false;
  bool weighted = false;
  std::optional<double> alpha;
  bool auto_alpha = false;
  std::optional<int> hops;
  std::vector<std::string> bases;
  std::vector<std::string> summaries;
  std::vector<std::string> directions;
  std::optional<double> prune_threshold;
  bool standardize = false;
  std::uint64_t seed = 42;
  bool no_layouts = false;
  std::string out_dir = "netcontrast-out";
  std::string format = "csv";
};

int cmd_run(const RunOptions& o) {
  std::optional<bool> directed;
  if (o.directed) directed = true;
  if (o.undirected) directed = false;
  GraphHandle target, background;
  load_graph(target, o.target, directed, o.weighted, o.target_attributes);
  load_graph(background, o.background, directed, o.weighted, o.background_attributes);

  nlohmann::json features = nlohmann::json::object();
  if (!o.bases.empty()) features["bases"] = o.bases;
  if (!o.summaries.empty()) features["summaries"] = o.summaries;
  if (!o.directions.empty()) features["directions"] = o.directions;
  if (o.hops) features["max_hops"] = *o.hops;
  if (o.prune_threshold) features["prune_threshold"] = *o.prune_threshold;
  nlohmann::json config = {{"features", features},
                           {"alpha", o.alpha && !o.auto_alpha ? nlohmann::json(*o.alpha) : nlohmann::json(nullptr)},
                           {"standardize", o.standardize},
                           {"layouts", !o.no_layouts},
                           {"layout", {{"seed", o.seed}}}};

  nc_session* session = nullptr;
  check(nc_session_run(target.graph, background.graph, config.dump().c_str(), &session), "pipeline");
  const nc_status exported = nc_session_export(session, o.out_dir.c_str(), o.format.c_str());
  double alpha = 0;
  nc_session_alpha(session, &alpha);
  nc_session_free(session);
  check(exported, "export");
  std::cerr << "alpha " << alpha << ", exports in " << o.out_dir << "\n";
  return 0;
}

struct GenerateOptions {
  std::string kind;
  std::size_t n = 0;
  double p = 0.0;
  std::size_t c = 3;
  double a = 1.0;
  std::uint64_t seed = 42;
  std::string out;
};

int cmd_generate(const GenerateOptions& o) {
  nlohmann::json spec = {{"kind", o.kind}, {"n", o.n}, {"seed", o.seed}};
  if (o.kind == "gilbert") {
    spec["p"] = o.p;
  } else {
    spec["c"] = o.c;
    spec["a"] = o.a;
  }
  GraphHandle graph;
  check(nc_graph_generate(spec.dump().c_str(), &graph.graph), "generate");
  char* text = nullptr;
  check(nc_graph_write_edge_list(graph.graph, &text), "write");
  const std::string body(text);
  nc_string_free(text);
  if (o.out.empty() || o.out == "-") {
    std::cout << body;
  } else {
    std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
    if (!(file << body)) throw Failure{kExitFailure, "cannot write " + o.out};
  }
  return 0;
}

struct ServeOptions {
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<int> stream_port;
  std::optional<std::string> data_dir;
  std::optional<std::size_t> max_sessions;
  std::optional<std::size_t> max_upload_bytes;
  std::optional<std::string> log_level;
};

int cmd_serve(const ServeOptions& o) {
  nlohmann::json config = nlohmann::json::object();
  if (o.host) config["host"] = *o.host;
  if (o.port) config["port"] = *o.port;
  if (o.stream_port) config["stream_port"] = *o.stream_port;
  if (o.data_dir) config["data_dir"] = *o.data_dir;
  if (o.max_sessions) config["max_sessions"] = *o.max_sessions;
  if (o.max_upload_bytes) config["max_upload_bytes"] = *o.max_upload_bytes;
  if (o.log_level) config["log_level"] = *o.log_level;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  nc_service* service = nullptr;
  check(nc_service_create(config.dump().c_str(), &service), "service");
  if (nc_service_start(service) != NC_OK) {
    const std::string message = nc_last_error();
    nc_service_free(service);
    throw Failure{kExitFailure, "serve: " + message};
  }
  int http_port = 0, stream_port = 0;
  nc_service_ports(service, &http_port, &stream_port);
  std::cout << nlohmann::json{{"http_port", http_port}, {"stream_port", stream_port}}.dump() << std::endl;

  int received = 0;
  sigwait(&signals, &received);
  nc_service_stop(service);
  nc_service_free(service);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive network representation learning"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Learn features, fit the contrastive model and export results");
  run_cmd->add_option("target", run.target, "Target edge list")->required();
  run_cmd->add_option("background", run.background, "Background edge list")->required();
  run_cmd->add_option("--target-attributes", run.target_attributes, "Node attribute CSV for the target");
  run_cmd->add_option("--background-attributes", run.background_attributes, "Node attribute CSV for the background");
  auto* directed_flag = run_cmd->add_flag("--directed", run.directed, "Read both edge lists as directed");
  run_cmd->add_flag("--undirected", run.undirected, "Read both edge lists as undirected")->excludes(directed_flag);
  run_cmd->add_flag("--weighted", run.weighted, "Edge lists carry a third weight column");
  auto* alpha_opt = run_cmd->add_option("--alpha", run.alpha, "Contrast parameter")->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("--auto-alpha", run.auto_alpha, "Pick alpha on the default grid (default)")->excludes(alpha_opt);
  run_cmd->add_option("--hops", run.hops, "Maximum relational operator chain length")->check(CLI::Range(0, 10));
  run_cmd->add_option("--bases", run.bases, "Comma-separated base features")->delimiter(',');
  run_cmd->add_option("--summaries", run.summaries, "Comma-separated summaries: mean,sum,max,l2")->delimiter(',');
  run_cmd->add_option("--directions", run.directions, "Comma-separated directions: in,out,all")->delimiter(',');
  run_cmd->add_option("--prune-threshold", run.prune_threshold, "Feature pruning agreement threshold")
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_flag("--standardize", run.standardize, "Scale features to unit variance before fitting");
  run_cmd->add_option("--seed", run.seed, "Layout seed");
  run_cmd->add_flag("--no-layouts", run.no_layouts, "Skip the force-directed layouts");
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory");
  run_cmd->add_option("--format", run.format, "Export format")->check(CLI::IsMember({"csv", "json"}));

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic network as an edge list");
  gen_cmd->add_option("kind", gen.kind, "gilbert or price")->required()->check(CLI::IsMember({"gilbert", "price"}));
  gen_cmd->add_option("--n", gen.n, "Number of nodes")->required();
  gen_cmd->add_option("--p", gen.p, "Edge probability (gilbert)")->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--c", gen.c, "Out-links per new node (price)");
  gen_cmd->add_option("--a", gen.a, "Attractiveness offset (price)");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Output file, '-' for stdout");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the session service");
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--port", serve.port, "HTTP port, 0 for any")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--stream-port", serve.stream_port, "Streaming port, 0 for any")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--data-dir", serve.data_dir, "Dataset directory with manifest.json");
  serve_cmd->add_option("--max-sessions", serve.max_sessions, "Session limit");
  serve_cmd->add_option("--max-upload-bytes", serve.max_upload_bytes, "Request size limit");
  serve_cmd->add_option("--log-level", serve.log_level, "debug, info, warn, error or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*gen_cmd) return cmd_generate(gen);
    return cmd_serve(serve);
  } catch (const Failure& f) {
    std::cerr << "netcontrast: " << f.message << "\n";
    return f.code;
  }
}
