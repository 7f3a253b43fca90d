#include "netcontrast/netcontrast.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "export.hpp"
#include "generators.hpp"
#include "graph.hpp"
#include "server.hpp"
#include "service.hpp"
#include "session.hpp"

using namespace netcontrast;

struct nc_graph {
  std::string id;
  std::shared_ptr<const Graph> graph;
};

struct nc_session {
  std::unique_ptr<Session> session;
};

struct nc_service {
  std::unique_ptr<service::Service> service;
  std::unique_ptr<service::Server> server;
  std::mutex mutex;
};

namespace {

thread_local std::string last_error;

nc_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return NC_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse_error: return NC_ERR_PARSE;
    case ErrorCode::not_found: return NC_ERR_NOT_FOUND;
    case ErrorCode::numerical: return NC_ERR_NUMERICAL;
    case ErrorCode::io: return NC_ERR_IO;
    case ErrorCode::cancelled: return NC_ERR_CANCELLED;
    case ErrorCode::limit: return NC_ERR_LIMIT;
    case ErrorCode::internal: return NC_ERR_INTERNAL;
  }
  return NC_ERR_INTERNAL;
}

template <typename F>
nc_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return NC_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const service::ServiceError& e) {
    last_error = e.code() + ": " + e.what();
    return NC_ERR_INVALID_ARGUMENT;
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return NC_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NC_ERR_LIMIT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NC_ERR_INTERNAL;
  }
}

void require(bool condition, const char* message) {
  if (!condition) fail(ErrorCode::invalid_argument, message);
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.data(), text.size() + 1);
  return out;
}

EdgeListOptions edge_options(int directed, int weighted) {
  EdgeListOptions options;
  options.directed = directed != 0;
  options.has_weights = weighted != 0;
  return options;
}

}  // namespace

extern "C" {

const char* nc_version(void) { return "1.0.0"; }

const char* nc_status_name(nc_status status) {
  switch (status) {
    case NC_OK: return "ok";
    case NC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case NC_ERR_PARSE: return "parse_error";
    case NC_ERR_NOT_FOUND: return "not_found";
    case NC_ERR_NUMERICAL: return "numerical_error";
    case NC_ERR_IO: return "io_error";
    case NC_ERR_CANCELLED: return "cancelled";
    case NC_ERR_LIMIT: return "limit_exceeded";
    case NC_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* nc_last_error(void) { return last_error.c_str(); }

void nc_string_free(char* text) { std::free(text); }

nc_status nc_graph_load_edge_list(const char* path, int directed, int weighted, nc_graph** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    auto g = std::make_unique<nc_graph>();
    g->graph = std::make_shared<const Graph>(load_edge_list(read_text_file(path), edge_options(directed, weighted)));
    g->id = std::filesystem::path(path).stem().string();
    *out = g.release();
  });
}

nc_status nc_graph_parse_edge_list(const char* text, int directed, int weighted, nc_graph** out) {
  return guarded([&] {
    require(text && out, "text and out are required");
    auto g = std::make_unique<nc_graph>();
    g->graph = std::make_shared<const Graph>(load_edge_list(text, edge_options(directed, weighted)));
    g->id = "graph";
    *out = g.release();
  });
}

nc_status nc_graph_load_attributes(nc_graph* graph, const char* path) {
  return guarded([&] {
    require(graph && path, "graph and path are required");
    graph->graph = std::make_shared<const Graph>(load_attributes(*graph->graph, read_text_file(path)));
  });
}

nc_status nc_graph_generate(const char* spec_json, nc_graph** out) {
  return guarded([&] {
    require(spec_json && out, "spec and out are required");
    const GeneratorSpec spec = generator_spec_from_json(nlohmann::json::parse(spec_json));
    auto g = std::make_unique<nc_graph>();
    g->graph = std::make_shared<const Graph>(generate(spec));
    g->id = spec.kind == GeneratorKind::price ? "price" : "gilbert";
    *out = g.release();
  });
}

nc_status nc_graph_set_id(nc_graph* graph, const char* id) {
  return guarded([&] {
    require(graph && id && *id, "graph and a non-empty id are required");
    graph->id = id;
  });
}

nc_status nc_graph_node_count(const nc_graph* graph, size_t* out) {
  return guarded([&] {
    require(graph && out, "graph and out are required");
    *out = graph->graph->node_count();
  });
}

nc_status nc_graph_edge_count(const nc_graph* graph, size_t* out) {
  return guarded([&] {
    require(graph && out, "graph and out are required");
    *out = graph->graph->edge_count();
  });
}

nc_status nc_graph_is_directed(const nc_graph* graph, int* out) {
  return guarded([&] {
    require(graph && out, "graph and out are required");
    *out = graph->graph->directed() ? 1 : 0;
  });
}

nc_status nc_graph_write_edge_list(const nc_graph* graph, char** out) {
  return guarded([&] {
    require(graph && out, "graph and out are required");
    *out = copy_string(write_edge_list(*graph->graph));
  });
}

nc_status nc_graph_to_json(const nc_graph* graph, char** out) {
  return guarded([&] {
    require(graph && out, "graph and out are required");
    *out = copy_string(nlohmann::json(*graph->graph).dump());
  });
}

void nc_graph_free(nc_graph* graph) { delete graph; }

nc_status nc_session_run(const nc_graph* target, const nc_graph* background, const char* config_json,
                         nc_session** out) {
  return guarded([&] {
    require(target && background && out, "target, background and out are required");
    const PipelineConfig config =
        config_json ? pipeline_config_from_json(nlohmann::json::parse(config_json)) : PipelineConfig{};
    auto s = std::make_unique<nc_session>();
    s->session = std::make_unique<Session>(Session::run_pipeline(
        "run", {target->id, target->graph}, {background->id, background->graph}, config));
    *out = s.release();
  });
}

nc_status nc_session_update_alpha(nc_session* session, double alpha, int* rotation_reset) {
  return guarded([&] {
    require(session, "session is required");
    const bool reset = session->session->update_alpha(alpha);
    if (rotation_reset) *rotation_reset = reset ? 1 : 0;
  });
}

nc_status nc_session_rotate(nc_session* session, double x1, double y1, double x2, double y2, double* theta) {
  return guarded([&] {
    require(session, "session is required");
    const double t = session->session->rotate_embedding({x1, y1}, {x2, y2});
    if (theta) *theta = t;
  });
}

nc_status nc_session_alpha(const nc_session* session, double* out) {
  return guarded([&] {
    require(session && out, "session and out are required");
    *out = session->session->model().alpha;
  });
}

nc_status nc_session_snapshot(const nc_session* session, int include_matrices, char** out) {
  return guarded([&] {
    require(session && out, "session and out are required");
    *out = copy_string(session->session->snapshot(include_matrices != 0).dump());
  });
}

nc_status nc_session_export(const nc_session* session, const char* dir, const char* format) {
  return guarded([&] {
    require(session && dir, "session and dir are required");
    write_exports(*session->session, dir, export_format_from_string(format ? format : "csv"));
  });
}

void nc_session_free(nc_session* session) { delete session; }

nc_status nc_service_create(const char* config_json, nc_service** out) {
  return guarded([&] {
    require(out, "out is required");
    service::ServiceConfig config = service::apply_env({});
    if (config_json) {
      const auto j = nlohmann::json::parse(config_json);
      config.host = j.value("host", config.host);
      config.port = j.value("port", config.port);
      config.stream_port = j.value("stream_port", config.stream_port);
      config.data_dir = j.value("data_dir", config.data_dir);
      config.max_sessions = j.value("max_sessions", config.max_sessions);
      config.max_upload_bytes = j.value("max_upload_bytes", config.max_upload_bytes);
      if (j.contains("log_level")) config.log_level = service::log_level_from_string(j.at("log_level").get<std::string>());
    }
    require(config.port >= 0 && config.port <= 65535 && config.stream_port >= 0 && config.stream_port <= 65535,
            "ports must be in 0..65535");
    auto s = std::make_unique<nc_service>();
    s->service = std::make_unique<service::Service>(config);
    *out = s.release();
  });
}

nc_status nc_service_handle(nc_service* service, const char* request_json, char** reply_json) {
  return guarded([&] {
    require(service && request_json && reply_json, "service, request and reply are required");
    nlohmann::json events = nlohmann::json::array();
    std::mutex events_mutex;
    nlohmann::json reply = service->service->handle_text(request_json, [&](const nlohmann::json& event) {
      std::lock_guard lock(events_mutex);
      events.push_back(event);
    });
    if (!events.empty()) reply["events"] = std::move(events);
    *reply_json = copy_string(reply.dump());
  });
}

nc_status nc_service_start(nc_service* service) {
  return guarded([&] {
    require(service, "service is required");
    std::lock_guard lock(service->mutex);
    require(!service->server, "service already started");
    auto server = std::make_unique<service::Server>(*service->service);
    server->start();
    service->server = std::move(server);
  });
}

nc_status nc_service_ports(const nc_service* service, int* http_port, int* stream_port) {
  return guarded([&] {
    require(service && service->server, "service is not started");
    if (http_port) *http_port = service->server->port();
    if (stream_port) *stream_port = service->server->stream_port();
  });
}

nc_status nc_service_wait(nc_service* service) {
  return guarded([&] {
    require(service && service->server, "service is not started");
    service->server->wait();
  });
}

nc_status nc_service_stop(nc_service* service) {
  return guarded([&] {
    require(service, "service is required");
    if (service->server) service->server->stop();
  });
}

void nc_service_free(nc_service* service) {
  if (!service) return;
  if (service->server) service->server->stop();
  delete service;
}

}  // extern "C"
