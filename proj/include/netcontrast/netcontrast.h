#ifndef NETCONTRAST_NETCONTRAST_H
#define NETCONTRAST_NETCONTRAST_H

#include <stddef.h>

#if defined(_WIN32)
#define NC_API __declspec(dllexport)
#else
#define NC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nc_status {
  NC_OK = 0,
  NC_ERR_INVALID_ARGUMENT = 1,
  NC_ERR_PARSE = 2,
  NC_ERR_NOT_FOUND = 3,
  NC_ERR_NUMERICAL = 4,
  NC_ERR_IO = 5,
  NC_ERR_CANCELLED = 6,
  NC_ERR_LIMIT = 7,
  NC_ERR_INTERNAL = 8
} nc_status;

typedef struct nc_graph nc_graph;
typedef struct nc_session nc_session;
typedef struct nc_service nc_service;

/* Library version, e.g. "1.0.0". */
NC_API const char* nc_version(void);

/* Symbolic name of a status, e.g. "not_found". */
NC_API const char* nc_status_name(nc_status status);

/* Message of the last failed call on this thread; empty after success. */
NC_API const char* nc_last_error(void);

/* Frees a string returned through a char** out-parameter. */
NC_API void nc_string_free(char* text);

/* Graphs. Edge-list text is "source target [weight]" per line, '#' comments.
   A graph's id names it in snapshots; file loads use the file stem. */
NC_API nc_status nc_graph_load_edge_list(const char* path, int directed, int weighted, nc_graph** out);
NC_API nc_status nc_graph_parse_edge_list(const char* text, int directed, int weighted, nc_graph** out);
/* Replaces the graph's attribute table with the CSV file's columns. */
NC_API nc_status nc_graph_load_attributes(nc_graph* graph, const char* path);
/* spec_json: {"kind":"gilbert","n":..,"p":..,"seed":..} or
   {"kind":"price","n":..,"c":..,"a":..,"seed":..}. */
NC_API nc_status nc_graph_generate(const char* spec_json, nc_graph** out);
NC_API nc_status nc_graph_set_id(nc_graph* graph, const char* id);
NC_API nc_status nc_graph_node_count(const nc_graph* graph, size_t* out);
NC_API nc_status nc_graph_edge_count(const nc_graph* graph, size_t* out);
NC_API nc_status nc_graph_is_directed(const nc_graph* graph, int* out);
NC_API nc_status nc_graph_write_edge_list(const nc_graph* graph, char** out);
NC_API nc_status nc_graph_to_json(const nc_graph* graph, char** out);
NC_API void nc_graph_free(nc_graph* graph);

/* Sessions. config_json may be NULL for defaults; see the pipeline config in
   the protocol schema. The session keeps its own references to the graphs. */
NC_API nc_status nc_session_run(const nc_graph* target, const nc_graph* background, const char* config_json,
                                nc_session** out);
NC_API nc_status nc_session_update_alpha(nc_session* session, double alpha, int* rotation_reset);
NC_API nc_status nc_session_rotate(nc_session* session, double x1, double y1, double x2, double y2,
                                   double* theta);
NC_API nc_status nc_session_alpha(const nc_session* session, double* out);
NC_API nc_status nc_session_snapshot(const nc_session* session, int include_matrices, char** out);
/* format: "csv" or "json". Creates dir if needed. */
NC_API nc_status nc_session_export(const nc_session* session, const char* dir, const char* format);
NC_API void nc_session_free(nc_session* session);

/* Service. config_json keys: host, port, stream_port, data_dir, max_sessions,
   max_upload_bytes, log_level. Environment overrides are applied first, then
   the keys present in config_json. */
NC_API nc_status nc_service_create(const char* config_json, nc_service** out);
/* One protocol request in, one terminal reply out. Progress events are
   collected into reply.events. */
NC_API nc_status nc_service_handle(nc_service* service, const char* request_json, char** reply_json);
/* Binds both ports and serves in background threads. */
NC_API nc_status nc_service_start(nc_service* service);
NC_API nc_status nc_service_ports(const nc_service* service, int* http_port, int* stream_port);
/* Blocks until nc_service_stop is called from another thread. */
NC_API nc_status nc_service_wait(nc_service* service);
NC_API nc_status nc_service_stop(nc_service* service);
NC_API void nc_service_free(nc_service* service);

#ifdef __cplusplus
}
#endif

#endif
