#include "service.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>

#include "error.hpp"
#include "generators.hpp"

namespace netcontrast::service {

namespace {

using nlohmann::json;

constexpr int kProtocolVersion = 1;
constexpr std::size_t kMaxGeneratedNodes = 2'000'000;

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json embedding_json(const Session& s) {
  return {{"target", matrix_rows(s.embedding().target)}, {"background", matrix_rows(s.embedding().background)}};
}

json selection_json(const Session& s) {
  json items = json::array();
  for (const auto& item : s.selection()) items.push_back({{"network", to_string(item.network)}, {"node", item.node}});
  return items;
}

const json& payload_of(const json& request) {
  static const json empty = json::object();
  const auto it = request.find("payload");
  if (it == request.end() || it->is_null()) return empty;
  if (!it->is_object()) throw ServiceError("bad_request", "payload must be an object");
  return *it;
}

int feature_arg(const json& payload, const Session& s) {
  return payload.contains("feature") ? payload.at("feature").get<int>() : s.current_feature();
}

std::optional<int> env_int(const char* name) {
  const char* text = std::getenv(name);
  if (!text || !*text) return std::nullopt;
  char* end = nullptr;
  const long value = std::strtol(text, &end, 10);
  if (*end != '\0' || value < 0 || value > 65535) fail(ErrorCode::invalid_argument, std::string(name) + " must be a port number");
  return static_cast<int>(value);
}

}  // namespace

ServiceConfig apply_env(ServiceConfig config) {
  if (auto port = env_int("NETCONTRAST_PORT")) config.port = *port;
  if (auto port = env_int("NETCONTRAST_STREAM_PORT")) config.stream_port = *port;
  if (const char* dir = std::getenv("NETCONTRAST_DATA_DIR"); dir && *dir) config.data_dir = dir;
  if (const char* level = std::getenv("NETCONTRAST_LOG_LEVEL"); level && *level)
    config.log_level = log_level_from_string(level);
  return config;
}

struct Service::Slot {
  std::string id;
  GraphRef target;
  GraphRef background;

  std::mutex writer;
  std::mutex state_mutex;
  std::shared_ptr<const Session> state;

  std::mutex alpha_mutex;
  double pending_alpha = 0.0;
  std::uint64_t requested_seq = 0;
  std::uint64_t applied_seq = 0;

  std::shared_ptr<const Session> current() {
    std::lock_guard lock(state_mutex);
    return state;
  }

  void publish(Session session) {
    auto next = std::make_shared<const Session>(std::move(session));
    std::lock_guard lock(state_mutex);
    state = std::move(next);
  }
};

Service::Service(ServiceConfig config, std::ostream* log)
    : config_(std::move(config)), logger_(log, config_.log_level), datasets_(config_.data_dir) {
  handlers_ = {
      {"ping", &Service::ping},
      {"list_datasets", &Service::list_datasets},
      {"upload_graph", &Service::upload_graph},
      {"generate", &Service::generate_graph},
      {"create_session", &Service::create_session},
      {"run_pipeline", &Service::run_pipeline},
      {"update_alpha", &Service::update_alpha},
      {"rotate", &Service::rotate},
      {"select_feature", &Service::select_feature},
      {"feature_stages", &Service::feature_stages},
      {"histogram", &Service::histogram},
      {"set_selection", &Service::set_selection},
      {"get_snapshot", &Service::get_snapshot},
      {"load_snapshot", &Service::load_snapshot},
      {"cancel", &Service::cancel},
  };
}

Service::~Service() { cancel_all(); }

void Service::cancel_all() {
  std::lock_guard lock(requests_mutex_);
  for (auto& [key, source] : in_flight_) source.request_stop();
}

struct Service::Admitted {
  Service* service = nullptr;
  json request;
  json id;
  std::optional<json> early_reply;
  Handler handler = nullptr;
  std::uint64_t alpha_seq = 0;
  std::stop_source stop;
  bool registered = false;
  std::multimap<std::string, std::stop_source>::iterator entry;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  ~Admitted() { unregister(); }

  void unregister() {
    if (!registered) return;
    std::lock_guard lock(service->requests_mutex_);
    service->in_flight_.erase(entry);
    registered = false;
  }
};

namespace {

json error_reply(const json& id, const std::string& code, const std::string& message) {
  return {{"id", id}, {"type", "error"}, {"error", {{"code", code}, {"message", message}}}};
}

}  // namespace

std::shared_ptr<Service::Admitted> Service::admit(std::string_view text) {
  if (text.size() > config_.max_upload_bytes) {
    auto admitted = std::make_shared<Admitted>();
    admitted->service = this;
    admitted->early_reply = error_reply(nullptr, "payload_too_large",
                                        "request of " + std::to_string(text.size()) + " bytes exceeds the limit of " +
                                            std::to_string(config_.max_upload_bytes));
    return admitted;
  }
  json request;
  try {
    request = json::parse(text);
  } catch (const json::parse_error& e) {
    auto admitted = std::make_shared<Admitted>();
    admitted->service = this;
    admitted->early_reply = error_reply(nullptr, "bad_request", e.what());
    return admitted;
  }
  return admit(std::move(request));
}

std::shared_ptr<Service::Admitted> Service::admit(json request) {
  auto admitted = std::make_shared<Admitted>();
  admitted->service = this;
  admitted->request = std::move(request);
  const json& r = admitted->request;
  admitted->id = r.is_object() ? r.value("id", json(nullptr)) : json(nullptr);
  try {
    if (!r.is_object()) throw ServiceError("bad_request", "request must be a JSON object");
    const auto type = r.find("type");
    if (type == r.end() || !type->is_string()) throw ServiceError("bad_request", "request needs a string type");
    const auto handler = handlers_.find(type->get<std::string>());
    if (handler == handlers_.end())
      throw ServiceError("unknown_type", "unknown message type '" + type->get<std::string>() + "'");
    admitted->handler = handler->second;
    payload_of(r);

    if (handler->first == "update_alpha") {
      const double alpha = payload_of(r).at("alpha").get<double>();
      if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ServiceError("invalid_argument", "alpha must be finite and non-negative");
      auto s = slot(r);
      ready_session(*s);
      std::lock_guard lock(s->alpha_mutex);
      admitted->alpha_seq = ++s->requested_seq;
      s->pending_alpha = alpha;
    }
  } catch (const ServiceError& e) {
    admitted->early_reply = error_reply(admitted->id, e.code(), e.what());
  } catch (const json::exception& e) {
    admitted->early_reply = error_reply(admitted->id, "bad_request", e.what());
  }
  if (!admitted->early_reply) {
    std::lock_guard lock(requests_mutex_);
    admitted->entry = in_flight_.emplace(admitted->id.dump(), admitted->stop);
    admitted->registered = true;
  }
  return admitted;
}

json Service::complete(const std::shared_ptr<Admitted>& admitted, const EventSink& events) {
  json reply;
  if (admitted->early_reply) {
    reply = *admitted->early_reply;
  } else {
    const json& request = admitted->request;
    try {
      const Call call{request, payload_of(request), events, admitted->stop.get_token(), admitted->alpha_seq};
      reply = {{"id", admitted->id}, {"type", "result"}, {"result", (this->*(admitted->handler))(call)}};
    } catch (const ServiceError& e) {
      reply = error_reply(admitted->id, e.code(), e.what());
    } catch (const Error& e) {
      reply = error_reply(admitted->id, std::string(to_string(e.code())), e.what());
    } catch (const json::exception& e) {
      reply = error_reply(admitted->id, "bad_request", e.what());
    } catch (const std::exception& e) {
      reply = error_reply(admitted->id, "internal_error", e.what());
    }
  }
  admitted->unregister();

  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - admitted->started).count();
  json fields = {{"id", admitted->id}, {"ms", ms}};
  const json& request = admitted->request;
  if (request.is_object() && request.contains("type")) fields["type"] = request.at("type");
  if (request.is_object() && request.contains("session")) fields["session"] = request.at("session");
  if (reply.at("type") == "result") {
    logger_.write(LogLevel::info, "request", std::move(fields));
  } else {
    fields["code"] = reply["error"]["code"];
    fields["message"] = reply["error"]["message"];
    logger_.write(LogLevel::warn, "request_failed", std::move(fields));
  }
  return reply;
}

json Service::handle(const json& request, const EventSink& events) { return complete(admit(request), events); }

json Service::handle_text(std::string_view text, const EventSink& events) { return complete(admit(text), events); }

std::shared_ptr<Service::Slot> Service::find_slot(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  const auto found = sessions_.find(id);
  if (found == sessions_.end()) throw ServiceError("session_not_found", "no session '" + id + "'");
  return found->second;
}

std::shared_ptr<Service::Slot> Service::slot(const json& request) {
  const auto it = request.find("session");
  if (it == request.end() || !it->is_string()) throw ServiceError("bad_request", "request needs a session id");
  return find_slot(it->get<std::string>());
}

std::shared_ptr<const Session> Service::ready_session(Slot& slot) {
  auto state = slot.current();
  if (!state) throw ServiceError("session_not_ready", "session '" + slot.id + "' has not run the pipeline");
  return state;
}

std::string Service::next_session_id() {
  for (;;) {
    std::string id = "s" + std::to_string(++session_counter_);
    if (!sessions_.count(id)) return id;
  }
}

std::uint64_t Service::add_listener(EventSink sink) {
  std::lock_guard lock(listeners_mutex_);
  listeners_.emplace(++listener_counter_, std::move(sink));
  return listener_counter_;
}

void Service::remove_listener(std::uint64_t token) {
  std::lock_guard lock(listeners_mutex_);
  listeners_.erase(token);
}

void Service::broadcast(const json& event) {
  std::lock_guard lock(listeners_mutex_);
  for (const auto& [token, sink] : listeners_) sink(event);
}

json Service::ping(const Call&) {
  return {{"pong", true}, {"protocol", kProtocolVersion}};
}

json Service::list_datasets(const Call&) {
  return {{"datasets", datasets_.list()}};
}

json Service::upload_graph(const Call& call) {
  const json& payload = call.payload;
  const std::string format = payload.value("format", std::string("edgelist"));
  const json& content = payload.at("content");
  Graph graph;
  if (format == "edgelist") {
    const auto& text = content.get_ref<const std::string&>();
    if (text.size() > config_.max_upload_bytes) throw ServiceError("payload_too_large", "graph content exceeds the upload limit");
    EdgeListOptions options;
    options.directed = payload.value("directed", false);
    options.has_weights = payload.value("weighted", false);
    graph = load_edge_list(text, options);
  } else if (format == "json") {
    graph = graph_from_json(content);
  } else {
    throw ServiceError("bad_request", "format must be edgelist or json");
  }
  if (payload.contains("attributes_csv")) {
    const auto& csv = payload.at("attributes_csv").get_ref<const std::string&>();
    if (csv.size() > config_.max_upload_bytes) throw ServiceError("payload_too_large", "attribute content exceeds the upload limit");
    graph = load_attributes(graph, csv);
  }
  const GraphRef ref =
      datasets_.add_graph(payload.value("id", std::string{}), graph, payload.value("description", std::string{}));
  return {{"dataset", ref.id}, {"nodes", ref.graph->node_count()}, {"edges", ref.graph->edge_count()}};
}

json Service::generate_graph(const Call& call) {
  const json& payload = call.payload;
  const GeneratorSpec spec = generator_spec_from_json(payload.at("spec"));
  if (spec.n > kMaxGeneratedNodes) throw ServiceError("payload_too_large", "generator n exceeds " + std::to_string(kMaxGeneratedNodes));
  const GraphRef ref = datasets_.add_generated(payload.value("id", std::string{}), spec);
  return {{"dataset", ref.id}, {"nodes", ref.graph->node_count()}, {"edges", ref.graph->edge_count()}};
}

json Service::create_session(const Call& call) {
  const json& payload = call.payload;
  auto slot = std::make_shared<Slot>();
  slot->target = datasets_.get(payload.at("target").get<std::string>());
  slot->background = datasets_.get(payload.at("background").get<std::string>());
  std::lock_guard lock(sessions_mutex_);
  if (sessions_.size() >= config_.max_sessions)
    throw ServiceError("session_limit", "at most " + std::to_string(config_.max_sessions) + " sessions");
  slot->id = next_session_id();
  sessions_[slot->id] = slot;
  return {{"session", slot->id}};
}

json Service::run_pipeline(const Call& call) {
  const json& payload = call.payload;
  auto s = slot(call.request);
  const PipelineConfig config = payload.contains("config") && !payload.at("config").is_null()
                                    ? pipeline_config_from_json(payload.at("config"))
                                    : PipelineConfig{};
  const json id = call.request.value("id", json(nullptr));
  ProgressFn progress;
  if (call.events)
    progress = [&](std::string_view phase, double fraction) {
      call.events({{"id", id}, {"type", "progress"}, {"phase", phase}, {"fraction", fraction}});
    };
  std::lock_guard writer(s->writer);
  Session next = Session::run_pipeline(s->id, s->target, s->background, config, progress, call.stop);
  json snapshot = next.snapshot();
  s->publish(std::move(next));
  return snapshot;
}

json Service::update_alpha(const Call& call) {
  auto s = slot(call.request);
  const std::uint64_t mine = call.alpha_seq;
  std::lock_guard writer(s->writer);
  double target_alpha = 0.0;
  std::uint64_t target_seq = 0;
  {
    std::lock_guard lock(s->alpha_mutex);
    if (s->applied_seq >= mine) {
      const auto state = s->current();
      return {{"alpha", state->model().alpha},
              {"coalesced", mine < s->applied_seq},
              {"recomputed", false},
              {"rotation_reset", false},
              {"model", state->model()},
              {"embedding", embedding_json(*state)}};
    }
    target_alpha = s->pending_alpha;
    target_seq = s->requested_seq;
  }
  Session next = *s->current();
  const bool reset = next.update_alpha(target_alpha);
  json result = {{"alpha", target_alpha},
                 {"coalesced", target_seq != mine},
                 {"recomputed", true},
                 {"rotation_reset", reset},
                 {"model", next.model()},
                 {"embedding", embedding_json(next)}};
  s->publish(std::move(next));
  {
    std::lock_guard lock(s->alpha_mutex);
    s->applied_seq = target_seq;
  }
  return result;
}

json Service::rotate(const Call& call) {
  const json& line = call.payload.at("line");
  if (!line.is_array() || line.size() != 2 || line[0].size() != 2 || line[1].size() != 2)
    throw ServiceError("bad_request", "line must be [[x1, y1], [x2, y2]]");
  const Eigen::Vector2d a(line[0][0].get<double>(), line[0][1].get<double>());
  const Eigen::Vector2d b(line[1][0].get<double>(), line[1][1].get<double>());
  auto s = slot(call.request);
  std::lock_guard writer(s->writer);
  Session next = *ready_session(*s);
  const double theta = next.rotate_embedding(a, b);
  json result = {{"theta", theta}, {"model", next.model()}, {"embedding", embedding_json(next)}};
  s->publish(std::move(next));
  return result;
}

json Service::select_feature(const Call& call) {
  const int feature = call.payload.at("feature").get<int>();
  auto s = slot(call.request);
  std::lock_guard writer(s->writer);
  Session next = *ready_session(*s);
  next.select_feature(feature);
  const ScaledPair colors = next.feature_colors(feature);
  s->publish(std::move(next));
  return {{"feature", feature},
          {"colors", {{"target", vector_json(colors.target)}, {"background", vector_json(colors.background)}}}};
}

json Service::feature_stages(const Call& call) {
  const json& payload = call.payload;
  auto state = ready_session(*slot(call.request));
  const NetworkTag which = network_tag_from_string(payload.value("network", std::string("target")));
  json stages = json::array();
  for (const auto& stage : state->feature_stages(feature_arg(payload, *state), which)) stages.push_back(vector_json(stage));
  return {{"stages", std::move(stages)}};
}

json Service::histogram(const Call& call) {
  const json& payload = call.payload;
  auto state = ready_session(*slot(call.request));
  const std::string scale = payload.value("y_scale", std::string("linear"));
  if (scale != "linear" && scale != "log") throw ServiceError("bad_request", "y_scale must be linear or log");
  const Histogram h = state->histogram(feature_arg(payload, *state), payload.value("bins", 30),
                                       scale == "log" ? YScale::log : YScale::linear);
  return {{"centers", h.centers}, {"target", h.target}, {"background", h.background}, {"y_scale", scale}};
}

json Service::set_selection(const Call& call) {
  std::vector<SelectionItem> items;
  for (const auto& item : call.payload.at("items"))
    items.push_back({network_tag_from_string(item.at("network").get<std::string>()), item.at("node").get<NodeId>()});
  auto s = slot(call.request);
  json selection;
  {
    std::lock_guard writer(s->writer);
    Session next = *ready_session(*s);
    next.set_selection(items);
    selection = selection_json(next);
    s->publish(std::move(next));
  }
  broadcast({{"type", "selection"}, {"session", s->id}, {"selection", selection}});
  return {{"selection", std::move(selection)}};
}

json Service::get_snapshot(const Call& call) {
  auto state = ready_session(*slot(call.request));
  return state->snapshot(call.payload.value("matrices", false));
}

json Service::load_snapshot(const Call& call) {
  const json& snapshot = call.payload.at("snapshot");
  const std::string id = snapshot.at("id").get<std::string>();
  GraphRef target = datasets_.get(snapshot.at("target").at("dataset").get<std::string>());
  GraphRef background = datasets_.get(snapshot.at("background").at("dataset").get<std::string>());
  Session session = Session::from_snapshot(snapshot, target, background);

  std::shared_ptr<Slot> s;
  {
    std::lock_guard lock(sessions_mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) {
      s = it->second;
      if (s->target.id != target.id || s->background.id != background.id)
        throw ServiceError("bad_request", "session '" + id + "' exists with different datasets");
    } else {
      if (sessions_.size() >= config_.max_sessions)
        throw ServiceError("session_limit", "at most " + std::to_string(config_.max_sessions) + " sessions");
      s = std::make_shared<Slot>();
      s->id = id;
      s->target = target;
      s->background = background;
      sessions_[id] = s;
    }
  }
  std::lock_guard writer(s->writer);
  s->publish(std::move(session));
  return {{"session", id}};
}

json Service::cancel(const Call& call) {
  const std::string key = call.payload.at("request").dump();
  bool found = false;
  std::lock_guard lock(requests_mutex_);
  for (auto [it, end] = in_flight_.equal_range(key); it != end; ++it) {
    it->second.request_stop();
    found = true;
  }
  return {{"cancelled", found}};
}

}  // namespace netcontrast::service
