#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>

#include <nlohmann/json.hpp>

#include "datasets.hpp"
#include "log.hpp"
#include "service_error.hpp"
#include "session.hpp"

namespace netcontrast::service {

using EventSink = std::function<void(const nlohmann::json& event)>;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8765;         // HTTP request/response
  int stream_port = 8766;  // persistent NDJSON over TCP
  std::string data_dir = "data";
  std::size_t max_sessions = 16;
  std::size_t max_upload_bytes = 64u << 20;
  LogLevel log_level = LogLevel::info;
};

/// NETCONTRAST_PORT, NETCONTRAST_STREAM_PORT, NETCONTRAST_DATA_DIR and
/// NETCONTRAST_LOG_LEVEL override the given values.
ServiceConfig apply_env(ServiceConfig config);

/// Transport-independent message dispatcher. handle() is safe to call from
/// many threads; messages for one session are serialized, different sessions
/// run concurrently.
class Service {
 public:
  explicit Service(ServiceConfig config, std::ostream* log = nullptr);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceConfig& config() const { return config_; }
  DatasetStore& datasets() { return datasets_; }
  Logger& logger() { return logger_; }

  struct Admitted;

  /// First half of handling, cheap and meant to run in arrival order: parses,
  /// registers the request for cancel and orders update_alpha requests.
  std::shared_ptr<Admitted> admit(std::string_view text);
  std::shared_ptr<Admitted> admit(nlohmann::json request);

  /// Second half: runs the request and returns the terminal reply. Progress
  /// events go to `events` before the reply is returned.
  nlohmann::json complete(const std::shared_ptr<Admitted>& admitted, const EventSink& events = {});

  /// admit + complete. Malformed and oversized text gets an error reply.
  nlohmann::json handle(const nlohmann::json& request, const EventSink& events = {});
  nlohmann::json handle_text(std::string_view text, const EventSink& events = {});

  /// Unsolicited events (selection changes) go to every listener.
  std::uint64_t add_listener(EventSink sink);
  void remove_listener(std::uint64_t token);

  /// Requests cancellation of every in-flight request.
  void cancel_all();

 private:
  struct Slot;
  struct Call {
    const nlohmann::json& request;
    const nlohmann::json& payload;
    const EventSink& events;
    std::stop_token stop;
    std::uint64_t alpha_seq;
  };
  using Handler = nlohmann::json (Service::*)(const Call& call);

  std::shared_ptr<Slot> find_slot(const std::string& id);
  std::shared_ptr<Slot> slot(const nlohmann::json& request);
  std::shared_ptr<const Session> ready_session(Slot& slot);
  std::string next_session_id();
  void broadcast(const nlohmann::json& event);

  nlohmann::json ping(const Call& call);
  nlohmann::json list_datasets(const Call& call);
  nlohmann::json upload_graph(const Call& call);
  nlohmann::json generate_graph(const Call& call);
  nlohmann::json create_session(const Call& call);
  nlohmann::json run_pipeline(const Call& call);
  nlohmann::json update_alpha(const Call& call);
  nlohmann::json rotate(const Call& call);
  nlohmann::json select_feature(const Call& call);
  nlohmann::json feature_stages(const Call& call);
  nlohmann::json histogram(const Call& call);
  nlohmann::json set_selection(const Call& call);
  nlohmann::json get_snapshot(const Call& call);
  nlohmann::json load_snapshot(const Call& call);
  nlohmann::json cancel(const Call& call);

  ServiceConfig config_;
  Logger logger_;
  DatasetStore datasets_;
  std::map<std::string, Handler, std::less<>> handlers_;

  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t session_counter_ = 0;

  std::mutex requests_mutex_;
  std::multimap<std::string, std::stop_source> in_flight_;

  std::mutex listeners_mutex_;
  std::map<std::uint64_t, EventSink> listeners_;
  std::uint64_t listener_counter_ = 0;
};

}  // namespace netcontrast::service
