#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "service.hpp"

namespace httplib {
class Server;
}

namespace netcontrast::service {

/// HTTP request/response on config.port and newline-delimited JSON over TCP
/// on config.stream_port. Port 0 picks a free port.
class Server {
 public:
  explicit Server(Service& service);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds both ports and starts serving. Throws Error(io) when a port is busy.
  void start();
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  int port() const { return port_; }
  int stream_port() const { return stream_port_; }

 private:
  struct Connection;

  void accept_loop();
  void serve_connection(std::shared_ptr<Connection> connection);

  Service& service_;
  std::unique_ptr<httplib::Server> http_;
  std::thread http_thread_;
  int listen_fd_ = -1;
  std::thread accept_thread_;
  int port_ = 0;
  int stream_port_ = 0;

  std::mutex mutex_;
  std::condition_variable stopped_cv_;
  bool running_ = false;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::vector<std::thread> connection_threads_;
};

}  // namespace netcontrast::service
