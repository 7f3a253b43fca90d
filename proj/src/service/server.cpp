#include "server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <httplib.h>

#include "error.hpp"
#include "protocol_schema.hpp"

namespace netcontrast::service {

namespace {

int open_listener(const std::string& host, int port, int* bound_port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) fail(ErrorCode::io, std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    fail(ErrorCode::invalid_argument, "stream host must be an IPv4 address, got '" + host + "'");
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 64) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(fd);
    fail(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port) + ": " + reason);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  *bound_port = ntohs(addr.sin_port);
  return fd;
}

}  // namespace

struct Server::Connection {
  int fd = -1;
  std::mutex write_mutex;
  bool broken = false;

  std::mutex workers_mutex;
  std::condition_variable workers_cv;
  int workers = 0;

  void send_line(const nlohmann::json& message) {
    const std::string text = message.dump() + "\n";
    std::lock_guard lock(write_mutex);
    std::size_t sent = 0;
    while (!broken && sent < text.size()) {
      const ssize_t n = ::send(fd, text.data() + sent, text.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        broken = true;
        break;
      }
      sent += static_cast<std::size_t>(n);
    }
  }
};

Server::Server(Service& service) : service_(service) {}

Server::~Server() { stop(); }

void Server::start() {
  const auto& config = service_.config();
  http_ = std::make_unique<httplib::Server>();
  http_->set_payload_max_length(config.max_upload_bytes + 4096);
  http_->set_socket_options([](int sock) {
    const int one = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  });

  http_->Post("/rpc", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json events = nlohmann::json::array();
    std::mutex events_mutex;
    nlohmann::json reply = service_.handle_text(req.body, [&](const nlohmann::json& event) {
      std::lock_guard lock(events_mutex);
      events.push_back(event);
    });
    if (!events.empty()) reply["events"] = std::move(events);
    res.set_content(reply.dump(), "application/json");
  });
  http_->Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok","protocol":1})", "application/json");
  });
  http_->Get("/schema", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(std::string(protocol_schema), "application/json");
  });

  if (config.port == 0) {
    port_ = http_->bind_to_any_port(config.host);
    if (port_ < 0) fail(ErrorCode::io, "cannot bind HTTP on " + config.host);
  } else {
    if (!http_->bind_to_port(config.host, config.port))
      fail(ErrorCode::io, "cannot listen on " + config.host + ":" + std::to_string(config.port) + " (port busy?)");
    port_ = config.port;
  }
  try {
    listen_fd_ = open_listener(config.host, config.stream_port, &stream_port_);
  } catch (...) {
    http_->stop();
    throw;
  }

  {
    std::lock_guard lock(mutex_);
    running_ = true;
  }
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  accept_thread_ = std::thread([this] { accept_loop(); });
  http_->wait_until_ready();
  service_.logger().write(LogLevel::info, "listening",
                          {{"host", config.host}, {"port", port_}, {"stream_port", stream_port_},
                           {"data_dir", config.data_dir}});
}

void Server::accept_loop() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    auto connection = std::make_shared<Connection>();
    connection->fd = fd;
    std::lock_guard lock(mutex_);
    if (!running_) {
      ::close(fd);
      return;
    }
    connections_.push_back(connection);
    connection_threads_.emplace_back([this, connection] { serve_connection(connection); });
  }
}

void Server::serve_connection(std::shared_ptr<Connection> connection) {
  const std::uint64_t listener =
      service_.add_listener([connection](const nlohmann::json& event) { connection->send_line(event); });
  const std::size_t max_line = service_.config().max_upload_bytes + 4096;

  auto dispatch = [this, connection](std::string_view line) {
    auto admitted = service_.admit(line);
    {
      std::lock_guard lock(connection->workers_mutex);
      ++connection->workers;
    }
    std::thread([this, connection, admitted = std::move(admitted)] {
      const nlohmann::json reply =
          service_.complete(admitted, [&](const nlohmann::json& event) { connection->send_line(event); });
      connection->send_line(reply);
      std::lock_guard lock(connection->workers_mutex);
      --connection->workers;
      connection->workers_cv.notify_all();
    }).detach();
  };

  std::string buffer;
  char chunk[65536];
  for (;;) {
    const ssize_t n = ::recv(connection->fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string_view line(buffer.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") != std::string_view::npos) dispatch(line);
    }
    buffer.erase(0, start);
    if (buffer.size() > max_line) {
      connection->send_line({{"id", nullptr},
                             {"type", "error"},
                             {"error", {{"code", "payload_too_large"}, {"message", "message exceeds the upload limit"}}}});
      break;
    }
  }

  {
    std::unique_lock lock(connection->workers_mutex);
    connection->workers_cv.wait(lock, [&] { return connection->workers == 0; });
  }
  service_.remove_listener(listener);
  ::shutdown(connection->fd, SHUT_RDWR);
}

void Server::stop() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mutex_);
    if (!running_) return;
    running_ = false;
    for (const auto& connection : connections_) ::shutdown(connection->fd, SHUT_RD);
    threads.swap(connection_threads_);
  }
  service_.cancel_all();
  if (http_) http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();
  for (auto& t : threads) t.join();
  {
    std::lock_guard lock(mutex_);
    for (const auto& connection : connections_) ::close(connection->fd);
    connections_.clear();
  }
  service_.logger().write(LogLevel::info, "stopped");
  stopped_cv_.notify_all();
}

void Server::wait() {
  std::unique_lock lock(mutex_);
  stopped_cv_.wait(lock, [&] { return !running_; });
}

}  // namespace netcontrast::service
