#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "muit/engine/engine.hpp"

namespace muit::engine {

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  int threads = 4;
  int delivery_threads = 2;  // callbacks and webhooks
  std::chrono::milliseconds long_poll_timeout{30'000};
  std::chrono::milliseconds tick_interval{1'000};
  std::size_t body_limit = 8 * 1024 * 1024;
};

// HTTP/1.1 front end of an Engine. Parked sync requests hold no thread: the
// connection waits on a timer until its answer is posted to it.
class Server {
 public:
  Server(Engine& engine, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds, listens and starts the I/O threads. Throws std::system_error
  // when the address cannot be bound.
  void start();
  // Stops accepting, closes connections and joins every thread.
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  std::uint16_t port() const;
  std::string address() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace muit::engine
