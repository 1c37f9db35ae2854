#include "muit/engine/server.hpp"

#include <boost/asio/bind_executor.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/thread_pool.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <algorithm>
#include <condition_variable>
#include <system_error>
#include <thread>

#include "../util/logger.hpp"

namespace muit::engine {

namespace beast = boost::beast;
namespace http = beast::http;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

namespace {

HttpRequest to_request(const http::request<http::string_body>& req) {
  HttpRequest r;
  r.method = std::string(req.method_string());
  r.target = std::string(req.target());
  for (const auto& f : req) {
    std::string name(f.name_string());
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    r.headers[name] = std::string(f.value());
  }
  r.body = req.body();
  return r;
}

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, Engine& engine, const ServerOptions& options)
      : stream_(std::move(socket)), timer_(stream_.get_executor()), engine_(engine), options_(options) {}

  ~Session() {
    if (waiting_) engine_.unpark(token_, ticket_);
  }

  void start() {
    asio::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read(); });
  }

 private:
  void read() {
    parser_.emplace();
    parser_->body_limit(options_.body_limit);
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, *parser_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec == http::error::end_of_stream) return close();
    if (ec) {
      if (ec == http::error::body_limit) write(json_response(413, R"({"error":"request body too large"})"), {});
      return;
    }
    auto req = parser_->release();
    keep_alive_ = req.keep_alive();
    Handled h;
    try {
      h = engine_.handle(to_request(req));
    } catch (const std::exception& e) {
      log::get().error("request {} {} failed: {}", std::string(req.method_string()), std::string(req.target()), e.what());
      h.response = json_response(500, R"({"error":"internal error"})");
    }
    if (h.park_token)
      park(*h.park_token, std::move(h.response));
    else
      write(std::move(h.response), {});
  }

  void park(const std::string& token, HttpResponse fallback) {
    waiting_ = true;
    token_ = token;
    fallback_ = std::move(fallback);
    stream_.expires_never();
    std::weak_ptr<Session> weak = shared_from_this();
    auto ex = stream_.get_executor();
    ticket_ = engine_.park(token, [weak, ex, token, &engine = engine_](HttpResponse r) {
      if (auto self = weak.lock())
        asio::post(ex, [self, r = std::move(r)]() mutable { self->on_answer(std::move(r)); });
      else
        engine.return_answer(token, std::move(r));
    });
    timer_.expires_after(options_.long_poll_timeout);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->on_timeout();
    });
  }

  void on_answer(HttpResponse r) {
    if (!waiting_) {
      engine_.return_answer(token_, std::move(r));
      return;
    }
    waiting_ = false;
    timer_.cancel();
    write(std::move(r), token_);
  }

  void on_timeout() {
    if (!waiting_) return;
    // A failed unpark means the answer is already on its way to on_answer.
    if (engine_.unpark(token_, ticket_)) {
      waiting_ = false;
      write(std::move(fallback_), {});
    }
  }

  void write(HttpResponse r, std::string answer_token) {
    auto res = std::make_shared<http::response<http::string_body>>();
    res->result(static_cast<unsigned>(r.status));
    res->version(11);
    res->set(http::field::server, "muit");
    res->set(http::field::content_type, r.content_type);
    for (const auto& [k, v] : r.headers) res->set(k, v);
    res->keep_alive(keep_alive_);
    res->body() = r.body;
    res->prepare_payload();
    stream_.expires_after(std::chrono::seconds(30));
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res, token = std::move(answer_token), r = std::move(r)](
                          beast::error_code ec, std::size_t) mutable {
                        if (ec) {
                          if (!token.empty()) self->engine_.return_answer(token, std::move(r));
                          return;
                        }
                        if (!self->keep_alive_) return self->close();
                        self->read();
                      });
  }

  void close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  asio::steady_timer timer_;
  Engine& engine_;
  const ServerOptions& options_;
  bool keep_alive_ = true;
  bool waiting_ = false;
  std::string token_;
  std::uint64_t ticket_ = 0;
  HttpResponse fallback_;
};

}  // namespace

struct Server::Impl {
  Impl(Engine& e, ServerOptions o)
      : engine(e), options(std::move(o)), acceptor(ioc), ticker(ioc), delivery(std::max(1, options.delivery_threads)) {}

  void accept() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != asio::error::operation_aborted) accept();
        return;
      }
      std::make_shared<Session>(std::move(socket), engine, options)->start();
      accept();
    });
  }

  void tick() {
    ticker.expires_after(options.tick_interval);
    ticker.async_wait([this](beast::error_code ec) {
      if (ec) return;
      try {
        engine.tick();
      } catch (const std::exception& e) {
        log::get().error("tick failed: {}", e.what());
      }
      tick();
    });
  }

  Engine& engine;
  ServerOptions options;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  asio::steady_timer ticker;
  asio::thread_pool delivery;
  std::vector<std::thread> threads;
  std::mutex mu;
  std::condition_variable cv;
  bool running = false;
  bool stopped = false;
  bool done = false;
};

Server::Server(Engine& engine, ServerOptions options) : impl_(std::make_unique<Impl>(engine, std::move(options))) {}

Server::~Server() { stop(); }

void Server::start() {
  auto& i = *impl_;
  beast::error_code ec;
  auto addr = asio::ip::make_address(i.options.host, ec);
  if (ec) throw std::system_error(ec, "invalid listen address " + i.options.host);
  tcp::endpoint ep(addr, i.options.port);
  i.acceptor.open(ep.protocol());
  i.acceptor.set_option(asio::socket_base::reuse_address(true));
  i.acceptor.bind(ep, ec);
  if (ec) {
    i.acceptor.close();
    throw std::system_error(ec, "cannot bind " + i.options.host + ":" + std::to_string(i.options.port));
  }
  i.acceptor.listen(asio::socket_base::max_listen_connections);
  i.engine.set_executor([&pool = i.delivery](std::function<void()> job) {
    asio::post(pool, [job = std::move(job)] {
      try {
        job();
      } catch (const std::exception& e) {
        log::get().error("delivery job failed: {}", e.what());
      }
    });
  });
  i.accept();
  i.tick();
  for (int k = 0; k < std::max(1, i.options.threads); ++k) i.threads.emplace_back([&i] { i.ioc.run(); });
  std::lock_guard lock(i.mu);
  i.running = true;
  log::get().info("listening on {}", address());
}

void Server::stop() {
  auto& i = *impl_;
  {
    std::lock_guard lock(i.mu);
    if (!i.running || i.stopped) return;
    i.stopped = true;
  }
  asio::post(i.ioc, [&i] {
    beast::error_code ec;
    i.acceptor.close(ec);
    i.ticker.cancel();
  });
  i.ioc.stop();
  for (auto& t : i.threads)
    if (t.joinable()) t.join();
  i.delivery.join();
  i.engine.set_executor({});
  std::lock_guard lock(i.mu);
  i.done = true;
  i.cv.notify_all();
}

void Server::wait() {
  auto& i = *impl_;
  std::unique_lock lock(i.mu);
  i.cv.wait(lock, [&i] { return i.done || !i.running; });
}

std::uint16_t Server::port() const {
  beast::error_code ec;
  auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? impl_->options.port : ep.port();
}

std::string Server::address() const {
  const auto& host = impl_->options.host;
  bool v6 = host.find(':') != std::string::npos;
  return "http://" + (v6 ? "[" + host + "]" : host) + ":" + std::to_string(port());
}

}  // namespace muit::engine
