#include "muit/engine/http.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <stdexcept>

namespace muit::engine {

namespace beast = boost::beast;
namespace http = beast::http;
namespace asio = boost::asio;

HttpResponse json_response(int status, const std::string& body) {
  HttpResponse r;
  r.status = status;
  r.content_type = "application/json";
  r.body = body;
  return r;
}

HttpResponse soap_response(int status, const std::string& body) {
  HttpResponse r;
  r.status = status;
  r.content_type = "text/xml; charset=utf-8";
  r.body = body;
  return r;
}

std::optional<Url> parse_url(std::string_view url) {
  Url u;
  auto sep = url.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  u.scheme = std::string(url.substr(0, sep));
  if (u.scheme != "http" && u.scheme != "https") return std::nullopt;
  auto rest = url.substr(sep + 3);
  auto slash = rest.find_first_of("/?");
  auto authority = rest.substr(0, slash);
  u.target = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (u.target.front() == '?') u.target.insert(0, "/");
  if (authority.empty() || authority.find('@') != std::string_view::npos) return std::nullopt;
  if (authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    u.host = std::string(authority.substr(1, close - 1));
    auto tail = authority.substr(close + 1);
    if (!tail.empty()) {
      if (tail.front() != ':') return std::nullopt;
      u.port = std::string(tail.substr(1));
    }
  } else {
    auto colon = authority.rfind(':');
    u.host = std::string(authority.substr(0, colon));
    if (colon != std::string_view::npos) u.port = std::string(authority.substr(colon + 1));
  }
  if (u.host.empty()) return std::nullopt;
  if (u.port.empty()) u.port = u.scheme == "https" ? "443" : "80";
  if (u.port.find_first_not_of("0123456789") != std::string::npos || u.port.size() > 5) return std::nullopt;
  return u;
}

std::optional<std::string> percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out += s[i];
      continue;
    }
    if (i + 2 >= s.size()) return std::nullopt;
    int hi = hex(s[i + 1]), lo = hex(s[i + 2]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out += static_cast<char>(hi * 16 + lo);
    i += 2;
  }
  return out;
}

HttpResponse BeastHttpClient::request(const std::string& method, const std::string& url,
                                      const std::string& content_type, const std::string& body,
                                      const std::vector<std::pair<std::string, std::string>>& headers) {
  auto u = parse_url(url);
  if (!u) throw std::runtime_error("invalid URL: " + url);
  if (u->scheme != "http") throw std::runtime_error("unsupported scheme: " + u->scheme);

  asio::io_context ioc;
  asio::ip::tcp::resolver resolver(ioc);
  beast::tcp_stream stream(ioc);
  stream.expires_after(timeout_);
  beast::error_code ec;
  auto endpoints = resolver.resolve(u->host, u->port, ec);
  if (ec) throw std::runtime_error("resolve " + u->host + ": " + ec.message());
  stream.connect(endpoints, ec);
  if (ec) throw std::runtime_error("connect " + u->host + ":" + u->port + ": " + ec.message());

  auto verb = http::string_to_verb(method);
  if (verb == http::verb::unknown) throw std::runtime_error("unsupported method " + method);
  http::request<http::string_body> req{verb, u->target, 11};
  req.set(http::field::host, u->host + ":" + u->port);
  req.set(http::field::user_agent, "muit");
  if (!body.empty() || verb == http::verb::post) {
    req.set(http::field::content_type, content_type);
    req.body() = body;
  }
  for (const auto& [k, v] : headers) req.set(k, v);
  req.prepare_payload();
  http::write(stream, req, ec);
  if (ec) throw std::runtime_error("write: " + ec.message());

  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res, ec);
  if (ec) throw std::runtime_error("read: " + ec.message());
  stream.socket().shutdown(asio::ip::tcp::socket::shutdown_both, ec);
  HttpResponse out;
  out.status = static_cast<int>(res.result_int());
  for (const auto& f : res) {
    if (f.name() == http::field::content_type)
      out.content_type = std::string(f.value());
    else
      out.headers.emplace_back(std::string(f.name_string()), std::string(f.value()));
  }
  out.body = std::move(res.body());
  return out;
}

int BeastHttpClient::post(const std::string& url, const std::string& content_type, const std::string& body,
                          const std::vector<std::pair<std::string, std::string>>& headers) {
  return request("POST", url, content_type, body, headers).status;
}

std::pair<int, std::string> BeastHttpClient::get(const std::string& url) {
  auto r = request("GET", url);
  return {r.status, std::move(r.body)};
}

}  // namespace muit::engine
