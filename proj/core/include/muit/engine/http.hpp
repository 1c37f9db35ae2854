#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace muit::engine {

struct HttpRequest {
  std::string method = "GET";
  std::string target;  // path and optional query
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;

  std::string header(const std::string& name) const {
    auto it = headers.find(name);
    return it == headers.end() ? std::string() : it->second;
  }
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "text/plain; charset=utf-8";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

HttpResponse json_response(int status, const std::string& body);
HttpResponse soap_response(int status, const std::string& body);

struct Url {
  std::string scheme;
  std::string host;
  std::string port;
  std::string target;  // path and query, at least "/"
};

// Parses absolute http(s) URLs; nullopt otherwise.
std::optional<Url> parse_url(std::string_view url);

// Decodes %XX escapes; nullopt on a malformed escape.
std::optional<std::string> percent_decode(std::string_view s);

// Outbound HTTP used for callbacks and webhooks.
class HttpClient {
 public:
  virtual ~HttpClient() = default;
  // Returns the response status; throws std::runtime_error on transport errors.
  virtual int post(const std::string& url, const std::string& content_type, const std::string& body,
                   const std::vector<std::pair<std::string, std::string>>& headers = {}) = 0;
};

// Blocking HTTP/1.1 client over Boost.Beast; plain http only.
class BeastHttpClient final : public HttpClient {
 public:
  explicit BeastHttpClient(std::chrono::milliseconds timeout = std::chrono::seconds(5)) : timeout_(timeout) {}
  int post(const std::string& url, const std::string& content_type, const std::string& body,
           const std::vector<std::pair<std::string, std::string>>& headers = {}) override;
  // GET returning status and body.
  std::pair<int, std::string> get(const std::string& url);
  // Any method; the response carries status, content type, headers and body.
  HttpResponse request(const std::string& method, const std::string& url, const std::string& content_type = {},
                       const std::string& body = {},
                       const std::vector<std::pair<std::string, std::string>>& headers = {});

 private:
  std::chrono::milliseconds timeout_;
};

}  // namespace muit::engine
