#pragma once

#include <httplib.h>

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "wdkit/errors.hpp"

namespace wdkit {

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string target;  // path + query, at least "/"

  std::string origin() const {
    return scheme + "://" + host + ":" + std::to_string(port);
  }

  static ParsedUrl parse(const std::string& url) {
    ParsedUrl out;
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw TransportError("malformed URL: " + url);
    out.scheme = url.substr(0, scheme_end);
    if (out.scheme != "http" && out.scheme != "https" && out.scheme != "vnc") {
      throw TransportError("unsupported URL scheme: " + url);
    }
    size_t rest = scheme_end + 3;
    size_t path_start = url.find('/', rest);
    std::string authority =
        path_start == std::string::npos ? url.substr(rest) : url.substr(rest, path_start - rest);
    out.target = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (authority.empty()) throw TransportError("malformed URL: " + url);
    size_t colon = authority.rfind(':');
    if (colon != std::string::npos) {
      out.host = authority.substr(0, colon);
      try {
        out.port = std::stoi(authority.substr(colon + 1));
      } catch (const std::exception&) {
        throw TransportError("malformed URL port: " + url);
      }
    } else {
      out.host = authority;
      out.port = out.scheme == "https" ? 443 : 80;
    }
    if (out.host.empty()) throw TransportError("malformed URL: " + url);
    return out;
  }
};

inline bool valid_url(const std::string& url) {
  try {
    ParsedUrl::parse(url);
    return true;
  } catch (const TransportError&) {
    return false;
  }
}

// Looser grammar for browser navigation targets: `scheme:rest` with an
// alphabetic scheme (http, https, file, about, data...).
inline bool valid_navigation_url(const std::string& url) {
  size_t colon = url.find(':');
  if (colon == 0 || colon == std::string::npos || colon + 1 >= url.size()) return false;
  for (size_t i = 0; i < colon; ++i) {
    char c = url[i];
    bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    bool extra = c == '+' || c == '-' || c == '.' || (c >= '0' && c <= '9');
    if (!(alpha || (i > 0 && extra))) return false;
  }
  return true;
}

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Simple GET transport used for metadata fetches, driver downloads, registry
// tag listings and reachability probes. Kept behind an interface so tests
// count and script requests.
class HttpTransport {
public:
  virtual ~HttpTransport() = default;

  // Throws TransportError when no HTTP response could be obtained.
  virtual HttpResponse get(const std::string& url) = 0;
};

class DefaultTransport : public HttpTransport {
public:
  explicit DefaultTransport(std::chrono::seconds connect_timeout = std::chrono::seconds(10),
                            std::chrono::seconds read_timeout = std::chrono::seconds(60))
      : connect_timeout_(connect_timeout), read_timeout_(read_timeout) {}

  HttpResponse get(const std::string& url) override {
    ParsedUrl parsed = ParsedUrl::parse(url);
    httplib::Client client(parsed.origin());
    client.set_connection_timeout(connect_timeout_.count(), 0);
    client.set_read_timeout(read_timeout_.count(), 0);
    client.set_follow_location(true);
    auto res = client.Get(parsed.target);
    if (!res) {
      throw TransportError("GET " + url + " failed: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }

private:
  std::chrono::seconds connect_timeout_;
  std::chrono::seconds read_timeout_;
};

}  // namespace wdkit
