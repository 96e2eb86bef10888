#pragma once

#include <httplib.h>

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wdkit/errors.hpp"
#include "wdkit/http.hpp"
#include "wdkit/util.hpp"
#include "wdkit/version.hpp"

namespace wdkit::wire {

using nlohmann::json;

inline constexpr const char* kElementKey = "element-6066-11e4-a52e-4f735466cecf";

enum class Provenance { local, remote, docker };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::local: return "local";
    case Provenance::remote: return "remote";
    case Provenance::docker: return "docker";
  }
  return "?";
}

enum class LocatorStrategy { css, xpath, link_text, tag_name };

inline const char* strategy_wire_name(LocatorStrategy s) {
  switch (s) {
    case LocatorStrategy::css: return "css selector";
    case LocatorStrategy::xpath: return "xpath";
    case LocatorStrategy::link_text: return "link text";
    case LocatorStrategy::tag_name: return "tag name";
  }
  return "?";
}

struct Locator {
  LocatorStrategy strategy = LocatorStrategy::css;
  std::string expression;

  std::string describe() const {
    return std::string(strategy_wire_name(strategy)) + " '" + expression + "'";
  }
};

// W3C capabilities. Vendor options carry namespaced keys
// ("goog:chromeOptions" and friends).
struct Capabilities {
  std::string browser_name;
  std::optional<std::string> browser_version;
  std::optional<std::string> platform_name;
  json vendor_options = json::object();

  // The alwaysMatch object. nlohmann::json orders keys, so the rendering is
  // deterministic for identical inputs.
  json to_json() const {
    json caps = json::object();
    caps["browserName"] = browser_name;
    if (browser_version) caps["browserVersion"] = *browser_version;
    if (platform_name) caps["platformName"] = *platform_name;
    for (const auto& [key, value] : vendor_options.items()) caps[key] = value;
    return caps;
  }
};

struct Element {
  std::string id;
};

enum class ScreenshotMode { base64, png_file };

struct ScreenshotData {
  ScreenshotMode encoding = ScreenshotMode::base64;
  std::string payload;  // Base64 text, or the written file path
};

struct Timeouts {
  std::chrono::seconds connect{10};
  std::chrono::seconds command{60};
};

namespace detail {

[[noreturn]] inline void throw_protocol_error(int status, const std::string& body) {
  std::string code = "unknown error";
  std::string message = "HTTP status " + std::to_string(status);
  auto doc = json::parse(body, nullptr, false);
  if (!doc.is_discarded() && doc.contains("value") && doc["value"].is_object()) {
    const auto& value = doc["value"];
    if (value.contains("error")) code = value["error"].get<std::string>();
    if (value.contains("message")) message = value["message"].get<std::string>();
  }
  if (code == "session not created") throw SessionNotCreatedError(code, message);
  if (code == "invalid session id") throw InvalidSessionError(code, message);
  if (code == "no such element") throw NoSuchElementError(code, message);
  if (code == "javascript error") throw JavascriptError(code, message);
  if (code == "stale element reference") throw StaleElementError(code, message);
  throw ProtocolError(code, message);
}

}  // namespace detail

// One live W3C WebDriver session. Move-only; deleting the session on
// destruction keeps lifecycles balanced even on error paths.
class Session {
public:
  Session(Session&&) = default;
  Session& operator=(Session&&) = default;
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  ~Session() {
    if (client_ && live_) {
      try {
        dispose();
      } catch (...) {
      }
    }
  }

  static Session create(const std::string& endpoint, const Capabilities& caps,
                        Provenance provenance, Timeouts timeouts = {}) {
    Session s(endpoint, provenance, timeouts);
    json body = {{"capabilities", {{"alwaysMatch", caps.to_json()}}}};
    json value = s.command_value("POST", s.base_path_ + "/session", body.dump());
    if (!value.contains("sessionId") || !value["sessionId"].is_string() ||
        value["sessionId"].get<std::string>().empty()) {
      throw ProtocolError("session not created", "server response lacks a sessionId");
    }
    s.session_id_ = value["sessionId"].get<std::string>();
    if (value.contains("capabilities")) s.capabilities_echo_ = value["capabilities"];
    s.live_ = true;
    return s;
  }

  const std::string& id() const { return session_id_; }
  const std::string& endpoint() const { return endpoint_; }
  Provenance provenance() const { return provenance_; }
  const json& capabilities_echo() const { return capabilities_echo_; }
  bool live() const { return live_; }
  const std::string& last_warning() const { return last_warning_; }

  void navigate(const std::string& url) {
    if (!valid_navigation_url(url)) {
      throw Error("navigate: malformed URL '" + url + "' (no request sent)");
    }
    require_live();
    json body = {{"url", url}};
    command_value("POST", session_path("/url"), body.dump());
  }

  std::string current_url() {
    require_live();
    return command_value("GET", session_path("/url"), "").get<std::string>();
  }

  Element find_element(const Locator& locator) {
    if (locator.expression.empty()) throw Error("find_element: empty locator expression");
    require_live();
    json body = {{"using", strategy_wire_name(locator.strategy)},
                 {"value", locator.expression}};
    try {
      json value = command_value("POST", session_path("/element"), body.dump());
      if (!value.contains(kElementKey)) {
        throw ProtocolError("unknown error", "element response lacks the W3C element key");
      }
      return {value[kElementKey].get<std::string>()};
    } catch (const NoSuchElementError& e) {
      throw NoSuchElementError(e.code(), std::string(e.what()) + " (locator: " +
                                             locator.describe() + ")");
    }
  }

  void click(const Element& element) {
    require_live();
    command_value("POST", element_path(element, "/click"), json::object().dump());
  }

  void send_keys(const Element& element, const std::string& text) {
    require_live();
    json body = {{"text", text}};
    command_value("POST", element_path(element, "/value"), body.dump());
  }

  std::string text(const Element& element) {
    require_live();
    return command_value("GET", element_path(element, "/text"), "").get<std::string>();
  }

  json execute_script(const std::string& script, const json& args = json::array()) {
    require_live();
    json body = {{"args", args}, {"script", script}};
    return command_value("POST", session_path("/execute/sync"), body.dump());
  }

  ScreenshotData screenshot(ScreenshotMode mode, const std::filesystem::path& out_dir = ".",
                            const std::string& basename = "") {
    require_live();
    std::string payload = command_value("GET", session_path("/screenshot"), "")
                              .get<std::string>();
    auto decoded = util::base64_decode(payload);
    if (!decoded || !util::looks_like_png(*decoded)) {
      throw Error("screenshot: server payload is not Base64-encoded PNG data");
    }
    if (mode == ScreenshotMode::base64) {
      return {ScreenshotMode::base64, payload};
    }
    std::filesystem::create_directories(out_dir);
    std::string name = basename.empty()
                           ? session_id_ + "-" + util::utc_timestamp_compact()
                           : basename;
    std::filesystem::path file = out_dir / (util::sanitize_filename(name) + ".png");
    util::write_file_bytes(file, *decoded);
    return {ScreenshotMode::png_file, file.string()};
  }

  // Idempotent. Server-side failures are recorded as a warning; the handle
  // is dead locally regardless.
  void dispose() {
    if (!live_) return;
    live_ = false;
    try {
      command_value("DELETE", session_path(""), "");
    } catch (const std::exception& e) {
      last_warning_ = std::string("session delete reported: ") + e.what();
    }
  }

private:
  Session(const std::string& endpoint, Provenance provenance, Timeouts timeouts)
      : endpoint_(endpoint), provenance_(provenance) {
    ParsedUrl parsed = ParsedUrl::parse(endpoint);
    base_path_ = parsed.target == "/" ? "" : parsed.target;
    client_ = std::make_unique<httplib::Client>(parsed.origin());
    client_->set_connection_timeout(timeouts.connect.count(), 0);
    client_->set_read_timeout(timeouts.command.count(), 0);
  }

  void require_live() const {
    if (!live_) {
      throw InvalidSessionError("invalid session id",
                                "session " + session_id_ + " is already deleted");
    }
  }

  std::string session_path(const std::string& suffix) const {
    return base_path_ + "/session/" + session_id_ + suffix;
  }

  std::string element_path(const Element& element, const std::string& suffix) const {
    return session_path("/element/" + element.id + suffix);
  }

  json command_value(const std::string& method, const std::string& path,
                     const std::string& body) {
    httplib::Result res(nullptr, httplib::Error::Unknown);
    if (method == "POST") {
      res = client_->Post(path, body, "application/json; charset=utf-8");
    } else if (method == "GET") {
      res = client_->Get(path);
    } else if (method == "DELETE") {
      res = client_->Delete(path);
    }
    if (!res) {
      throw TransportError(method + " " + endpoint_ + path + " failed: " +
                           httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
      detail::throw_protocol_error(res->status, res->body);
    }
    auto doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("value")) {
      throw ProtocolError("unknown error", "response is not a W3C value envelope");
    }
    return doc["value"];
  }

  std::string endpoint_;
  std::string base_path_;
  Provenance provenance_ = Provenance::remote;
  std::unique_ptr<httplib::Client> client_;
  std::string session_id_;
  json capabilities_echo_ = json::object();
  bool live_ = false;
  std::string last_warning_;
};

}  // namespace wdkit::wire
