#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wdkit/errors.hpp"
#include "wdkit/util.hpp"

namespace wdkit::config {

enum class ValueType { boolean, integer, duration_seconds, text, path, enumeration };

struct KeyInfo {
  std::string label;
  ValueType type = ValueType::text;
  std::string default_value;
  std::string doc;
  std::vector<std::string> enum_values;  // only for ValueType::enumeration
};

// Labels are dotted lowercase identifiers: `sel.jup.recording`.
inline bool valid_label(std::string_view label) {
  if (label.empty()) return false;
  auto segments = util::split(label, '.');
  if (segments.size() < 2) return false;
  for (size_t s = 0; s < segments.size(); ++s) {
    const std::string& seg = segments[s];
    if (seg.empty()) return false;
    for (size_t i = 0; i < seg.size(); ++i) {
      char c = seg[i];
      bool lower = c >= 'a' && c <= 'z';
      bool digit = c >= '0' && c <= '9';
      if (!lower && !digit) return false;
      if (s == 0 && i == 0 && !lower) return false;  // label starts with a letter
    }
  }
  return true;
}

// Environment variable name for a label: uppercase, dots become
// underscores (`sel.jup.recording` -> `SEL_JUP_RECORDING`).
inline std::string env_name(std::string_view label) {
  if (!valid_label(label)) {
    throw ConfigError("invalid config label: '" + std::string(label) + "'");
  }
  std::string out = util::to_upper(label);
  std::replace(out.begin(), out.end(), '.', '_');
  return out;
}

// Inverse of env_name; total over names produced by env_name.
inline std::string label_from_env_name(std::string_view env) {
  std::string out = util::to_lower(env);
  std::replace(out.begin(), out.end(), '_', '.');
  return out;
}

namespace keys {
inline constexpr const char* recording = "sel.jup.recording";
inline constexpr const char* recording_when_failure = "sel.jup.recording.when.failure";
inline constexpr const char* screenshot = "sel.jup.screenshot";
inline constexpr const char* screenshot_always = "sel.jup.screenshot.always";
inline constexpr const char* screenshot_format = "sel.jup.screenshot.format";
inline constexpr const char* output_dir = "sel.jup.output.dir";
inline constexpr const char* docker_endpoint = "sel.jup.docker.endpoint";
inline constexpr const char* docker_registry_url = "sel.jup.docker.registry.url";
inline constexpr const char* docker_parallelism = "sel.jup.docker.parallelism";
inline constexpr const char* vnc = "sel.jup.vnc";
inline constexpr const char* screen_resolution = "sel.jup.screen.resolution";
inline constexpr const char* session_timeout = "sel.jup.session.timeout";
inline constexpr const char* container_startup_timeout = "sel.jup.container.startup.timeout";
inline constexpr const char* connect_timeout = "sel.jup.connect.timeout";
inline constexpr const char* command_timeout = "sel.jup.command.timeout";
inline constexpr const char* driver_cache_dir = "sel.jup.driver.cache.dir";
inline constexpr const char* driver_ttl = "sel.jup.driver.ttl";
inline constexpr const char* driver_metadata_url = "sel.jup.driver.metadata.url";
inline constexpr const char* default_browser = "sel.jup.default.browser";
inline constexpr const char* freeze_threshold_ms = "sel.jup.freeze.threshold.ms";
inline constexpr const char* jitter_threshold_ms = "sel.jup.jitter.threshold.ms";
}  // namespace keys

// The closed key set, stable-ordered by label.
inline const std::vector<KeyInfo>& registered_keys() {
  static const std::vector<KeyInfo> registry = [] {
    std::vector<KeyInfo> keys{
        {keys::command_timeout, ValueType::duration_seconds, "60",
         "Per-command timeout for WebDriver requests", {}},
        {keys::connect_timeout, ValueType::duration_seconds, "10",
         "Connect timeout for WebDriver requests", {}},
        {keys::container_startup_timeout, ValueType::duration_seconds, "30",
         "Max wait for a browser container to become ready", {}},
        {keys::default_browser, ValueType::enumeration, "chrome",
         "Browser kind used for generic driver requests",
         {"chrome", "firefox", "edge", "opera", "safari", "chromium", "iexplorer"}},
        {keys::docker_endpoint, ValueType::text, "unix:///var/run/docker.sock",
         "Container engine endpoint (unix:// socket or tcp://host:port)", {}},
        {keys::docker_parallelism, ValueType::integer, "4",
         "Max concurrent container startups in a fleet", {}},
        {keys::docker_registry_url, ValueType::text, "https://hub.docker.com",
         "Registry used to list available image tags", {}},
        {keys::driver_cache_dir, ValueType::path, "~/.cache/wdkit/drivers",
         "Root directory of the resolved driver cache", {}},
        {keys::driver_metadata_url, ValueType::text, "",
         "Driver resolution metadata source (file path or URL); empty = unset", {}},
        {keys::driver_ttl, ValueType::duration_seconds, "86400",
         "Time-to-live for cached driver resolution metadata", {}},
        {keys::freeze_threshold_ms, ValueType::integer, "500",
         "Inter-frame gap that counts as a video freeze", {}},
        {keys::jitter_threshold_ms, ValueType::integer, "75",
         "Jitter delay above which a connection is flagged", {}},
        {keys::output_dir, ValueType::path, ".",
         "Directory for reports, screenshots and recordings", {}},
        {keys::recording, ValueType::boolean, "false",
         "Record dockerized browser sessions", {}},
        {keys::recording_when_failure, ValueType::boolean, "false",
         "Keep session recordings only for failed tests", {}},
        {keys::screen_resolution, ValueType::text, "1024x768x24",
         "Screen geometry for dockerized browsers (WxHxD)", {}},
        {keys::screenshot, ValueType::boolean, "false",
         "Capture a browser screenshot when a test fails", {}},
        {keys::screenshot_always, ValueType::boolean, "false",
         "Capture screenshots for passed tests too", {}},
        {keys::screenshot_format, ValueType::enumeration, "png",
         "Screenshot encoding", {"base64", "png"}},
        {keys::session_timeout, ValueType::duration_seconds, "60",
         "Max lifetime of an idle WebDriver session", {}},
        {keys::vnc, ValueType::boolean, "false",
         "Expose a VNC endpoint for dockerized browsers", {}},
    };
    std::sort(keys.begin(), keys.end(),
              [](const KeyInfo& a, const KeyInfo& b) { return a.label < b.label; });
    return keys;
  }();
  return registry;
}

inline const KeyInfo* find_key(std::string_view label) {
  for (const auto& k : registered_keys()) {
    if (k.label == label) return &k;
  }
  return nullptr;
}

enum class Layer { env = 0, property = 1, api = 2, defaults = 3 };

inline const char* layer_name(Layer layer) {
  switch (layer) {
    case Layer::env: return "env";
    case Layer::property: return "property";
    case Layer::api: return "api";
    case Layer::defaults: return "defaults";
  }
  return "?";
}

// `key=value` lines; `#` starts a comment; blank lines ignored.
inline std::map<std::string, std::string> parse_properties(std::string_view text) {
  std::map<std::string, std::string> out;
  for (const auto& rawline : util::split(text, '\n')) {
    std::string line = util::trim(rawline);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("properties line without '=': '" + line + "'");
    }
    std::string key = util::trim(line.substr(0, eq));
    std::string value = util::trim(line.substr(eq + 1));
    if (!valid_label(key)) throw ConfigError("invalid property key: '" + key + "'");
    out[key] = value;
  }
  return out;
}

class Store;

// Collects the three sources before freezing them into an immutable Store.
class StoreBuilder {
public:
  StoreBuilder& set_api(std::string_view label, std::string_view value) {
    require_known(label);
    api_[std::string(label)] = std::string(value);
    return *this;
  }

  StoreBuilder& set_property(std::string_view label, std::string_view value) {
    require_known(label);
    property_[std::string(label)] = std::string(value);
    return *this;
  }

  StoreBuilder& load_properties(std::string_view text) {
    for (const auto& [k, v] : parse_properties(text)) {
      if (find_key(k) != nullptr) property_[k] = v;
      // unknown keys in a properties file are tolerated so one file can
      // serve several tools
    }
    return *this;
  }

  // Injects the env layer explicitly (tests, snapshots). Keyed by env
  // variable name, e.g. "SEL_JUP_RECORDING".
  StoreBuilder& set_env(std::string_view env_var, std::string_view value) {
    env_raw_[std::string(env_var)] = std::string(value);
    return *this;
  }

  // Snapshots the process environment for all registered keys. Called once;
  // resolution never consults getenv afterwards.
  StoreBuilder& capture_process_env() {
    for (const auto& key : registered_keys()) {
      const char* v = std::getenv(env_name(key.label).c_str());
      if (v != nullptr) env_raw_[env_name(key.label)] = v;
    }
    return *this;
  }

  Store build() const;

private:
  static void require_known(std::string_view label) {
    if (find_key(label) == nullptr) {
      throw ConfigError("unregistered config key: '" + std::string(label) + "'");
    }
  }

  std::map<std::string, std::string> api_;
  std::map<std::string, std::string> property_;
  std::map<std::string, std::string> env_raw_;  // keyed by env var name

  friend class Store;
};

// Immutable layered configuration store. Effective value = first present
// among (env, property, api, defaults).
class Store {
public:
  Store() : Store(StoreBuilder{}) {}

  explicit Store(const StoreBuilder& b) : api_(b.api_), property_(b.property_) {
    for (const auto& key : registered_keys()) {
      auto it = b.env_raw_.find(env_name(key.label));
      if (it != b.env_raw_.end()) env_[key.label] = it->second;
    }
  }

  // Raw resolution: (layer, raw string) of the highest-priority populated
  // layer for the key.
  std::pair<Layer, std::string> resolve_raw(std::string_view label) const {
    const KeyInfo* key = find_key(label);
    if (key == nullptr) {
      throw ConfigError("unregistered config key: '" + std::string(label) + "'");
    }
    std::string l(label);
    if (auto it = env_.find(l); it != env_.end()) return {Layer::env, it->second};
    if (auto it = property_.find(l); it != property_.end()) return {Layer::property, it->second};
    if (auto it = api_.find(l); it != api_.end()) return {Layer::api, it->second};
    return {Layer::defaults, key->default_value};
  }

  bool get_bool(std::string_view label) const {
    auto [layer, raw] = resolve_raw(label);
    check_type(label, ValueType::boolean);
    std::string v = util::to_lower(util::trim(raw));
    if (v == "true") return true;
    if (v == "false") return false;
    throw parse_error(label, layer, raw, "expected true or false");
  }

  long long get_int(std::string_view label) const {
    auto [layer, raw] = resolve_raw(label);
    const KeyInfo* key = find_key(label);
    if (key->type != ValueType::integer && key->type != ValueType::duration_seconds) {
      throw ConfigError("config key '" + std::string(label) + "' is not integer-valued");
    }
    std::string v = util::trim(raw);
    if (v.empty()) throw parse_error(label, layer, raw, "expected an integer");
    size_t i = v[0] == '-' ? 1 : 0;
    if (i == v.size()) throw parse_error(label, layer, raw, "expected an integer");
    for (; i < v.size(); ++i) {
      if (v[i] < '0' || v[i] > '9') {
        throw parse_error(label, layer, raw, "expected an integer");
      }
    }
    return std::stoll(v);
  }

  // Durations are plain integers in seconds.
  std::chrono::seconds get_duration(std::string_view label) const {
    return std::chrono::seconds(get_int(label));
  }

  std::string get_string(std::string_view label) const {
    return resolve_raw(label).second;
  }

  std::filesystem::path get_path(std::string_view label) const {
    check_type(label, ValueType::path);
    return util::expand_user(resolve_raw(label).second);
  }

  std::string get_enum(std::string_view label) const {
    auto [layer, raw] = resolve_raw(label);
    const KeyInfo* key = find_key(label);
    check_type(label, ValueType::enumeration);
    std::string v = util::to_lower(util::trim(raw));
    for (const auto& allowed : key->enum_values) {
      if (v == allowed) return v;
    }
    throw parse_error(label, layer, raw, "not one of the allowed values");
  }

private:
  static ConfigError parse_error(std::string_view label, Layer layer, const std::string& raw,
                                 const std::string& why) {
    return ConfigError("config key '" + std::string(label) + "' (" + layer_name(layer) +
                       " layer): cannot parse '" + raw + "': " + why);
  }

  static void check_type(std::string_view label, ValueType expected) {
    const KeyInfo* key = find_key(label);
    if (key->type != expected) {
      throw ConfigError("config key '" + std::string(label) + "' has a different value type");
    }
  }

  std::map<std::string, std::string> api_;
  std::map<std::string, std::string> property_;
  std::map<std::string, std::string> env_;  // keyed by label after capture
};

inline Store StoreBuilder::build() const { return Store(*this); }

}  // namespace wdkit::config
