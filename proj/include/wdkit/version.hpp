#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wdkit/errors.hpp"
#include "wdkit/util.hpp"

namespace wdkit {

// Ordered dotted version ("91.0.4472.114"). Comparison is lexicographic
// over the numeric segments, so "91.0.2" < "91.1" and "91" < "91.0".
class Version {
public:
  Version() = default;

  static std::optional<Version> try_parse(std::string_view text) {
    std::string raw = util::trim(text);
    if (raw.empty()) return std::nullopt;
    std::vector<int> segments;
    size_t i = 0;
    while (i < raw.size()) {
      if (raw[i] < '0' || raw[i] > '9') return std::nullopt;
      long value = 0;
      size_t start = i;
      while (i < raw.size() && raw[i] >= '0' && raw[i] <= '9') {
        value = value * 10 + (raw[i] - '0');
        if (value > 1000000000L) return std::nullopt;
        ++i;
      }
      if (i - start == 0) return std::nullopt;
      segments.push_back(static_cast<int>(value));
      if (i < raw.size()) {
        if (raw[i] != '.') return std::nullopt;
        ++i;
        if (i == raw.size()) return std::nullopt;  // trailing dot
      }
    }
    if (segments.empty()) return std::nullopt;
    Version v;
    v.segments_ = std::move(segments);
    v.raw_ = std::move(raw);
    return v;
  }

  static Version parse(std::string_view text) {
    auto v = try_parse(text);
    if (!v) throw VersionError("not a version string: '" + std::string(text) + "'");
    return *v;
  }

  // Scans free-form text (e.g. "Google Chrome 91.0.4472.114") for the first
  // dotted version token. Requires at least two segments so stray integers
  // in the text are not picked up.
  static std::optional<Version> find_in(std::string_view text) {
    for (const auto& token : util::split(std::string(text), ' ')) {
      std::string t = util::trim(token);
      if (t.find('.') == std::string::npos) continue;
      auto v = try_parse(t);
      if (v && v->segments().size() >= 2) return v;
    }
    return std::nullopt;
  }

  const std::vector<int>& segments() const { return segments_; }
  const std::string& raw() const { return raw_; }
  int major() const { return segments_.empty() ? 0 : segments_[0]; }

  // Canonical dotted rendering; equals raw() for canonically written input.
  std::string str() const {
    std::string out;
    for (size_t i = 0; i < segments_.size(); ++i) {
      if (i > 0) out.push_back('.');
      out += std::to_string(segments_[i]);
    }
    return out;
  }

  friend std::strong_ordering operator<=>(const Version& a, const Version& b) {
    return a.segments_ <=> b.segments_;
  }
  friend bool operator==(const Version& a, const Version& b) {
    return a.segments_ == b.segments_;
  }

private:
  std::vector<int> segments_;
  std::string raw_;
};

enum class BrowserKind { chrome, firefox, edge, opera, safari, chromium, iexplorer };

inline constexpr BrowserKind kAllBrowserKinds[] = {
    BrowserKind::chrome,  BrowserKind::firefox, BrowserKind::edge,     BrowserKind::opera,
    BrowserKind::safari,  BrowserKind::chromium, BrowserKind::iexplorer};

inline std::string browser_name(BrowserKind kind) {
  switch (kind) {
    case BrowserKind::chrome: return "chrome";
    case BrowserKind::firefox: return "firefox";
    case BrowserKind::edge: return "edge";
    case BrowserKind::opera: return "opera";
    case BrowserKind::safari: return "safari";
    case BrowserKind::chromium: return "chromium";
    case BrowserKind::iexplorer: return "iexplorer";
  }
  return "unknown";
}

inline std::optional<BrowserKind> browser_from_name(std::string_view name) {
  std::string n = util::to_lower(name);
  for (BrowserKind kind : kAllBrowserKinds) {
    if (browser_name(kind) == n) return kind;
  }
  return std::nullopt;
}

inline std::string driver_name(BrowserKind kind) {
  switch (kind) {
    case BrowserKind::chrome:
    case BrowserKind::chromium: return "chromedriver";
    case BrowserKind::firefox: return "geckodriver";
    case BrowserKind::edge: return "msedgedriver";
    case BrowserKind::opera: return "operadriver";
    case BrowserKind::safari: return "safaridriver";
    case BrowserKind::iexplorer: return "IEDriverServer";
  }
  return "unknown";
}

// Safari and Internet Explorer ship their drivers with the OS; there is
// nothing to download for them.
inline bool driver_is_system_provided(BrowserKind kind) {
  return kind == BrowserKind::safari || kind == BrowserKind::iexplorer;
}

// The browserName value used on the wire. Chromium is driven as "chrome".
inline std::string webdriver_browser_name(BrowserKind kind) {
  switch (kind) {
    case BrowserKind::edge: return "MicrosoftEdge";
    case BrowserKind::iexplorer: return "internet explorer";
    case BrowserKind::chromium: return "chrome";
    default: return browser_name(kind);
  }
}

}  // namespace wdkit
