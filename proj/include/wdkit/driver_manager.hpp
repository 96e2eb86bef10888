#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wdkit/archive.hpp"
#include "wdkit/errors.hpp"
#include "wdkit/http.hpp"
#include "wdkit/util.hpp"
#include "wdkit/version.hpp"

namespace wdkit::drivers {

using nlohmann::json;

enum class Platform { linux_x64, mac_x64, mac_arm64, win_x64, win_x86 };

inline std::string platform_name(Platform p) {
  switch (p) {
    case Platform::linux_x64: return "linux-x64";
    case Platform::mac_x64: return "mac-x64";
    case Platform::mac_arm64: return "mac-arm64";
    case Platform::win_x64: return "win-x64";
    case Platform::win_x86: return "win-x86";
  }
  return "unknown";
}

inline std::optional<Platform> platform_from_name(std::string_view name) {
  for (Platform p : {Platform::linux_x64, Platform::mac_x64, Platform::mac_arm64,
                     Platform::win_x64, Platform::win_x86}) {
    if (platform_name(p) == name) return p;
  }
  return std::nullopt;
}

inline Platform current_platform() {
#if defined(__APPLE__) && defined(__aarch64__)
  return Platform::mac_arm64;
#elif defined(__APPLE__)
  return Platform::mac_x64;
#elif defined(_WIN64)
  return Platform::win_x64;
#elif defined(_WIN32)
  return Platform::win_x86;
#else
  return Platform::linux_x64;
#endif
}

struct MetadataEntry {
  BrowserKind kind = BrowserKind::chrome;
  int browser_major = 0;
  Version driver_version;
  std::string url;     // optional explicit download URL
  std::string sha256;  // optional archive checksum
};

// Compatibility table mapping (browser kind, browser major) to the driver
// version that supports it, plus where to download driver binaries.
class ResolutionMetadata {
public:
  static ResolutionMetadata from_json(const json& doc, std::string source) {
    if (!doc.is_object() || !doc.contains("schema") || !doc["schema"].is_number_integer()) {
      throw ResolutionError("metadata: missing integer 'schema' field (" + source + ")");
    }
    if (doc["schema"].get<int>() != 1) {
      throw ResolutionError("metadata: unsupported schema version (" + source + ")");
    }
    ResolutionMetadata meta;
    meta.source_ = std::move(source);
    if (doc.contains("download_template")) {
      meta.download_template_ = doc["download_template"].get<std::string>();
    }
    if (!doc.contains("entries") || !doc["entries"].is_array()) {
      throw ResolutionError("metadata: missing 'entries' array (" + meta.source_ + ")");
    }
    for (const auto& e : doc["entries"]) {
      MetadataEntry entry;
      auto kind = browser_from_name(e.at("browser").get<std::string>());
      if (!kind) {
        throw ResolutionError("metadata: unknown browser '" +
                              e.at("browser").get<std::string>() + "' (" + meta.source_ + ")");
      }
      entry.kind = *kind;
      entry.browser_major = e.at("browser_major").get<int>();
      entry.driver_version = Version::parse(e.at("driver_version").get<std::string>());
      if (e.contains("url")) entry.url = e["url"].get<std::string>();
      if (e.contains("sha256")) entry.sha256 = e["sha256"].get<std::string>();
      meta.entries_[{entry.kind, entry.browser_major}] = entry;
    }
    return meta;
  }

  static ResolutionMetadata load_file(const std::filesystem::path& path) {
    json doc;
    try {
      doc = json::parse(util::read_file_text(path));
    } catch (const json::parse_error& e) {
      throw ResolutionError("metadata: invalid JSON in " + path.string() + ": " + e.what());
    }
    return from_json(doc, path.string());
  }

  // Fetches from a URL, caching the document under `cache_dir` with a
  // time-to-live so repeated runs do not hammer the endpoint.
  static ResolutionMetadata fetch(HttpTransport& transport, const std::string& url,
                                  const std::filesystem::path& cache_dir,
                                  std::chrono::seconds ttl) {
    namespace fs = std::filesystem;
    fs::create_directories(cache_dir);
    fs::path cached = cache_dir / ("metadata-" + util::sha256_hex(std::vector<std::uint8_t>(
                                                     url.begin(), url.end()))
                                                     .substr(0, 16) +
                                   ".json");
    std::error_code ec;
    auto mtime = fs::last_write_time(cached, ec);
    if (!ec) {
      auto age = fs::file_time_type::clock::now() - mtime;
      if (age < std::chrono::duration_cast<fs::file_time_type::duration>(ttl)) {
        return load_file(cached);
      }
    }
    HttpResponse res = transport.get(url);
    if (res.status != 200) {
      throw ResolutionError("metadata: GET " + url + " returned status " +
                            std::to_string(res.status));
    }
    util::write_file_text(cached, res.body);
    json doc;
    try {
      doc = json::parse(res.body);
    } catch (const json::parse_error& e) {
      throw ResolutionError("metadata: invalid JSON from " + url + ": " + e.what());
    }
    return from_json(doc, url);
  }

  const std::string& source() const { return source_; }
  const std::string& download_template() const { return download_template_; }
  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }

  std::optional<MetadataEntry> exact(BrowserKind kind, int browser_major) const {
    auto it = entries_.find({kind, browser_major});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  // Entry with the greatest major <= browser_major for the kind.
  std::optional<MetadataEntry> nearest_at_or_below(BrowserKind kind, int browser_major) const {
    auto it = entries_.upper_bound({kind, browser_major});
    if (it == entries_.begin()) return std::nullopt;
    --it;
    if (it->first.first != kind) return std::nullopt;
    return it->second;
  }

  std::vector<int> majors_for(BrowserKind kind) const {
    std::vector<int> out;
    for (const auto& [key, entry] : entries_) {
      if (key.first == kind) out.push_back(key.second);
    }
    return out;
  }

private:
  std::string source_;
  std::string download_template_;
  std::map<std::pair<BrowserKind, int>, MetadataEntry> entries_;
};

// Resolution step 2: browser version -> compatible driver version. Exact
// major when the table has it, otherwise the nearest lower major.
inline MetadataEntry resolve_driver_entry(BrowserKind kind, const Version& browser_version,
                                          const ResolutionMetadata& meta) {
  if (auto entry = meta.exact(kind, browser_version.major())) return *entry;
  if (auto entry = meta.nearest_at_or_below(kind, browser_version.major())) return *entry;
  throw ResolutionError("no driver entry for " + browser_name(kind) + " major " +
                        std::to_string(browser_version.major()) + " or below in " +
                        meta.source());
}

inline Version resolve_driver_version(BrowserKind kind, const Version& browser_version,
                                      const ResolutionMetadata& meta) {
  return resolve_driver_entry(kind, browser_version, meta).driver_version;
}

struct Diagnosis {
  bool compatible = false;
  std::string message;
};

// Mirrors the familiar driver/browser major mismatch failure with a
// remediation hint instead of a bare error.
inline Diagnosis mismatch_diagnosis(int browser_major, int driver_supported_major) {
  if (browser_major == driver_supported_major) {
    return {true, "driver and browser majors match (" + std::to_string(browser_major) + ")"};
  }
  return {false, "installed driver supports browser major " +
                     std::to_string(driver_supported_major) + " but the browser major is " +
                     std::to_string(browser_major) +
                     "; re-run driver resolution to fetch a matching driver"};
}

// Resolution step 1: ask the installed browser for its version. The probe
// abstracts the platform command table; parsing is separate and testable.
class BrowserProbe {
public:
  virtual ~BrowserProbe() = default;

  // Raw probe output (e.g. "Google Chrome 91.0.4472.114"), or nullopt when
  // the browser is not installed. Throws Error for a broken installation
  // (binary present but probe fails).
  virtual std::optional<std::string> probe(BrowserKind kind) = 0;
};

inline std::optional<Version> parse_probe_output(std::string_view output) {
  return Version::find_in(output);
}

inline std::optional<Version> detect_browser_version(BrowserKind kind, BrowserProbe& probe) {
  auto raw = probe.probe(kind);
  if (!raw) return std::nullopt;
  auto version = parse_probe_output(*raw);
  if (!version) {
    throw Error("browser probe for " + browser_name(kind) +
                " produced unparseable output: '" + *raw + "'");
  }
  return version;
}

// Runs `<binary> --version` for the first binary of the kind found on PATH.
class SystemBrowserProbe : public BrowserProbe {
public:
  std::optional<std::string> probe(BrowserKind kind) override {
    for (const auto& binary : candidate_binaries(kind)) {
      std::string cmd = "command -v " + binary + " >/dev/null 2>&1 && " + binary +
                        " --version 2>/dev/null";
      FILE* pipe = popen(cmd.c_str(), "r");
      if (pipe == nullptr) throw Error("browser probe: cannot spawn shell");
      std::string output;
      char buf[256];
      while (fgets(buf, sizeof(buf), pipe) != nullptr) output += buf;
      int rc = pclose(pipe);
      if (rc == 0 && !util::trim(output).empty()) return output;
    }
    return std::nullopt;
  }

  static std::vector<std::string> candidate_binaries(BrowserKind kind) {
    switch (kind) {
      case BrowserKind::chrome:
        return {"google-chrome", "google-chrome-stable", "chrome"};
      case BrowserKind::chromium:
        return {"chromium", "chromium-browser"};
      case BrowserKind::firefox:
        return {"firefox", "firefox-esr"};
      case BrowserKind::edge:
        return {"microsoft-edge", "microsoft-edge-stable"};
      case BrowserKind::opera:
        return {"opera"};
      case BrowserKind::safari:
        return {"safaridriver"};  // macOS only; presence implies Safari
      case BrowserKind::iexplorer:
        return {};
    }
    return {};
  }
};

struct DriverArtifact {
  BrowserKind kind = BrowserKind::chrome;
  Version driver_version;
  Platform platform = Platform::linux_x64;
  std::filesystem::path cache_path;
  bool executable = false;
};

namespace detail {

// flock-based guard serializing concurrent downloads of one target.
class FileLock {
public:
  explicit FileLock(const std::filesystem::path& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw Error("cannot create lock file: " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error("cannot lock: " + path.string());
    }
  }
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

private:
  std::filesystem::path path_;
  int fd_ = -1;
};

inline std::string substitute_template(std::string tmpl, const std::string& driver,
                                       const std::string& version, const std::string& platform) {
  auto replace_all = [](std::string& s, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all(tmpl, "{driver}", driver);
  replace_all(tmpl, "{version}", version);
  replace_all(tmpl, "{platform}", platform);
  return tmpl;
}

}  // namespace detail

// Resolution step 3: download, verify, extract and cache driver binaries.
// Cache layout: <root>/<driver_name>/<platform>/<driver_version>/<binary>.
class DriverManager {
public:
  DriverManager(HttpTransport& transport, std::filesystem::path cache_root,
                Platform platform = current_platform())
      : transport_(transport), cache_root_(std::move(cache_root)), platform_(platform) {}

  const std::filesystem::path& cache_root() const { return cache_root_; }

  std::filesystem::path cache_path_for(BrowserKind kind, const Version& driver_version) const {
    std::string binary = driver_name(kind);
    if (platform_ == Platform::win_x64 || platform_ == Platform::win_x86) binary += ".exe";
    return cache_root_ / driver_name(kind) / platform_name(platform_) / driver_version.str() /
           binary;
  }

  // Idempotent: a warm cache entry short-circuits without touching the
  // network.
  DriverArtifact ensure_driver(BrowserKind kind, const Version& browser_version,
                               const ResolutionMetadata& meta) {
    if (driver_is_system_provided(kind)) {
      return {kind, Version{}, platform_, {}, false};
    }
    MetadataEntry entry = resolve_driver_entry(kind, browser_version, meta);
    std::filesystem::path target = cache_path_for(kind, entry.driver_version);

    if (std::filesystem::exists(target)) {
      return {kind, entry.driver_version, platform_, target, true};
    }

    std::filesystem::create_directories(target.parent_path());
    detail::FileLock lock(target.parent_path() / ".lock");
    if (std::filesystem::exists(target)) {  // lost the race, another process won
      return {kind, entry.driver_version, platform_, target, true};
    }

    std::string url = entry.url;
    if (url.empty()) {
      if (meta.download_template().empty()) {
        throw ResolutionError("metadata has neither an entry URL nor a download template for " +
                              browser_name(kind));
      }
      url = detail::substitute_template(meta.download_template(), driver_name(kind),
                                        entry.driver_version.str(),
                                        platform_name(platform_));
    }

    try {
      HttpResponse res = transport_.get(url);
      if (res.status != 200) {
        throw TransportError("driver download " + url + " returned status " +
                             std::to_string(res.status));
      }
      std::vector<std::uint8_t> body(res.body.begin(), res.body.end());
      if (!entry.sha256.empty() && util::sha256_hex(body) != util::to_lower(entry.sha256)) {
        throw ChecksumError("driver archive checksum mismatch for " + url);
      }
      std::vector<std::uint8_t> binary = extract_driver_binary(body, url, driver_name(kind));

      std::filesystem::path tmp = target;
      tmp += ".part";
      util::write_file_bytes(tmp, binary);
      ::chmod(tmp.c_str(), 0755);
      std::filesystem::rename(tmp, target);
    } catch (...) {
      // No partial cache entries: drop the whole version directory.
      std::error_code ec;
      std::filesystem::remove_all(target.parent_path(), ec);
      throw;
    }
    return {kind, entry.driver_version, platform_, target, true};
  }

private:
  static std::vector<std::uint8_t> extract_driver_binary(const std::vector<std::uint8_t>& body,
                                                         const std::string& url,
                                                         const std::string& binary_name) {
    std::vector<archive::Entry> entries;
    switch (archive::format_for_name(url)) {
      case archive::Format::zip: entries = archive::extract_zip(body); break;
      case archive::Format::tar_gz: entries = archive::extract_tar_gz(body); break;
      case archive::Format::tar: entries = archive::extract_tar(body); break;
      case archive::Format::raw: return body;
    }
    const archive::Entry* match = nullptr;
    for (const auto& e : entries) {
      std::string base = std::filesystem::path(e.name).filename().string();
      if (base == binary_name || base == binary_name + ".exe") {
        match = &e;
        break;
      }
    }
    if (match == nullptr && entries.size() == 1) match = &entries[0];
    if (match == nullptr) {
      throw ArchiveError("driver binary '" + binary_name + "' not found in archive from " + url);
    }
    return match->data;
  }

  HttpTransport& transport_;
  std::filesystem::path cache_root_;
  Platform platform_;
};

}  // namespace wdkit::drivers
