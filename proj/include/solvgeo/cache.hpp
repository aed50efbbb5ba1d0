#pragma once

// Append-only JSON-lines result cache. One record per line:
//   {"key", "payload", "created_at", "tool_version", "params_digest"}
// Readers take a shared flock, writers an exclusive one. Records written by another tool
// version are skipped, never removed.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "solvgeo/version.hpp"

namespace solvgeo {

struct CacheRecord {
  std::string key;
  nlohmann::json payload;
  std::string created_at;
  std::string tool_version;
  std::string params_digest;
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

class FileLock {
 public:
  FileLock(const std::filesystem::path& path, bool exclusive) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw std::runtime_error("cache: cannot open " + path.string());
    if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      ::close(fd_);
      throw std::runtime_error("cache: cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace detail

class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path path, std::string version = kToolVersion)
      : path_(std::move(path)), version_(std::move(version)) {}

  // $SOLVGEO_CACHE if set (a directory gets solvgeo-cache.jsonl inside it), else ./solvgeo-cache.jsonl.
  static std::filesystem::path default_path() {
    const char* env = std::getenv("SOLVGEO_CACHE");
    if (env == nullptr || *env == '\0') return "solvgeo-cache.jsonl";
    std::filesystem::path p(env);
    if (std::filesystem::is_directory(p)) p /= "solvgeo-cache.jsonl";
    return p;
  }

  // Digest of the command name and the request; json objects dump with sorted keys, so equal
  // requests give equal keys.
  static std::string key_for(const std::string& command, const nlohmann::json& request) {
    return hex(fnv1a64(command + '\n' + request.dump()));
  }

  const std::filesystem::path& path() const { return path_; }

  // Latest record for key written by this tool version.
  std::optional<nlohmann::json> lookup(const std::string& key) const {
    if (!std::filesystem::exists(path_)) return std::nullopt;
    detail::FileLock lock(path_, false);
    std::ifstream in(path_);
    std::optional<nlohmann::json> found;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto rec = nlohmann::json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.is_object()) continue;  // torn or foreign line
      if (rec.value("key", "") != key || rec.value("tool_version", "") != version_) continue;
      if (rec.contains("payload")) found = rec["payload"];
    }
    return found;
  }

  void store(const std::string& key, const nlohmann::json& payload, const std::string& params_digest) {
    CacheRecord r{key, payload, utc_timestamp(), version_, params_digest};
    store(r);
  }

  void store(const CacheRecord& r) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    detail::FileLock lock(path_, true);
    const nlohmann::json line{{"key", r.key},
                              {"payload", r.payload},
                              {"created_at", r.created_at},
                              {"tool_version", r.tool_version},
                              {"params_digest", r.params_digest}};
    std::ofstream out(path_, std::ios::app);
    out << line.dump() << '\n';
    if (!out) throw std::runtime_error("cache: write failed for " + path_.string());
  }

 private:
  static std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
  }

  std::filesystem::path path_;
  std::string version_;
};

}  // namespace solvgeo
