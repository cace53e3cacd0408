#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stohom/version.hpp"

namespace stohom {

namespace detail {

/// FNV-1a, 64-bit: small, stable across platforms, good enough to detect
/// config or output drift (not a cryptographic commitment).
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t state = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    state ^= p[i];
    state *= 0x100000001b3ULL;
  }
  return state;
}

inline std::string hex_u64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

/// Canonical config hash: dump() sorts object keys, so the hash is stable
/// under key reordering in the source file.
inline std::string config_hash(const nlohmann::json& config) {
  const std::string canonical = config.dump();
  return detail::hex_u64(detail::fnv1a64(canonical.data(), canonical.size()));
}

/// UTC timestamp, ISO 8601 with seconds.
inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/**
 * @brief Record of one run: what was asked, when it ran, which seeds each
 *        sample used, and a content hash of every file written.
 *
 * Two runs of the same config agree on everything except the timestamps.
 */
struct RunManifest {
  std::string config_file;
  std::string config_digest;
  std::string version = kVersionString;
  std::string command;
  std::uint64_t master_seed = 0;
  int threads = 1;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::uint64_t> sample_seeds;

  struct FileEntry {
    std::string name;
    std::uint64_t bytes = 0;
    std::string digest;
  };
  std::vector<FileEntry> files;

  /// Hash a written output file and add it to the inventory.
  void add_file(const std::string& dir, const std::string& name) {
    std::ifstream in(dir + "/" + name, std::ios::binary);
    if (!in) throw std::runtime_error("manifest: cannot reopen output file " + name);
    std::uint64_t state = 0xcbf29ce484222325ULL;
    std::uint64_t bytes = 0;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
      state = detail::fnv1a64(buf, static_cast<std::size_t>(in.gcount()), state);
      bytes += static_cast<std::uint64_t>(in.gcount());
      if (!in) break;
    }
    files.push_back({name, bytes, detail::hex_u64(state)});
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["config_file"] = config_file;
    j["config_digest"] = config_digest;
    j["version"] = version;
    j["command"] = command;
    j["master_seed"] = master_seed;
    j["threads"] = threads;
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    j["sample_seeds"] = sample_seeds;
    j["files"] = nlohmann::json::array();
    for (const auto& f : files)
      j["files"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"digest", f.digest}});
    return j;
  }

  void write(const std::string& dir) const {
    std::ofstream os(dir + "/manifest.json");
    if (!os) throw std::runtime_error("manifest: cannot write manifest.json");
    os << to_json().dump(2) << "\n";
  }
};

}  // namespace stohom
