#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dhsic {

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);
std::string fnv1a64_hex(std::uint64_t digest);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string iso8601_utc_now();

// Everything needed to rerun a command and reproduce its outputs.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::string resolved_config_json;  // serialized object, embedded on output
  std::uint64_t master_seed = 0;
  std::string library_version;
  struct InputDigest {
    std::string path;
    std::string fnv1a64;
  };
  std::vector<InputDigest> inputs;
  std::string started_at;
  std::string finished_at;
};

}  // namespace dhsic
