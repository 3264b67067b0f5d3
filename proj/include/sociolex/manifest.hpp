#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sociolex {

/// Record of one CLI invocation, written next to its outputs.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> parameters;  // resolved flag values
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> sha256
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  std::string version;
  std::size_t threads = 1;
  double wall_time_s = 0.0;

  void add_input(const std::filesystem::path& p);
  std::string to_json() const;
  void write(const std::filesystem::path& path) const;
};

/// Lowercase hex SHA-256 of a file's bytes. Throws DataError when unreadable.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

}  // namespace sociolex
