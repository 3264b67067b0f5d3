#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "sociolex/common.hpp"
#include "sociolex/corpus.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("sociolex-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Clean post built through the real preprocessing path.
inline sociolex::CleanPost post(const std::string& id, const std::string& author, std::int64_t ts,
                                const std::string& text, std::vector<std::string> mentions = {}) {
  sociolex::RawPost r;
  r.post_id = id;
  r.author_id = author;
  r.timestamp = ts;
  r.text = text;
  r.mentioned_ids = std::move(mentions);
  return *sociolex::corpus::preprocess(r);
}

// Monday 2018-01-01 00:00 UTC.
constexpr std::int64_t kMonday = 1514764800;

}  // namespace testutil
