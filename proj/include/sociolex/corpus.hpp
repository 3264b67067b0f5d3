#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sociolex {

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// One message as it arrives from the corpus files.
struct RawPost {
  std::string post_id;
  std::string author_id;
  std::int64_t timestamp = 0;  // UTC epoch seconds
  int utc_offset_minutes = 0;
  std::string text;
  bool is_retweet = false;
  std::vector<std::string> mentioned_ids;
  std::optional<GeoPoint> coords;
};

/// A normalized non-retweet post. Mentions and coordinates are carried along
/// unchanged so the network and geolocation stages can work from clean files.
struct CleanPost {
  std::string post_id;
  std::string author_id;
  std::int64_t timestamp = 0;
  int utc_offset_minutes = 0;
  int local_hour_of_week = 0;  // [0, 167], Monday 00:00 local = 0
  std::string text_marker;
  std::vector<std::string> tokens;
  std::vector<std::string> mentioned_ids;
  std::optional<GeoPoint> coords;
};

struct UserTimeline {
  std::string author_id;
  std::vector<CleanPost> posts;  // ascending timestamp
  std::size_t n_tweets() const { return posts.size(); }
};

namespace corpus {

struct IngestStats {
  std::size_t records = 0;    // well-formed records delivered
  std::size_t malformed = 0;  // skipped lines (bad JSON, bad fields, duplicate ids)
};

/// Parse one NDJSON record. Returns nullopt and fills `why` when malformed.
std::optional<RawPost> parse_record(std::string_view line, std::string* why = nullptr);

/// Stream every well-formed record of `paths`, in file order, into `sink`.
/// Unreadable files throw DataError naming the path; malformed lines are
/// counted, reported as warnings and skipped. Post ids must be unique across
/// the whole file set; repeats count as malformed.
IngestStats ingest(const std::vector<std::filesystem::path>& paths,
                   const std::function<void(RawPost&&)>& sink);

std::vector<RawPost> ingest_all(const std::vector<std::filesystem::path>& paths,
                                IngestStats* stats = nullptr);

struct NormalizedText {
  std::string text_marker;
  std::vector<std::string> tokens;
};

/// Strip URLs, mentions, hashtags and emoticons, downcase, split on whitespace
/// and drop punctuation (keeping word-internal apostrophes and hyphens).
/// text_marker is the tokens joined by single spaces.
NormalizedText normalize_text(std::string_view text);

/// Hour of the local week, Monday 00:00 = 0.
int hour_of_week(std::int64_t utc_seconds, int utc_offset_minutes);

/// nullopt for retweets.
std::optional<CleanPost> preprocess(const RawPost& post);

/// Preprocess a batch in parallel; retweets are dropped and counted.
std::vector<CleanPost> preprocess_all(const std::vector<RawPost>& posts,
                                      std::size_t* retweets_dropped = nullptr);

/// Keyed by author id; every timeline sorted by (timestamp, post_id).
std::map<std::string, UserTimeline> build_timelines(std::vector<CleanPost> posts);

// Clean-post NDJSON envelope: the raw fields plus "tokens" and "how".
std::string to_ndjson(const CleanPost& post);
std::optional<CleanPost> parse_clean_record(std::string_view line, std::string* why = nullptr);
IngestStats stream_clean(const std::vector<std::filesystem::path>& paths,
                         const std::function<void(CleanPost&&)>& sink);
std::vector<CleanPost> read_clean(const std::vector<std::filesystem::path>& paths,
                                  IngestStats* stats = nullptr);

}  // namespace corpus
}  // namespace sociolex
