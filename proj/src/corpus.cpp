#include "sociolex/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "sociolex/common.hpp"
#include "utf8.hpp"

namespace sociolex::corpus {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::size_t kMaxWarningsPerFile = 5;

bool read_common_fields(const json& j, std::string& id, std::string& user, std::int64_t& ts,
                        int& offset, std::string& text, std::vector<std::string>& mentions,
                        std::optional<GeoPoint>& coords, std::string* why) {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (!j.is_object()) return fail("record is not an object");
  auto it = j.find("id");
  if (it == j.end() || !it->is_string()) return fail("missing string field 'id'");
  id = it->get<std::string>();
  it = j.find("user");
  if (it == j.end() || !it->is_string()) return fail("missing string field 'user'");
  user = it->get<std::string>();
  it = j.find("ts");
  if (it == j.end() || !it->is_number_integer()) return fail("missing integer field 'ts'");
  ts = it->get<std::int64_t>();
  it = j.find("text");
  if (it == j.end() || !it->is_string()) return fail("missing string field 'text'");
  text = it->get<std::string>();

  offset = 0;
  it = j.find("utc_offset");
  if (it != j.end()) {
    if (!it->is_number_integer()) return fail("'utc_offset' must be an integer");
    const auto v = it->get<std::int64_t>();
    if (v < -24 * 60 || v > 24 * 60) return fail("'utc_offset' out of range");
    offset = static_cast<int>(v);
  }
  mentions.clear();
  it = j.find("mentions");
  if (it != j.end()) {
    if (!it->is_array()) return fail("'mentions' must be an array");
    for (const auto& m : *it) {
      if (!m.is_string()) return fail("'mentions' entries must be strings");
      mentions.push_back(m.get<std::string>());
    }
  }
  coords.reset();
  const auto lat = j.find("lat");
  const auto lon = j.find("lon");
  const bool has_lat = lat != j.end() && !lat->is_null();
  const bool has_lon = lon != j.end() && !lon->is_null();
  if (has_lat != has_lon) return fail("'lat' and 'lon' must appear together");
  if (has_lat) {
    if (!lat->is_number() || !lon->is_number()) return fail("'lat'/'lon' must be numbers");
    GeoPoint p{lat->get<double>(), lon->get<double>()};
    if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0))
      return fail("coordinates out of range");
    coords = p;
  }
  return true;
}

bool starts_with_ci(std::u32string_view s, std::size_t pos, std::string_view pat) {
  if (pos + pat.size() > s.size()) return false;
  for (std::size_t k = 0; k < pat.size(); ++k) {
    if (utf8::to_lower(s[pos + k]) != static_cast<char32_t>(pat[k])) return false;
  }
  return true;
}

// ASCII emoticons stripped when not glued to a following letter or digit.
// "xd" is handled at token level.
constexpr std::array<std::string_view, 7> kAsciiEmoticons = {":)", ":(", ":d", ";)",
                                                             ":p", ":/", "<3"};

void strip_piece(std::u32string_view piece, std::vector<std::string>& tokens) {
  // URLs, mentions and hashtags run to the end of the whitespace-delimited piece.
  std::size_t end = piece.size();
  for (std::size_t i = 0; i < piece.size(); ++i) {
    const char32_t c = piece[i];
    if (c == '@' || c == '#' || starts_with_ci(piece, i, "http://") ||
        starts_with_ci(piece, i, "https://") || starts_with_ci(piece, i, "www.")) {
      end = i;
      break;
    }
  }
  std::u32string kept;
  kept.reserve(end);
  for (std::size_t i = 0; i < end;) {
    bool matched = false;
    for (auto emo : kAsciiEmoticons) {
      if (starts_with_ci(piece.substr(0, end), i, emo)) {
        const std::size_t after = i + emo.size();
        if (after >= end || !utf8::is_word(piece[after])) {
          i = after;
          matched = true;
          break;
        }
      }
    }
    if (matched) continue;
    const char32_t c = piece[i++];
    if (utf8::is_emoticon(c)) {
      kept.push_back(' ');
      continue;
    }
    if (utf8::is_apostrophe(c))
      kept.push_back('\'');
    else if (utf8::is_hyphen(c))
      kept.push_back('-');
    else if (utf8::is_word(c))
      kept.push_back(utf8::to_lower(c));
    else
      kept.push_back(' ');
  }
  // Runs of word characters, apostrophes and hyphens; edge apostrophes and
  // hyphens are punctuation.
  std::size_t i = 0;
  while (i < kept.size()) {
    while (i < kept.size() && kept[i] == ' ') ++i;
    std::size_t j = i;
    while (j < kept.size() && kept[j] != ' ') ++j;
    std::size_t a = i, b = j;
    while (a < b && (kept[a] == '\'' || kept[a] == '-')) ++a;
    while (b > a && (kept[b - 1] == '\'' || kept[b - 1] == '-')) --b;
    if (a < b) {
      std::string tok = utf8::encode(std::u32string_view(kept).substr(a, b - a));
      if (tok != "xd") tokens.push_back(std::move(tok));
    }
    i = j;
  }
}

}  // namespace

std::optional<RawPost> parse_record(std::string_view line, std::string* why) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) {
    if (why) *why = "invalid JSON";
    return std::nullopt;
  }
  RawPost p;
  if (!read_common_fields(j, p.post_id, p.author_id, p.timestamp, p.utc_offset_minutes, p.text,
                          p.mentioned_ids, p.coords, why))
    return std::nullopt;
  auto it = j.find("retweet");
  if (it != j.end()) {
    if (!it->is_boolean()) {
      if (why) *why = "'retweet' must be a boolean";
      return std::nullopt;
    }
    p.is_retweet = it->get<bool>();
  }
  return p;
}

namespace {

template <class Record, class Parser>
IngestStats stream_lines(const std::vector<std::filesystem::path>& paths, Parser parse,
                         const std::function<void(Record&&)>& sink) {
  IngestStats stats;
  std::unordered_set<std::string> seen;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::string line;
    std::size_t lineno = 0;
    std::size_t file_bad = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      std::string why;
      auto rec = parse(line, &why);
      if (rec && !seen.insert(rec->post_id).second) {
        why = "duplicate post id '" + rec->post_id + "'";
        rec.reset();
      }
      if (!rec) {
        ++stats.malformed;
        if (++file_bad <= kMaxWarningsPerFile)
          log_warning(path.string() + ":" + std::to_string(lineno) + ": skipped (" + why + ")");
        continue;
      }
      ++stats.records;
      sink(std::move(*rec));
    }
    if (in.bad()) throw DataError("error while reading " + path.string());
    if (file_bad > kMaxWarningsPerFile)
      log_warning(path.string() + ": " + std::to_string(file_bad) + " malformed lines skipped");
  }
  return stats;
}

}  // namespace

IngestStats ingest(const std::vector<std::filesystem::path>& paths,
                   const std::function<void(RawPost&&)>& sink) {
  return stream_lines<RawPost>(
      paths, [](std::string_view l, std::string* w) { return parse_record(l, w); }, sink);
}

std::vector<RawPost> ingest_all(const std::vector<std::filesystem::path>& paths,
                                IngestStats* stats) {
  std::vector<RawPost> out;
  auto s = ingest(paths, [&](RawPost&& p) { out.push_back(std::move(p)); });
  if (stats) *stats = s;
  return out;
}

NormalizedText normalize_text(std::string_view text) {
  const std::u32string cps = utf8::decode(text);
  NormalizedText out;
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && utf8::is_space(cps[i])) ++i;
    std::size_t j = i;
    while (j < cps.size() && !utf8::is_space(cps[j])) ++j;
    if (j > i) strip_piece(std::u32string_view(cps).substr(i, j - i), out.tokens);
    i = j;
  }
  for (std::size_t k = 0; k < out.tokens.size(); ++k) {
    if (k) out.text_marker.push_back(' ');
    out.text_marker += out.tokens[k];
  }
  return out;
}

int hour_of_week(std::int64_t utc_seconds, int utc_offset_minutes) {
  const std::int64_t local = utc_seconds + std::int64_t{utc_offset_minutes} * 60;
  auto floor_div = [](std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
  };
  const std::int64_t hours = floor_div(local, 3600);
  const std::int64_t days = floor_div(hours, 24);
  // 1970-01-01 was a Thursday, i.e. day 3 of a Monday-based week.
  const std::int64_t weekday = ((days + 3) % 7 + 7) % 7;
  const std::int64_t hour = hours - days * 24;
  return static_cast<int>(weekday * 24 + hour);
}

std::optional<CleanPost> preprocess(const RawPost& post) {
  if (post.is_retweet) return std::nullopt;
  CleanPost c;
  c.post_id = post.post_id;
  c.author_id = post.author_id;
  c.timestamp = post.timestamp;
  c.utc_offset_minutes = post.utc_offset_minutes;
  c.local_hour_of_week = hour_of_week(post.timestamp, post.utc_offset_minutes);
  auto norm = normalize_text(post.text);
  c.text_marker = std::move(norm.text_marker);
  c.tokens = std::move(norm.tokens);
  c.mentioned_ids = post.mentioned_ids;
  c.coords = post.coords;
  return c;
}

std::vector<CleanPost> preprocess_all(const std::vector<RawPost>& posts,
                                      std::size_t* retweets_dropped) {
  std::vector<std::optional<CleanPost>> slots(posts.size());
  parallel_for(posts.size(), [&](std::size_t i) { slots[i] = preprocess(posts[i]); });
  std::vector<CleanPost> out;
  out.reserve(posts.size());
  std::size_t dropped = 0;
  for (auto& s : slots) {
    if (s)
      out.push_back(std::move(*s));
    else
      ++dropped;
  }
  if (retweets_dropped) *retweets_dropped = dropped;
  return out;
}

std::map<std::string, UserTimeline> build_timelines(std::vector<CleanPost> posts) {
  std::map<std::string, UserTimeline> out;
  for (auto& p : posts) {
    auto& tl = out[p.author_id];
    if (tl.author_id.empty()) tl.author_id = p.author_id;
    tl.posts.push_back(std::move(p));
  }
  for (auto& [_, tl] : out) {
    std::sort(tl.posts.begin(), tl.posts.end(), [](const CleanPost& a, const CleanPost& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.post_id < b.post_id;
    });
  }
  return out;
}

std::string to_ndjson(const CleanPost& post) {
  ojson j;
  j["id"] = post.post_id;
  j["user"] = post.author_id;
  j["ts"] = post.timestamp;
  j["utc_offset"] = post.utc_offset_minutes;
  j["text"] = post.text_marker;
  j["retweet"] = false;
  j["mentions"] = post.mentioned_ids;
  if (post.coords) {
    j["lat"] = post.coords->lat;
    j["lon"] = post.coords->lon;
  }
  j["tokens"] = post.tokens;
  j["how"] = post.local_hour_of_week;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::optional<CleanPost> parse_clean_record(std::string_view line, std::string* why) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) {
    if (why) *why = "invalid JSON";
    return std::nullopt;
  }
  CleanPost c;
  if (!read_common_fields(j, c.post_id, c.author_id, c.timestamp, c.utc_offset_minutes,
                          c.text_marker, c.mentioned_ids, c.coords, why))
    return std::nullopt;
  auto it = j.find("tokens");
  if (it == j.end() || !it->is_array()) {
    if (why) *why = "missing array field 'tokens'";
    return std::nullopt;
  }
  for (const auto& t : *it) {
    if (!t.is_string()) {
      if (why) *why = "'tokens' entries must be strings";
      return std::nullopt;
    }
    c.tokens.push_back(t.get<std::string>());
  }
  it = j.find("how");
  if (it == j.end() || !it->is_number_integer() || it->get<int>() < 0 || it->get<int>() > 167) {
    if (why) *why = "missing or invalid 'how'";
    return std::nullopt;
  }
  c.local_hour_of_week = it->get<int>();
  return c;
}

IngestStats stream_clean(const std::vector<std::filesystem::path>& paths,
                         const std::function<void(CleanPost&&)>& sink) {
  return stream_lines<CleanPost>(
      paths, [](std::string_view l, std::string* w) { return parse_clean_record(l, w); }, sink);
}

std::vector<CleanPost> read_clean(const std::vector<std::filesystem::path>& paths,
                                  IngestStats* stats) {
  std::vector<CleanPost> out;
  auto s = stream_clean(paths, [&](CleanPost&& p) { out.push_back(std::move(p)); });
  if (stats) *stats = s;
  return out;
}

}  // namespace sociolex::corpus
