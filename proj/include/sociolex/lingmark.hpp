#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sociolex/corpus.hpp"

namespace sociolex {

enum class Variant { Standard, Nonstandard };
enum class NegationResult { Standard, Nonstandard, None };

/// Raw per-user marker counts.
struct MarkerCounts {
  std::size_t n_cn = 0;    // standard negations
  std::size_t n_incn = 0;  // negations missing "ne"
  std::size_t n_cp = 0;    // plural-marked forms after a plural determiner
  std::size_t n_incp = 0;  // singular forms after a plural determiner
  std::size_t n_unique_words = 0;
  std::size_t n_tweets = 0;

  friend bool operator==(const MarkerCounts&, const MarkerCounts&) = default;
};

/// Per-user rates; each is absent when its denominator is zero.
struct LinguisticProfile {
  std::optional<double> L_cn;
  std::optional<double> L_cp;
  std::optional<double> L_vs;
};

enum class Marker { Negation, Plural, Vocabulary };

Marker parse_marker(std::string_view name);  // "cn" | "cp" | "vs"
std::string marker_name(Marker m);
std::optional<double> marker_value(const LinguisticProfile& p, Marker m);

class PluralLexicon {
 public:
  /// Default plural determiners.
  static const std::set<std::string>& default_determiners();

  PluralLexicon();
  /// Throws UsageError on an entry mapping a word to itself or an empty form.
  void add(std::string singular, std::string plural);
  /// CSV "singular,plural", UTF-8, no header.
  static PluralLexicon load(const std::filesystem::path& path);

  bool is_determiner(std::string_view w) const;
  /// Variant for `word` if it is a known singular or plural form.
  std::optional<Variant> classify(std::string_view word) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  const std::set<std::string>& determiners() const { return determiners_; }
  void set_determiners(std::set<std::string> d);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::unordered_map<std::string, Variant> forms_;
  std::set<std::string> determiners_;
};

namespace lingmark {

struct NegationOptions {
  /// Require "ne"/"n'" to precede the first particle instead of appearing
  /// anywhere in the post.
  bool require_ne_before_particle = false;
};

/// One observation per post, decided by the first particle.
NegationResult detect_negation(std::string_view text_marker, const NegationOptions& opt = {});

/// One entry per (plural determiner, lexicon word) bigram.
std::vector<Variant> detect_plural(const std::vector<std::string>& tokens,
                                   const PluralLexicon& lexicon);

/// Marker observations of a single post.
struct PostMarkers {
  NegationResult negation = NegationResult::None;
  std::size_t plural_standard = 0;
  std::size_t plural_nonstandard = 0;
};

PostMarkers observe(const CleanPost& post, const PluralLexicon& lexicon,
                    const NegationOptions& opt = {});

LinguisticProfile rates(const MarkerCounts& c);

struct UserMarkers {
  MarkerCounts counts;
  LinguisticProfile profile;
};

/// Throws UsageError on an empty timeline.
UserMarkers profile_user(const UserTimeline& timeline, const PluralLexicon& lexicon,
                         const NegationOptions& opt = {});

/// Profiles for every timeline, computed in parallel.
std::map<std::string, UserMarkers> profile_all(const std::map<std::string, UserTimeline>& timelines,
                                               const PluralLexicon& lexicon,
                                               const NegationOptions& opt = {});

/// Streaming equivalent of profile_all for corpora too large to hold as
/// timelines. Posts may arrive in any order.
class ProfileBuilder {
 public:
  explicit ProfileBuilder(const PluralLexicon& lexicon, NegationOptions opt = {})
      : lexicon_(lexicon), opt_(opt) {}
  /// Marker observation runs in parallel; accumulation is serial.
  void add_batch(const std::vector<CleanPost>& posts);
  std::map<std::string, UserMarkers> finish() const;

 private:
  struct Acc {
    MarkerCounts counts;
    std::unordered_set<std::string> vocab;
  };
  const PluralLexicon& lexicon_;
  NegationOptions opt_;
  std::unordered_map<std::string, Acc> users_;
};

struct GroupMean {
  std::optional<double> mean;
  std::size_t n = 0;  // members having the variable
};

GroupMean group_average(const std::map<std::string, LinguisticProfile>& profiles,
                        const std::set<std::string>& members, Marker variable);

}  // namespace lingmark
}  // namespace sociolex
