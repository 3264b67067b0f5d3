#include "sociolex/lingmark.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "sociolex/common.hpp"
#include "sociolex/csv.hpp"

namespace sociolex {

Marker parse_marker(std::string_view name) {
  if (name == "cn") return Marker::Negation;
  if (name == "cp") return Marker::Plural;
  if (name == "vs") return Marker::Vocabulary;
  throw UsageError("unknown marker '" + std::string(name) + "' (expected cn, cp or vs)");
}

std::string marker_name(Marker m) {
  switch (m) {
    case Marker::Negation: return "cn";
    case Marker::Plural: return "cp";
    case Marker::Vocabulary: return "vs";
  }
  return "?";
}

std::optional<double> marker_value(const LinguisticProfile& p, Marker m) {
  switch (m) {
    case Marker::Negation: return p.L_cn;
    case Marker::Plural: return p.L_cp;
    case Marker::Vocabulary: return p.L_vs;
  }
  return std::nullopt;
}

const std::set<std::string>& PluralLexicon::default_determiners() {
  static const std::set<std::string> d = {
      "les",  "des",  "ces",      "ses",       "mes",  "tes",  "nos",  "vos",
      "leurs", "aux", "quelques", "plusieurs", "deux", "trois", "quatre", "cinq",
      "six",  "sept", "huit",     "neuf",      "dix"};
  return d;
}

PluralLexicon::PluralLexicon() : determiners_(default_determiners()) {}

void PluralLexicon::set_determiners(std::set<std::string> d) {
  if (d.empty()) throw UsageError("plural determiner set must not be empty");
  determiners_ = std::move(d);
}

void PluralLexicon::add(std::string singular, std::string plural) {
  if (singular.empty() || plural.empty())
    throw UsageError("lexicon entry with an empty form");
  if (singular == plural)
    throw UsageError("lexicon entry maps '" + singular + "' to itself");
  // A form already registered as plural stays plural.
  forms_.try_emplace(singular, Variant::Nonstandard);
  forms_[plural] = Variant::Standard;
  entries_.emplace_back(std::move(singular), std::move(plural));
}

PluralLexicon PluralLexicon::load(const std::filesystem::path& path) {
  const auto table = csv::read(path, /*has_header=*/false);
  PluralLexicon lex;
  for (const auto& row : table.rows) {
    if (row.size() != 2) throw DataError(path.string() + ": lexicon rows need 2 fields");
    try {
      lex.add(row[0], row[1]);
    } catch (const UsageError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  return lex;
}

bool PluralLexicon::is_determiner(std::string_view w) const {
  return determiners_.find(std::string(w)) != determiners_.end();
}

std::optional<Variant> PluralLexicon::classify(std::string_view word) const {
  auto it = forms_.find(std::string(word));
  if (it == forms_.end()) return std::nullopt;
  return it->second;
}

namespace lingmark {

namespace {

constexpr std::array<std::string_view, 11> kParticles = {
    "pas", "pa", "aps", "jamais", "ni", "personne", "rien", "ri1", "r1", "aucun", "aucune"};

// Regex \w semantics: ASCII alphanumerics, underscore, and any non-ASCII byte.
inline bool word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') ||
         (u >= 'A' && u <= 'Z') || u == '_';
}

bool is_particle(std::string_view w) {
  return std::find(kParticles.begin(), kParticles.end(), w) != kParticles.end();
}

}  // namespace

NegationResult detect_negation(std::string_view text, const NegationOptions& opt) {
  std::size_t first_particle = std::string_view::npos;
  std::size_t first_ne = std::string_view::npos;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!word_byte(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && word_byte(text[j])) ++j;
    const std::string_view w = text.substr(i, j - i);
    if (first_particle == std::string_view::npos && is_particle(w)) first_particle = i;
    if (first_ne == std::string_view::npos) {
      // \b(ne|n')\b : "n'" must be followed by a word character.
      if (w == "ne" || (w == "n" && j + 1 < text.size() && text[j] == '\'' && word_byte(text[j + 1])))
        first_ne = i;
    }
    i = j;
  }
  if (first_particle == std::string_view::npos) return NegationResult::None;
  if (first_ne == std::string_view::npos) return NegationResult::Nonstandard;
  if (opt.require_ne_before_particle && first_ne > first_particle)
    return NegationResult::Nonstandard;
  return NegationResult::Standard;
}

std::vector<Variant> detect_plural(const std::vector<std::string>& tokens,
                                   const PluralLexicon& lexicon) {
  std::vector<Variant> out;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (!lexicon.is_determiner(tokens[i])) continue;
    if (auto v = lexicon.classify(tokens[i + 1])) out.push_back(*v);
  }
  return out;
}

PostMarkers observe(const CleanPost& post, const PluralLexicon& lexicon,
                    const NegationOptions& opt) {
  PostMarkers m;
  m.negation = detect_negation(post.text_marker, opt);
  for (Variant v : detect_plural(post.tokens, lexicon)) {
    if (v == Variant::Standard)
      ++m.plural_standard;
    else
      ++m.plural_nonstandard;
  }
  return m;
}

LinguisticProfile rates(const MarkerCounts& c) {
  LinguisticProfile p;
  if (c.n_cn + c.n_incn > 0)
    p.L_cn = static_cast<double>(c.n_cn) / static_cast<double>(c.n_cn + c.n_incn);
  if (c.n_cp + c.n_incp > 0)
    p.L_cp = static_cast<double>(c.n_cp) / static_cast<double>(c.n_cp + c.n_incp);
  if (c.n_tweets > 0)
    p.L_vs = static_cast<double>(c.n_unique_words) / static_cast<double>(c.n_tweets);
  return p;
}

UserMarkers profile_user(const UserTimeline& timeline, const PluralLexicon& lexicon,
                         const NegationOptions& opt) {
  if (timeline.posts.empty())
    throw UsageError("cannot profile user '" + timeline.author_id + "': empty timeline");
  UserMarkers out;
  std::unordered_set<std::string_view> vocab;
  for (const auto& post : timeline.posts) {
    const PostMarkers m = observe(post, lexicon, opt);
    if (m.negation == NegationResult::Standard) ++out.counts.n_cn;
    if (m.negation == NegationResult::Nonstandard) ++out.counts.n_incn;
    out.counts.n_cp += m.plural_standard;
    out.counts.n_incp += m.plural_nonstandard;
    for (const auto& t : post.tokens) vocab.insert(t);
  }
  out.counts.n_unique_words = vocab.size();
  out.counts.n_tweets = timeline.posts.size();
  out.profile = rates(out.counts);
  return out;
}

void ProfileBuilder::add_batch(const std::vector<CleanPost>& posts) {
  std::vector<PostMarkers> obs(posts.size());
  parallel_for(posts.size(), [&](std::size_t i) { obs[i] = observe(posts[i], lexicon_, opt_); });
  for (std::size_t i = 0; i < posts.size(); ++i) {
    Acc& a = users_[posts[i].author_id];
    if (obs[i].negation == NegationResult::Standard) ++a.counts.n_cn;
    if (obs[i].negation == NegationResult::Nonstandard) ++a.counts.n_incn;
    a.counts.n_cp += obs[i].plural_standard;
    a.counts.n_incp += obs[i].plural_nonstandard;
    ++a.counts.n_tweets;
    for (const auto& t : posts[i].tokens) a.vocab.insert(t);
  }
}

std::map<std::string, UserMarkers> ProfileBuilder::finish() const {
  std::map<std::string, UserMarkers> out;
  for (const auto& [user, a] : users_) {
    UserMarkers m;
    m.counts = a.counts;
    m.counts.n_unique_words = a.vocab.size();
    m.profile = rates(m.counts);
    out.emplace(user, m);
  }
  return out;
}

std::map<std::string, UserMarkers> profile_all(const std::map<std::string, UserTimeline>& timelines,
                                               const PluralLexicon& lexicon,
                                               const NegationOptions& opt) {
  std::vector<const UserTimeline*> order;
  order.reserve(timelines.size());
  for (const auto& [_, tl] : timelines) order.push_back(&tl);
  std::vector<UserMarkers> results(order.size());
  parallel_for(order.size(),
               [&](std::size_t i) { results[i] = profile_user(*order[i], lexicon, opt); });
  std::map<std::string, UserMarkers> out;
  for (std::size_t i = 0; i < order.size(); ++i)
    out.emplace(order[i]->author_id, std::move(results[i]));
  return out;
}

GroupMean group_average(const std::map<std::string, LinguisticProfile>& profiles,
                        const std::set<std::string>& members, Marker variable) {
  GroupMean g;
  double sum = 0.0;
  for (const auto& m : members) {
    auto it = profiles.find(m);
    if (it == profiles.end()) continue;
    if (auto v = marker_value(it->second, variable)) {
      sum += *v;
      ++g.n;
    }
  }
  if (g.n > 0) g.mean = sum / static_cast<double>(g.n);
  return g;
}

}  // namespace lingmark
}  // namespace sociolex
