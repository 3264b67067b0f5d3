#include "sociolex/synth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>
#include <variant>

#include <json.hpp>

#include "sociolex/common.hpp"
#include "sociolex/csv.hpp"

namespace sociolex::synth {

namespace {

using Field = std::variant<std::size_t SynthConfig::*, int SynthConfig::*, double SynthConfig::*>;

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = {
      {"n_users", &SynthConfig::n_users},
      {"patches_per_side", &SynthConfig::patches_per_side},
      {"income_log_mean", &SynthConfig::income_log_mean},
      {"income_log_sd", &SynthConfig::income_log_sd},
      {"population_log_mean", &SynthConfig::population_log_mean},
      {"population_log_sd", &SynthConfig::population_log_sd},
      {"cn_intercept", &SynthConfig::cn_intercept},
      {"cn_slope", &SynthConfig::cn_slope},
      {"cp_intercept", &SynthConfig::cp_intercept},
      {"cp_slope", &SynthConfig::cp_slope},
      {"vs_base", &SynthConfig::vs_base},
      {"vs_slope", &SynthConfig::vs_slope},
      {"gradient", &SynthConfig::gradient},
      {"vs_gradient", &SynthConfig::vs_gradient},
      {"user_noise_sd", &SynthConfig::user_noise_sd},
      {"turnover", &SynthConfig::turnover},
      {"day_start_hour", &SynthConfig::day_start_hour},
      {"day_end_hour", &SynthConfig::day_end_hour},
      {"mean_degree", &SynthConfig::mean_degree},
      {"assortativity", &SynthConfig::assortativity},
      {"influence", &SynthConfig::influence},
      {"circle_size", &SynthConfig::circle_size},
      {"circle_share", &SynthConfig::circle_share},
      {"circle_sd", &SynthConfig::circle_sd},
      {"classes", &SynthConfig::classes},
      {"one_way_mentions", &SynthConfig::one_way_mentions},
      {"posts_per_user", &SynthConfig::posts_per_user},
      {"posts_spread", &SynthConfig::posts_spread},
      {"p_negation", &SynthConfig::p_negation},
      {"p_plural", &SynthConfig::p_plural},
      {"p_geotag", &SynthConfig::p_geotag},
      {"p_away", &SynthConfig::p_away},
      {"p_hotspot", &SynthConfig::p_hotspot},
      {"p_retweet", &SynthConfig::p_retweet},
      {"p_decoration", &SynthConfig::p_decoration},
      {"weeks", &SynthConfig::weeks},
      {"corpus_shards", &SynthConfig::corpus_shards},
      {"malformed_lines", &SynthConfig::malformed_lines},
      {"reference_noise", &SynthConfig::reference_noise},
      {"ref_lat", &SynthConfig::ref_lat},
  };
  return f;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* b = text.data();
  const char* e = b + text.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw UsageError("config key '" + key + "': invalid value '" + text + "'");
  return v;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

SynthConfig SynthConfig::from_kv(const std::map<std::string, std::string>& kv) {
  SynthConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
      continue;
    }
    auto it = std::find_if(fields().begin(), fields().end(), [&](const auto& f) { return f.first == key; });
    if (it == fields().end()) throw UsageError("unknown synth config key '" + key + "'");
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(c.*member)>;
          c.*member = parse_number<T>(key, value);
        },
        it->second);
  }
  return c;
}

std::map<std::string, std::string> SynthConfig::to_kv() const {
  std::map<std::string, std::string> kv;
  if (seed) kv["seed"] = std::to_string(*seed);
  for (const auto& [key, field] : fields()) {
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(this->*member)>;
          if constexpr (std::is_same_v<T, double>)
            kv[key] = format_double(this->*member);
          else
            kv[key] = std::to_string(this->*member);
        },
        field);
  }
  return kv;
}

void SynthConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw UsageError("synth config: " + msg);
  };
  require(seed.has_value(), "a seed is mandatory");
  require(n_users >= 20, "n_users must be at least 20");
  require(patches_per_side >= 4, "patches_per_side must be at least 4");
  require(income_log_sd > 0 && population_log_sd >= 0, "log-normal spreads must be positive");
  for (double p : {p_negation, p_plural, p_geotag, p_away, p_hotspot, p_retweet, p_decoration})
    require(p >= 0.0 && p <= 1.0, "probabilities must lie in [0, 1]");
  require(assortativity >= 0.0 && assortativity <= 1.0, "assortativity must lie in [0, 1]");
  require(influence >= 0.0 && influence <= 1.0, "influence must lie in [0, 1]");
  require(circle_size >= 2, "circle_size must be at least 2");
  require(circle_share >= 0.0 && circle_share <= 1.0, "circle_share must lie in [0, 1]");
  require(circle_sd >= 0.0 && std::isfinite(circle_sd), "circle_sd must be non-negative");
  for (double v : {cn_intercept, cn_slope, cp_intercept, cp_slope, vs_slope, gradient, vs_gradient,
                   turnover, user_noise_sd})
    require(std::isfinite(v), "slopes and intercepts must be finite");
  require(user_noise_sd >= 0.0, "user_noise_sd must be non-negative");
  require(vs_base >= 1.0, "vs_base must be at least 1");
  require(day_start_hour >= 0 && day_start_hour < day_end_hour && day_end_hour <= 24,
          "day hours must satisfy 0 <= start < end <= 24");
  require(day_end_hour - day_start_hour < 24, "night window must not be empty");
  require(classes >= 2, "at least 2 classes");
  require(static_cast<std::size_t>(classes) <= n_users, "more classes than users");
  require(mean_degree >= 0.0, "mean_degree must be non-negative");
  if (mean_degree >= static_cast<double>(n_users))
    throw UsageError("synth config: infeasible network, mean degree " + format_double(mean_degree) +
                     " >= n_users " + std::to_string(n_users));
  require(posts_per_user >= 1 && posts_spread < posts_per_user, "posts_spread must be below posts_per_user");
  require(weeks >= 1, "weeks must be at least 1");
  require(corpus_shards >= 1, "corpus_shards must be at least 1");
  require(reference_noise >= 0.0 && reference_noise < 1.0, "reference_noise must lie in [0, 1)");
  require(one_way_mentions >= 0.0, "one_way_mentions must be non-negative");
}

SynthConfig SynthConfig::null_effects() const {
  SynthConfig c = *this;
  c.cn_slope = c.cp_slope = c.vs_slope = 0.0;
  c.gradient = c.vs_gradient = 0.0;
  c.assortativity = 0.0;
  return c;
}

std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    kv[trim(line.substr(0, eq))] = value;
  }
  return kv;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::int64_t kFirstMondayUtc = 1420416000;  // 2015-01-05 00:00
constexpr std::size_t kFillerWords = 20'000;

const std::array<std::string_view, 5> kSubjects = {"je", "tu", "on", "il", "elle"};
const std::array<std::string_view, 12> kConsonantVerbs = {
    "fume", "sais", "veux", "peux", "vois", "comprends", "mange", "dors", "crois", "regarde", "parle",
    "trouve"};
const std::array<std::string_view, 6> kVowelVerbs = {"aime", "ai", "écoute", "oublie", "arrive", "attends"};
const std::array<std::string_view, 5> kParticles = {"pas", "jamais", "rien", "personne", "pas"};
const std::array<std::string_view, 6> kInterjections = {"!", "!!", "?", "...", ",", "."};
const std::array<std::string_view, 4> kEmoticons = {"\xF0\x9F\x98\x80", "\xF0\x9F\x98\x82", ":)", "<3"};

struct Hotspot {
  double lat, lon;
};
const std::array<Hotspot, 3> kHotspots = {{{48.8566, 2.3522}, {45.764, 4.8357}, {43.2965, 5.3698}}};

std::vector<std::string> make_filler(const PluralLexicon& lexicon) {
  static const std::string consonants = "bcdfgklmnprstvz";
  static const std::string vowels = "aeiou";
  std::set<std::string> reserved;
  for (const auto& [s, p] : lexicon.entries()) {
    reserved.insert(s);
    reserved.insert(p);
  }
  for (const auto& d : lexicon.determiners()) reserved.insert(d);
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  Rng rng(0x66696c6c6572ULL);  // fixed: the filler vocabulary never depends on the seed
  while (out.size() < kFillerWords) {
    std::string w;
    const int syllables = 3 + static_cast<int>(rng.below(2));
    for (int s = 0; s < syllables; ++s) {
      w.push_back(consonants[rng.below(consonants.size())]);
      w.push_back(vowels[rng.below(vowels.size())]);
    }
    if (reserved.count(w) || !seen.insert(w).second) continue;
    out.push_back(std::move(w));
  }
  return out;
}

std::string user_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u%05zu", i);
  return buf;
}

std::string patch_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "P%05zu", i);
  return buf;
}

std::string unit_id(char prefix, int idx, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*d", prefix, width, idx);
  return buf;
}

std::int64_t floor_to(double v, int size) {
  return static_cast<std::int64_t>(std::floor(v / size)) * size;
}

struct Lattice {
  std::vector<int> row, col;  // per patch
  double north_min = 0, north_max = 0;
};

}  // namespace

SynthData generate(const SynthConfig& cfg, const PluralLexicon& lexicon) {
  cfg.validate();
  if (lexicon.size() == 0) throw UsageError("synth needs a non-empty plural lexicon");
  const std::uint64_t seed = *cfg.seed;
  const geoloc::Projection proj(cfg.ref_lat);
  SynthData data;
  data.config = cfg;

  // --- patches on a lattice over metropolitan France --------------------------
  const int side = cfg.patches_per_side;
  const PlanarPoint sw = proj.project({42.6, -4.2});
  const PlanarPoint ne = proj.project({50.8, 7.6});
  const double step_e = (ne.easting - sw.easting) / side;
  const double step_n = (ne.northing - sw.northing) / side;
  Lattice lat;
  {
    Rng rng(derive_seed(seed, kTagSynthPatch));
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        Patch p;
        p.patch_id = patch_id(data.patches.size());
        const double e = sw.easting + (c + rng.uniform(0.2, 0.8)) * step_e;
        const double n = sw.northing + (r + rng.uniform(0.2, 0.8)) * step_n;
        p.cell = {floor_to(e, geoloc::kPatchCellM), floor_to(n, geoloc::kPatchCellM), geoloc::kPatchCellM};
        p.N = std::max(1.0, std::round(std::exp(cfg.population_log_mean + cfg.population_log_sd * rng.normal())));
        p.N_hh = p.N;
        const double z = rng.normal();
        const double inc = std::exp(cfg.income_log_mean + cfg.income_log_sd * z);
        p.S_hh = std::round(inc * p.N_hh);
        p.N_own = std::round(p.N * sigmoid(0.5 * z + 0.5 * rng.normal()));
        p.ind = ses::compute_indicators(p.S_hh, p.N_hh, p.N_own, p.N);
        data.patches.push_back(std::move(p));
        lat.row.push_back(r);
        lat.col.push_back(c);
      }
    }
    lat.north_min = sw.northing;
    lat.north_max = ne.northing;
  }

  // --- administrative units: rectangular blocks of the lattice ---------------
  struct Level {
    const char* name;
    char prefix;
    int cols, rows, width;
  };
  const std::array<Level, 3> levels = {{{"region", 'R', 2, 11, 2},
                                        {"department", 'D', 8, 12, 3},
                                        {"canton", 'C', 20, 20, 4}}};
  std::vector<std::array<std::string, 3>> patch_units(data.patches.size());
  for (std::size_t i = 0; i < data.patches.size(); ++i) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto& L = levels[l];
      const int ur = std::min(L.rows - 1, lat.row[i] * L.rows / side);
      const int uc = std::min(L.cols - 1, lat.col[i] * L.cols / side);
      patch_units[i][l] = unit_id(L.prefix, ur * L.cols + uc + 1, L.width);
      data.regions.add(data.patches[i].cell, L.name, patch_units[i][l]);
    }
  }
  {
    Rng rng(derive_seed(seed, kTagSynthPatch, 1));
    for (std::size_t l = 0; l < levels.size(); ++l) {
      std::map<std::string, double> pops;
      for (std::size_t i = 0; i < data.patches.size(); ++i) pops[patch_units[i][l]] += data.patches[i].N;
      for (auto& [unit, pop] : pops) pop = std::max(1.0, std::round(pop * (1.0 + cfg.reference_noise * rng.normal())));
      data.reference[levels[l].name] = std::move(pops);
    }
  }

  // --- users: patch chosen proportionally to population ---------------------
  const std::size_t n = cfg.n_users;
  data.users.resize(n);
  std::vector<std::size_t> user_patch(n);
  {
    std::vector<double> cum;
    double total = 0.0;
    for (const auto& p : data.patches) cum.push_back(total += p.N);
    Rng rng(derive_seed(seed, kTagSynthUser));
    for (std::size_t u = 0; u < n; ++u) {
      const double r = rng.uniform() * total;
      const auto k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
      user_patch[u] = std::min(k, data.patches.size() - 1);
      const Patch& p = data.patches[user_patch[u]];
      TrueUser& tu = data.users[u];
      tu.author_id = user_id(u);
      tu.patch_id = p.patch_id;
      // One of the four 100 m cells of the patch.
      tu.home = {p.cell.easting_m + 100 * static_cast<std::int64_t>(rng.below(2)),
                 p.cell.northing_m + 100 * static_cast<std::int64_t>(rng.below(2)), geoloc::kHomeCellM};
      tu.S_inc = *p.ind.S_inc;
    }
  }
  {
    std::vector<std::pair<std::string, double>> incomes;
    for (const auto& u : data.users) incomes.emplace_back(u.author_id, u.S_inc);
    const auto part = ses::partition_classes(incomes, cfg.classes);
    for (auto& u : data.users) u.socio_class = part.assignment.at(u.author_id);
  }

  // --- network: class-aware stochastic block model ---------------------------
  std::vector<std::vector<std::uint32_t>> adjacency(n);
  {
    const int k = cfg.classes;
    std::vector<std::vector<std::uint32_t>> members(k);
    for (std::uint32_t u = 0; u < n; ++u) members[data.users[u].socio_class - 1].push_back(u);
    const double boost = 1.0 + cfg.assortativity * (k - 1);
    double weight = 0.0;
    for (int a = 0; a < k; ++a) {
      const double na = static_cast<double>(members[a].size());
      weight += boost * na * (na - 1) / 2.0;
      for (int b = a + 1; b < k; ++b) weight += na * static_cast<double>(members[b].size());
    }
    const double base = weight > 0 ? cfg.mean_degree * static_cast<double>(n) / 2.0 / weight : 0.0;
    if (base * boost > 1.0) throw UsageError("synth config: mean degree too high for the block model");
    Rng rng(derive_seed(seed, kTagSynthGraph));
    auto sample_block = [&](const std::vector<std::uint32_t>& A, const std::vector<std::uint32_t>& B,
                            bool same, double p) {
      if (p <= 0.0) return;
      for (std::size_t i = 0; i < A.size(); ++i) {
        std::size_t j = same ? i + 1 : 0;
        for (;;) {
          const std::uint64_t skip = rng.geometric(std::min(p, 1.0));
          if (skip >= B.size()) break;
          j += static_cast<std::size_t>(skip);
          if (j >= B.size()) break;
          data.edges.emplace_back(std::min(A[i], B[j]), std::max(A[i], B[j]));
          ++j;
        }
      }
    };
    auto pairs = [](double m) { return m * (m - 1) / 2.0; };
    // Circles are cut inside each class. Without assortativity the network
    // carries no class structure, so they are cut from the whole population.
    std::vector<std::vector<std::uint32_t>> groups;
    if (cfg.assortativity > 0.0) {
      groups = members;
    } else {
      groups.emplace_back(n);
      for (std::uint32_t u = 0; u < n; ++u) groups[0][u] = u;
    }
    std::size_t n_circles = 0;
    for (std::size_t a = 0; a < groups.size(); ++a) {
      // Consecutive chunks of the group; a short tail joins the previous circle.
      const auto& mem = groups[a];
      std::vector<std::vector<std::uint32_t>> circles;
      for (std::size_t i = 0; i < mem.size(); i += cfg.circle_size) {
        const std::size_t end = std::min(mem.size(), i + cfg.circle_size);
        if (!circles.empty() && end - i < cfg.circle_size / 2)
          circles.back().insert(circles.back().end(), mem.begin() + i, mem.begin() + end);
        else
          circles.emplace_back(mem.begin() + i, mem.begin() + end);
      }
      double circle_pairs = 0.0;
      for (const auto& c : circles) circle_pairs += pairs(static_cast<double>(c.size()));
      const double p_within = base * boost;
      const double p_in = circle_pairs > 0 ? cfg.circle_share * p_within * pairs(mem.size()) / circle_pairs : 0.0;
      if (p_in > 1.0) throw UsageError("synth config: circles too small for the within-class degree");
      sample_block(mem, mem, true, (1.0 - cfg.circle_share) * p_within);
      for (const auto& c : circles) {
        sample_block(c, c, true, p_in);
        for (auto u : c) data.users[u].circle = n_circles;
        ++n_circles;
      }
      if (cfg.assortativity > 0.0)
        for (int b = static_cast<int>(a) + 1; b < k; ++b) sample_block(members[a], members[b], false, base);
    }
    data.n_circles = n_circles;
    std::sort(data.edges.begin(), data.edges.end());
    data.edges.erase(std::unique(data.edges.begin(), data.edges.end()), data.edges.end());
    for (const auto& [u, v] : data.edges) {
      adjacency[u].push_back(v);
      adjacency[v].push_back(u);
    }
  }

  // --- latent language scores, then one round of neighbor influence ----------
  std::vector<std::array<double, 3>> latent(n);
  double mean_log_inc = 0.0;
  {
    std::vector<std::array<double, 3>> norms(data.n_circles);
    Rng norm_rng(derive_seed(seed, kTagSynthGraph, 2));
    for (auto& c : norms)
      for (auto& v : c) v = cfg.circle_sd * norm_rng.normal();
    const double span = lat.north_max - lat.north_min;
    for (std::size_t u = 0; u < n; ++u) {
      TrueUser& tu = data.users[u];
      Rng rng(derive_seed(seed, kTagSynthUser, u + 1));
      const double z = (std::log(tu.S_inc) - cfg.income_log_mean) / cfg.income_log_sd;
      const double north = 2.0 * (tu.home.center().northing - lat.north_min) / span - 1.0;
      const auto& norm = norms[tu.circle];
      latent[u][0] = cfg.cn_intercept + cfg.cn_slope * z - cfg.gradient * north + norm[0] +
                     cfg.user_noise_sd * rng.normal();
      latent[u][1] = cfg.cp_intercept + cfg.cp_slope * z - cfg.gradient * north + norm[1] +
                     cfg.user_noise_sd * rng.normal();
      // Vocabulary lives on a log scale about half as wide as the logits.
      latent[u][2] = std::log(cfg.vs_base) + cfg.vs_slope * z - cfg.vs_gradient * north +
                     0.5 * (norm[2] + cfg.user_noise_sd * rng.normal());
      tu.p_day = sigmoid(cfg.turnover * z);
      mean_log_inc += std::log(tu.S_inc);
    }
    if (cfg.influence > 0.0) {
      auto mixed = latent;
      for (std::size_t u = 0; u < n; ++u) {
        if (adjacency[u].empty()) continue;
        std::array<double, 3> avg{};
        for (auto v : adjacency[u])
          for (int d = 0; d < 3; ++d) avg[d] += latent[v][d];
        for (int d = 0; d < 3; ++d)
          mixed[u][d] = (1.0 - cfg.influence) * latent[u][d] +
                        cfg.influence * avg[d] / static_cast<double>(adjacency[u].size());
      }
      latent = std::move(mixed);
    }
    for (std::size_t u = 0; u < n; ++u) {
      data.users[u].p_cn = sigmoid(latent[u][0]);
      data.users[u].p_cp = sigmoid(latent[u][1]);
      data.users[u].vocab_size =
          std::clamp(std::round(std::exp(latent[u][2])), 20.0, static_cast<double>(kFillerWords));
    }
  }

  // --- mentions: both directions for planted edges, plus one-way noise -------
  std::vector<std::vector<std::uint32_t>> mentions(n);
  {
    std::set<std::pair<std::uint32_t, std::uint32_t>> directed;
    for (const auto& [u, v] : data.edges) {
      mentions[u].push_back(v);
      mentions[v].push_back(u);
      directed.emplace(u, v);
      directed.emplace(v, u);
    }
    Rng rng(derive_seed(seed, kTagSynthGraph, 1));
    for (std::uint32_t u = 0; u < n; ++u) {
      const auto count = rng.poisson(cfg.one_way_mentions);
      for (std::uint64_t t = 0; t < count; ++t) {
        const auto v = static_cast<std::uint32_t>(rng.below(n));
        // Never complete a reciprocal pair: one-way mentions must not create edges.
        if (v == u || directed.count({v, u}) || directed.count({u, v})) continue;
        directed.emplace(u, v);
        mentions[u].push_back(v);
      }
    }
  }

  // --- posts -----------------------------------------------------------------
  const std::vector<std::string> filler = make_filler(lexicon);
  const auto& lex_entries = lexicon.entries();
  const std::vector<std::string> determiners(lexicon.determiners().begin(), lexicon.determiners().end());
  const int day_hours = cfg.day_end_hour - cfg.day_start_hour;
  const int night_hours = 24 - day_hours;

  struct UserPosts {
    std::vector<std::string> lines;
    std::size_t posts = 0, retweets = 0;
  };
  std::vector<UserPosts> generated(n);
  parallel_for(n, [&](std::size_t u) {
    const TrueUser& tu = data.users[u];
    Rng rng(derive_seed(seed, kTagSynthPost, u));
    const std::size_t spread = cfg.posts_spread;
    const std::size_t n_posts = cfg.posts_per_user - spread + static_cast<std::size_t>(rng.below(2 * spread + 1));
    std::vector<std::vector<std::uint32_t>> post_mentions(n_posts);
    for (auto v : mentions[u]) post_mentions[rng.below(n_posts)].push_back(v);
    const auto vocab = static_cast<std::size_t>(tu.vocab_size);
    const std::size_t window = static_cast<std::size_t>(rng.below(kFillerWords));
    const PlanarPoint home = tu.home.center();
    UserPosts& out = generated[u];

    auto make_post = [&](std::size_t idx, bool retweet) {
      // Local time: uniform week and day; daytime with the user's day preference.
      const std::int64_t week = static_cast<std::int64_t>(rng.below(cfg.weeks));
      const std::int64_t day = static_cast<std::int64_t>(rng.below(7));
      std::int64_t hour;
      if (rng.bernoulli(tu.p_day)) {
        hour = cfg.day_start_hour + static_cast<std::int64_t>(rng.below(day_hours));
      } else {
        hour = (cfg.day_end_hour + static_cast<std::int64_t>(rng.below(night_hours))) % 24;
      }
      const std::int64_t local = kFirstMondayUtc + week * 7 * 86400 + day * 86400 + hour * 3600 +
                                 static_cast<std::int64_t>(rng.below(3600));
      const int offset = (week % 52 >= 12 && week % 52 < 43) ? 120 : 60;

      std::vector<std::string> words;
      const std::size_t n_filler = 3 + static_cast<std::size_t>(rng.below(6));
      for (std::size_t w = 0; w < n_filler; ++w)
        words.push_back(filler[(window + rng.below(vocab)) % kFillerWords]);
      auto insert_clause = [&](std::vector<std::string> clause) {
        const auto at = static_cast<std::ptrdiff_t>(rng.below(words.size() + 1));
        words.insert(words.begin() + at, clause.begin(), clause.end());
      };
      if (rng.bernoulli(cfg.p_negation)) {
        const bool standard = rng.bernoulli(tu.p_cn);
        const std::string subj(kSubjects[rng.below(kSubjects.size())]);
        const std::string particle(kParticles[rng.below(kParticles.size())]);
        if (rng.bernoulli(0.3)) {
          const std::string verb(kVowelVerbs[rng.below(kVowelVerbs.size())]);
          if (standard)
            insert_clause({subj, "n'" + verb, particle});
          else
            insert_clause({subj == "je" ? "j'" + verb : subj + " " + verb, particle});
        } else {
          const std::string verb(kConsonantVerbs[rng.below(kConsonantVerbs.size())]);
          if (standard)
            insert_clause({subj, "ne", verb, particle});
          else
            insert_clause({subj, verb, particle});
        }
      }
      if (rng.bernoulli(cfg.p_plural)) {
        const bool standard = rng.bernoulli(tu.p_cp);
        const auto& entry = lex_entries[rng.below(lex_entries.size())];
        insert_clause({determiners[rng.below(determiners.size())], standard ? entry.second : entry.first});
      }
      std::string text;
      for (std::size_t w = 0; w < words.size(); ++w) {
        if (w) text.push_back(' ');
        text += words[w];
      }
      if (rng.bernoulli(cfg.p_decoration)) {
        switch (rng.below(5)) {
          case 0: text += " https://t.co/" + filler[rng.below(kFillerWords)]; break;
          case 1: text += " #" + filler[rng.below(kFillerWords)]; break;
          case 2: text += " " + std::string(kEmoticons[rng.below(kEmoticons.size())]); break;
          case 3:
            if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] = static_cast<char>(text[0] - 32);
            break;
          default: text += std::string(kInterjections[rng.below(kInterjections.size())]); break;
        }
      }
      nlohmann::ordered_json j;
      j["id"] = tu.author_id + "-" + std::to_string(idx) + (retweet ? "rt" : "");
      j["user"] = tu.author_id;
      j["ts"] = local - offset * 60;
      j["utc_offset"] = offset;
      std::vector<std::string> ment;
      if (!retweet) {
        for (auto v : post_mentions[idx]) {
          ment.push_back(data.users[v].author_id);
          text = "@" + data.users[v].author_id + " " + text;
        }
      } else {
        const auto v = static_cast<std::uint32_t>(rng.below(n));
        ment.push_back(data.users[v].author_id);
        text = "RT @" + data.users[v].author_id + ": " + text;
      }
      j["text"] = text;
      if (retweet) j["retweet"] = true;
      if (!ment.empty()) j["mentions"] = ment;
      if (rng.bernoulli(cfg.p_geotag)) {
        GeoPoint g;
        if (rng.bernoulli(cfg.p_hotspot)) {
          const auto& h = kHotspots[rng.below(kHotspots.size())];
          g = {h.lat, h.lon};
        } else if (rng.bernoulli(cfg.p_away)) {
          const Patch& other = data.patches[rng.below(data.patches.size())];
          const PlanarPoint c = other.cell.center();
          g = proj.unproject({c.easting + rng.uniform(-95, 95), c.northing + rng.uniform(-95, 95)});
        } else {
          g = proj.unproject({home.easting + rng.uniform(-45, 45), home.northing + rng.uniform(-45, 45)});
        }
        j["lat"] = g.lat;
        j["lon"] = g.lon;
      }
      out.lines.push_back(j.dump());
    };

    for (std::size_t i = 0; i < n_posts; ++i) {
      make_post(i, false);
      ++out.posts;
      if (rng.bernoulli(cfg.p_retweet)) {
        make_post(i, true);
        ++out.retweets;
      }
    }
  });

  data.corpus_shards.assign(cfg.corpus_shards, {});
  for (std::size_t u = 0; u < n; ++u) {
    auto& shard = data.corpus_shards[u % cfg.corpus_shards];
    for (auto& line : generated[u].lines) shard.push_back(std::move(line));
    data.n_posts += generated[u].posts;
    data.n_retweets += generated[u].retweets;
  }
  for (std::size_t m = 0; m < cfg.malformed_lines; ++m) {
    auto& shard = data.corpus_shards[m % cfg.corpus_shards];
    shard.push_back(R"({"id": "broken-)" + std::to_string(m) + R"(", "user": "u0000)");
  }
  (void)mean_log_inc;
  return data;
}

void write(const SynthData& data, const PluralLexicon& lexicon, const std::filesystem::path& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir / "corpus");
  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    return f;
  };
  for (std::size_t s = 0; s < data.corpus_shards.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "part-%03zu.ndjson", s);
    auto f = open(outdir / "corpus" / name);
    for (const auto& line : data.corpus_shards[s]) f << line << '\n';
  }
  {
    auto f = open(outdir / "patches.csv");
    csv::Writer w(f);
    w.row({"patch_id", "easting_m", "northing_m", "S_hh", "N_hh", "N_own", "N"});
    for (const auto& p : data.patches)
      w.row({p.patch_id, std::to_string(p.cell.easting_m), std::to_string(p.cell.northing_m),
             format_double(p.S_hh), format_double(p.N_hh), format_double(p.N_own), format_double(p.N)});
  }
  {
    auto f = open(outdir / "regions.csv");
    csv::Writer w(f);
    w.row({"easting_m", "northing_m", "level", "unit_id"});
    for (const auto& level : data.regions.levels())
      for (const auto& p : data.patches) {
        auto unit = data.regions.lookup(level, p.cell.center());
        w.row({std::to_string(p.cell.easting_m), std::to_string(p.cell.northing_m), level, *unit});
      }
  }
  {
    auto f = open(outdir / "reference.csv");
    csv::Writer w(f);
    w.row({"level", "unit_id", "population"});
    for (const auto& [level, units] : data.reference)
      for (const auto& [unit, pop] : units) w.row({level, unit, format_double(pop)});
  }
  {
    auto f = open(outdir / "lexicon.csv");
    csv::Writer w(f);
    for (const auto& [s, p] : lexicon.entries()) w.row({s, p});
  }
  {
    auto f = open(outdir / "synth.cfg");
    for (const auto& [k, v] : data.config.to_kv()) f << k << " = " << v << '\n';
  }
  {
    const SynthConfig& c = data.config;
    auto sign = [](double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
    nlohmann::ordered_json truth;
    truth["seed"] = *c.seed;
    truth["n_users"] = data.users.size();
    truth["n_posts"] = data.n_posts;
    truth["n_retweets"] = data.n_retweets;
    truth["n_edges"] = data.edges.size();
    truth["malformed_lines"] = c.malformed_lines;
    // Expected direction of every planted effect, as recovered by the analyses.
    truth["planted_signs"] = {
        {"cn_vs_income", sign(c.cn_slope)},
        {"cp_vs_income", sign(c.cp_slope)},
        {"vs_vs_income", sign(c.vs_slope)},
        {"cn_vs_latitude", -sign(c.gradient)},
        {"cp_vs_latitude", -sign(c.gradient)},
        {"vs_vs_latitude", -sign(c.vs_gradient)},
        {"homophily", c.assortativity > 0 ? 1 : 0},
        {"hourly_income_turnover", sign(c.turnover)},
        // Hourly marker rates follow income only if the marker itself does.
        {"cn_hourly_income", sign(c.turnover) * sign(c.cn_slope)},
        {"cp_hourly_income", sign(c.turnover) * sign(c.cp_slope)},
        {"network_influence", c.influence > 0 ? 1 : 0},
    };
    truth["config"] = c.to_kv();
    auto& users = truth["users"] = nlohmann::ordered_json::array();
    for (const auto& u : data.users) {
      users.push_back({{"user", u.author_id},
                       {"patch_id", u.patch_id},
                       {"home_easting_m", u.home.easting_m},
                       {"home_northing_m", u.home.northing_m},
                       {"S_inc", u.S_inc},
                       {"class", u.socio_class},
                       {"circle", u.circle},
                       {"p_cn", u.p_cn},
                       {"p_cp", u.p_cp},
                       {"vocab_size", u.vocab_size},
                       {"p_day", u.p_day}});
    }
    auto f = open(outdir / "ground_truth.json");
    f << truth.dump(1) << '\n';
  }
}

}  // namespace sociolex::synth
