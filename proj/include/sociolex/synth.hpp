#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sociolex/corpus.hpp"
#include "sociolex/lingmark.hpp"
#include "sociolex/ses.hpp"

namespace sociolex::synth {

/// Generator knobs. Slopes are logistic coefficients per standard deviation of
/// log income; the gradient is per unit of normalized northing (-1 south,
/// +1 north) and lowers standardness towards the north when positive.
struct SynthConfig {
  std::optional<std::uint64_t> seed;  // mandatory

  std::size_t n_users = 10'000;
  int patches_per_side = 40;

  double income_log_mean = 9.9;  // ln(euros per inhabitant)
  double income_log_sd = 0.2;
  double population_log_mean = 6.0;
  double population_log_sd = 0.8;

  double cn_intercept = 0.0;
  double cn_slope = 0.7;
  double cp_intercept = 0.4;
  double cp_slope = 0.7;
  double vs_base = 300.0;  // vocabulary size at mean income
  double vs_slope = 0.35;  // log vocabulary per SD of log income
  double gradient = 0.5;
  double vs_gradient = 0.2;
  double user_noise_sd = 0.25;

  double turnover = 1.5;  // day-activity logit per SD of log income
  int day_start_hour = 8;
  int day_end_hour = 19;

  double mean_degree = 10.0;
  double assortativity = 0.7;  // alpha
  double influence = 0.5;      // beta, weight of the neighbor mean
  // Friend circles inside each class: a share of the within-class edges is
  // drawn inside circles, and each circle carries its own language norm.
  std::size_t circle_size = 20;
  double circle_share = 0.9;
  double circle_sd = 1.0;  // logit spread of circle norms
  int classes = 9;
  double one_way_mentions = 1.0;  // mean per user

  std::size_t posts_per_user = 100;
  std::size_t posts_spread = 20;  // uniform +/- around the mean
  double p_negation = 0.35;
  double p_plural = 0.35;
  double p_geotag = 0.5;
  double p_away = 0.25;
  double p_hotspot = 0.02;
  double p_retweet = 0.05;
  double p_decoration = 0.3;  // urls, hashtags, emoticons, casing, punctuation

  std::size_t weeks = 26;
  std::size_t corpus_shards = 4;
  std::size_t malformed_lines = 3;
  double reference_noise = 0.1;
  double ref_lat = 46.5;

  /// Flat key = value pairs; unknown keys raise UsageError.
  static SynthConfig from_kv(const std::map<std::string, std::string>& kv);
  std::map<std::string, std::string> to_kv() const;
  /// Throws UsageError on out-of-range parameters or a missing seed.
  void validate() const;

  /// Every planted effect switched off (slopes, gradients, alpha).
  SynthConfig null_effects() const;
};

/// Parse a flat `key = value` file ('#' comments, blank lines allowed).
std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path);

struct TrueUser {
  std::string author_id;
  std::string patch_id;
  GridCell home;  // 100 m cell
  double S_inc = 0.0;
  int socio_class = 0;
  std::size_t circle = 0;
  double p_cn = 0.0;
  double p_cp = 0.0;
  double vocab_size = 0.0;
  double p_day = 0.0;
};

/// Everything the generator produces, in memory.
struct SynthData {
  SynthConfig config;
  std::vector<Patch> patches;
  geoloc::RegionMap regions;
  geoloc::ReferencePopulations reference;
  std::vector<TrueUser> users;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // planted, by user index
  std::vector<std::vector<std::string>> corpus_shards;         // NDJSON lines
  std::size_t n_circles = 0;
  std::size_t n_posts = 0;
  std::size_t n_retweets = 0;
};

SynthData generate(const SynthConfig& config, const PluralLexicon& lexicon);

/// Writes corpus/part-NNN.ndjson, patches.csv, regions.csv, reference.csv,
/// lexicon.csv, synth.cfg and ground_truth.json under `outdir`.
void write(const SynthData& data, const PluralLexicon& lexicon, const std::filesystem::path& outdir);

}  // namespace sociolex::synth
