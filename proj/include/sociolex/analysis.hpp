#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sociolex/geoloc.hpp"
#include "sociolex/lingmark.hpp"
#include "sociolex/socionet.hpp"
#include "sociolex/stats.hpp"

namespace sociolex {

constexpr int kHoursPerWeek = 168;

struct TemporalProfile {
  std::string population;  // "all" or "geo"
  Marker marker = Marker::Negation;
  std::array<std::optional<double>, kHoursPerWeek> values{};          // mean standardness
  std::array<std::optional<double>, kHoursPerWeek> income_overlay{};  // mean S_inc of active users
  std::array<std::size_t, kHoursPerWeek> n_observations{};
  std::array<std::size_t, kHoursPerWeek> n_active_users{};
};

struct UnitAggregate {
  std::string unit_id;
  std::size_t n_users = 0;       // users homed in the unit
  std::size_t n_with_marker = 0;
  std::optional<double> mean;    // group average of the marker
  double mean_lat = 0.0;         // of the users' home cell centers
  double mean_lon = 0.0;
};

struct SpatialAggregate {
  std::string level;
  Marker marker = Marker::Negation;
  std::vector<UnitAggregate> units;  // sorted by unit id
  std::size_t unassigned = 0;
};

struct SimilarityDistribution {
  PairCategory category = PairCategory::Connected;
  double bin_width = 0.05;
  std::vector<std::size_t> histogram;  // bin i covers [i*w, (i+1)*w)
  std::size_t n_pairs = 0;
  std::size_t resampled = 0;  // pairs redrawn because a member lacked the marker
  double mean = 0.0;
};

namespace analysis {

struct TemporalOptions {
  /// nullptr = every author ("all").
  const std::set<std::string>* population = nullptr;
  std::string population_label = "all";
  lingmark::NegationOptions negation;
};

/// Mean standardness of the marker's observations per local hour of week,
/// pooled over posts of the population, with the income overlay computed over
/// distinct active users of known income. Throws UsageError for vocabulary.
TemporalProfile temporal_profile(const std::vector<CleanPost>& posts, const PluralLexicon& lexicon,
                                 Marker marker, const std::map<std::string, double>& incomes,
                                 const TemporalOptions& opt = {});

/// Streaming form of temporal_profile; posts may arrive in any order.
class TemporalBuilder {
 public:
  TemporalBuilder(const PluralLexicon& lexicon, Marker marker, const std::map<std::string, double>& incomes,
                  const TemporalOptions& opt = {});
  void add_batch(const std::vector<CleanPost>& posts);
  TemporalProfile finish() const;

 private:
  const PluralLexicon& lexicon_;
  Marker marker_;
  const std::map<std::string, double>& incomes_;
  TemporalOptions opt_;
  std::array<double, kHoursPerWeek> standard_{};
  std::array<std::size_t, kHoursPerWeek> n_obs_{};
  std::array<std::set<std::string>, kHoursPerWeek> active_;
};

/// Correlation between hourly values and income overlay over defined hours.
stats::Correlation temporal_income_correlation(const TemporalProfile& profile,
                                               std::size_t n_perm = stats::kDefaultPermutations,
                                               std::uint64_t seed = 0);

/// Per-unit group averages of the marker at one level of the region map.
SpatialAggregate spatial_aggregate(const std::map<std::string, PlanarPoint>& home_points,
                                   const std::map<std::string, LinguisticProfile>& profiles,
                                   const geoloc::RegionMap& regions, const std::string& level,
                                   Marker marker, const geoloc::Projection& projection);

/// Histograms of |L_u - L_v| for the four pair categories.
std::vector<SimilarityDistribution> similarity_distributions(
    const MentionGraph& g, const ClassPartition& partition,
    const std::map<std::string, LinguisticProfile>& profiles, Marker marker,
    std::size_t n = socionet::kDefaultPairSamples, double bin_width = 0.05, std::uint64_t seed = 0);

/// Users present in both maps with the marker defined, as aligned vectors.
struct Paired {
  std::vector<std::string> users;
  std::vector<double> x;
  std::vector<double> y;
};
Paired pair_up(const std::map<std::string, double>& x,
               const std::map<std::string, LinguisticProfile>& profiles, Marker marker);

}  // namespace analysis
}  // namespace sociolex
