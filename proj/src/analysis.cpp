#include "sociolex/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "sociolex/common.hpp"

namespace sociolex::analysis {

TemporalBuilder::TemporalBuilder(const PluralLexicon& lexicon, Marker marker,
                                 const std::map<std::string, double>& incomes,
                                 const TemporalOptions& opt)
    : lexicon_(lexicon), marker_(marker), incomes_(incomes), opt_(opt) {
  if (marker == Marker::Vocabulary)
    throw UsageError("temporal profile is defined for rate markers only (cn, cp)");
}

void TemporalBuilder::add_batch(const std::vector<CleanPost>& posts) {
  std::vector<std::size_t> post_idx;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const auto& p = posts[i];
    if (p.local_hour_of_week < 0 || p.local_hour_of_week >= kHoursPerWeek)
      throw DataError("post '" + p.post_id + "' has hour-of-week outside [0,167]");
    if (opt_.population && !opt_.population->count(p.author_id)) continue;
    post_idx.push_back(i);
  }
  std::vector<lingmark::PostMarkers> obs(post_idx.size());
  parallel_for(post_idx.size(),
               [&](std::size_t i) { obs[i] = lingmark::observe(posts[post_idx[i]], lexicon_, opt_.negation); });
  for (std::size_t i = 0; i < post_idx.size(); ++i) {
    const auto& p = posts[post_idx[i]];
    const int h = p.local_hour_of_week;
    const auto& m = obs[i];
    if (marker_ == Marker::Negation) {
      if (m.negation != NegationResult::None) {
        ++n_obs_[h];
        if (m.negation == NegationResult::Standard) standard_[h] += 1.0;
      }
    } else {
      n_obs_[h] += m.plural_standard + m.plural_nonstandard;
      standard_[h] += static_cast<double>(m.plural_standard);
    }
    if (incomes_.count(p.author_id)) active_[h].insert(p.author_id);
  }
}

TemporalProfile TemporalBuilder::finish() const {
  TemporalProfile tp;
  tp.population = opt_.population_label;
  tp.marker = marker_;
  for (int h = 0; h < kHoursPerWeek; ++h) {
    tp.n_observations[h] = n_obs_[h];
    if (n_obs_[h] > 0) tp.values[h] = standard_[h] / static_cast<double>(n_obs_[h]);
    tp.n_active_users[h] = active_[h].size();
    if (!active_[h].empty()) {
      double s = 0.0;
      for (const auto& u : active_[h]) s += incomes_.at(u);
      tp.income_overlay[h] = s / static_cast<double>(active_[h].size());
    }
  }
  return tp;
}

TemporalProfile temporal_profile(const std::vector<CleanPost>& posts, const PluralLexicon& lexicon,
                                 Marker marker, const std::map<std::string, double>& incomes,
                                 const TemporalOptions& opt) {
  TemporalBuilder b(lexicon, marker, incomes, opt);
  b.add_batch(posts);
  return b.finish();
}

stats::Correlation temporal_income_correlation(const TemporalProfile& profile, std::size_t n_perm,
                                               std::uint64_t seed) {
  std::vector<double> v, inc;
  for (int h = 0; h < kHoursPerWeek; ++h) {
    if (profile.values[h] && profile.income_overlay[h]) {
      v.push_back(*profile.values[h]);
      inc.push_back(*profile.income_overlay[h]);
    }
  }
  return stats::pearson(v, inc, n_perm, seed);
}

SpatialAggregate spatial_aggregate(const std::map<std::string, PlanarPoint>& home_points,
                                   const std::map<std::string, LinguisticProfile>& profiles,
                                   const geoloc::RegionMap& regions, const std::string& level,
                                   Marker marker, const geoloc::Projection& projection) {
  SpatialAggregate agg;
  agg.level = level;
  agg.marker = marker;
  struct Acc {
    std::set<std::string> members;
    double lat = 0.0, lon = 0.0;
  };
  std::map<std::string, Acc> units;
  for (const auto& [user, pt] : home_points) {
    auto unit = regions.lookup(level, pt);
    if (!unit) {
      ++agg.unassigned;
      continue;
    }
    auto& acc = units[*unit];
    acc.members.insert(user);
    const GeoPoint g = projection.unproject(pt);
    acc.lat += g.lat;
    acc.lon += g.lon;
  }
  for (auto& [unit, acc] : units) {
    UnitAggregate u;
    u.unit_id = unit;
    u.n_users = acc.members.size();
    const auto gm = lingmark::group_average(profiles, acc.members, marker);
    u.mean = gm.mean;
    u.n_with_marker = gm.n;
    u.mean_lat = acc.lat / static_cast<double>(u.n_users);
    u.mean_lon = acc.lon / static_cast<double>(u.n_users);
    agg.units.push_back(std::move(u));
  }
  return agg;
}

std::vector<SimilarityDistribution> similarity_distributions(
    const MentionGraph& g, const ClassPartition& partition,
    const std::map<std::string, LinguisticProfile>& profiles, Marker marker, std::size_t n,
    double bin_width, std::uint64_t seed) {
  if (!(bin_width > 0.0)) throw UsageError("similarity histogram bin width must be positive");
  constexpr std::size_t kMaxRounds = 64;
  const std::array<PairCategory, 4> cats = {
      PairCategory::ConnectedSameClass, PairCategory::Connected,
      PairCategory::DisconnectedSameClass, PairCategory::DisconnectedRandom};
  std::vector<SimilarityDistribution> out;
  for (PairCategory cat : cats) {
    SimilarityDistribution d;
    d.category = cat;
    d.bin_width = bin_width;
    double sum = 0.0;
    std::size_t round = 0;
    while (d.n_pairs < n) {
      if (round == kMaxRounds)
        throw DataError("category " + socionet::category_name(cat) +
                        " has too few pairs with the marker defined");
      const auto pairs =
          socionet::sample_pairs(g, partition, cat, n - d.n_pairs, derive_seed(seed, round++));
      for (const auto& [a, b] : pairs) {
        auto ia = profiles.find(a), ib = profiles.find(b);
        std::optional<double> va, vb;
        if (ia != profiles.end()) va = marker_value(ia->second, marker);
        if (ib != profiles.end()) vb = marker_value(ib->second, marker);
        if (!va || !vb) {
          ++d.resampled;
          continue;
        }
        const double diff = std::abs(*va - *vb);
        const auto bin = static_cast<std::size_t>(std::floor(diff / bin_width));
        if (bin >= d.histogram.size()) d.histogram.resize(bin + 1, 0);
        ++d.histogram[bin];
        ++d.n_pairs;
        sum += diff;
      }
    }
    d.mean = d.n_pairs ? sum / static_cast<double>(d.n_pairs) : 0.0;
    out.push_back(std::move(d));
  }
  return out;
}

Paired pair_up(const std::map<std::string, double>& x,
               const std::map<std::string, LinguisticProfile>& profiles, Marker marker) {
  Paired p;
  for (const auto& [user, xv] : x) {
    auto it = profiles.find(user);
    if (it == profiles.end()) continue;
    if (auto yv = marker_value(it->second, marker)) {
      p.users.push_back(user);
      p.x.push_back(xv);
      p.y.push_back(*yv);
    }
  }
  return p;
}

}  // namespace sociolex::analysis
