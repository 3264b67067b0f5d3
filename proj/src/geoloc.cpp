#include "sociolex/geoloc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "sociolex/common.hpp"
#include "sociolex/csv.hpp"

namespace sociolex {

namespace {
std::int64_t floor_to(double v, int size) {
  return static_cast<std::int64_t>(std::floor(v / size)) * size;
}

std::uint64_t cell_key(std::int64_t x, std::int64_t y) {
  return (static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(y);
}
}  // namespace

GridCell GridCell::containing(PlanarPoint p, int cell_size_m) {
  return {floor_to(p.easting, cell_size_m), floor_to(p.northing, cell_size_m), cell_size_m};
}

namespace geoloc {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
}

Projection::Projection(double ref_lat_deg)
    : ref_lat_deg_(ref_lat_deg), cos_ref_(std::cos(ref_lat_deg * kDegToRad)) {
  if (!(ref_lat_deg > -90.0 && ref_lat_deg < 90.0))
    throw UsageError("reference latitude must lie strictly between -90 and 90");
}

PlanarPoint Projection::project(GeoPoint p) const {
  return {kEarthRadiusM * cos_ref_ * p.lon * kDegToRad, kEarthRadiusM * p.lat * kDegToRad};
}

GeoPoint Projection::unproject(PlanarPoint p) const {
  return {p.northing / kEarthRadiusM / kDegToRad, p.easting / (kEarthRadiusM * cos_ref_) / kDegToRad};
}

std::optional<PlanarPoint> project_within(const Projection& proj, const BoundingBox& box,
                                          GeoPoint p) {
  if (!box.contains(p)) return std::nullopt;
  return proj.project(p);
}

std::vector<GeoPost> collect_geoposts(const std::vector<CleanPost>& posts) {
  std::vector<GeoPost> out;
  for (const auto& p : posts)
    if (p.coords) out.push_back({p.author_id, p.timestamp, *p.coords});
  return out;
}

namespace {
struct CoordHash {
  std::size_t operator()(const GeoPoint& p) const {
    return splitmix64(std::bit_cast<std::uint64_t>(p.lat) ^
                      (std::bit_cast<std::uint64_t>(p.lon) * 0x9E3779B97F4A7C15ULL));
  }
};
}  // namespace

std::vector<GeoPost> filter_overused_coords(const std::vector<GeoPost>& posts,
                                            std::size_t threshold, std::size_t* removed) {
  std::unordered_map<GeoPoint, std::size_t, CoordHash> counts;
  for (const auto& p : posts) ++counts[p.point];
  std::vector<GeoPost> out;
  out.reserve(posts.size());
  for (const auto& p : posts)
    if (counts[p.point] <= threshold) out.push_back(p);
  if (removed) *removed = posts.size() - out.size();
  return out;
}

std::optional<HomeLocation> infer_home(const std::string& author_id,
                                       const std::vector<GeoPost>& user_posts,
                                       const Projection& proj) {
  if (user_posts.empty()) return std::nullopt;
  struct Tally {
    std::size_t count = 0;
    std::int64_t first_ts = std::numeric_limits<std::int64_t>::max();
  };
  std::map<GridCell, Tally> tallies;
  for (const auto& p : user_posts) {
    auto& t = tallies[GridCell::containing(proj.project(p.point), kHomeCellM)];
    ++t.count;
    t.first_ts = std::min(t.first_ts, p.timestamp);
  }
  auto best = tallies.begin();
  for (auto it = std::next(tallies.begin()); it != tallies.end(); ++it) {
    const auto& a = it->second;
    const auto& b = best->second;
    if (a.count > b.count || (a.count == b.count && a.first_ts < b.first_ts)) best = it;
  }
  HomeLocation h;
  h.author_id = author_id;
  h.cell = best->first;
  h.support = best->second.count;
  h.total_geoposts = user_posts.size();
  return h;
}

HomeInference infer_homes(const std::vector<GeoPost>& posts, const Projection& proj,
                          const BoundingBox& box, std::size_t threshold) {
  HomeInference out;
  const auto kept = filter_overused_coords(posts, threshold, &out.overused_removed);
  std::map<std::string, std::vector<GeoPost>> by_user;
  for (const auto& p : kept) {
    if (!box.contains(p.point)) {
      ++out.out_of_bbox;
      continue;
    }
    by_user[p.author_id].push_back(p);
  }
  std::vector<const std::pair<const std::string, std::vector<GeoPost>>*> order;
  for (const auto& kv : by_user) order.push_back(&kv);
  std::vector<std::optional<HomeLocation>> homes(order.size());
  parallel_for(order.size(), [&](std::size_t i) {
    homes[i] = infer_home(order[i]->first, order[i]->second, proj);
  });
  for (auto& h : homes)
    if (h) out.homes.emplace(h->author_id, std::move(*h));
  return out;
}

// ---------------------------------------------------------------------------

PatchIndex::PatchIndex(std::vector<PatchSite> sites, double max_distance_m)
    : sites_(std::move(sites)), max_distance_(max_distance_m) {
  if (!(max_distance_ > 0.0)) throw UsageError("patch search radius must be positive");
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const PlanarPoint c = sites_[i].cell.center();
    const auto bx = static_cast<std::int64_t>(std::floor(c.easting / max_distance_));
    const auto by = static_cast<std::int64_t>(std::floor(c.northing / max_distance_));
    buckets_[bucket_key(bx, by)].push_back(i);
  }
}

std::uint64_t PatchIndex::bucket_key(std::int64_t bx, std::int64_t by) const {
  return cell_key(bx, by);
}

std::optional<PatchMatch> PatchIndex::nearest(PlanarPoint p) const {
  const auto bx = static_cast<std::int64_t>(std::floor(p.easting / max_distance_));
  const auto by = static_cast<std::int64_t>(std::floor(p.northing / max_distance_));
  const PatchSite* best = nullptr;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::int64_t dx = -1; dx <= 1; ++dx) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      auto it = buckets_.find(bucket_key(bx + dx, by + dy));
      if (it == buckets_.end()) continue;
      for (std::size_t idx : it->second) {
        const PatchSite& s = sites_[idx];
        const PlanarPoint c = s.cell.center();
        const double ex = c.easting - p.easting;
        const double ny = c.northing - p.northing;
        const double d2 = ex * ex + ny * ny;
        if (d2 < best_d2 || (d2 == best_d2 && best && s.patch_id < best->patch_id)) {
          best = &s;
          best_d2 = d2;
        }
      }
    }
  }
  if (!best) return std::nullopt;
  const double d = std::sqrt(best_d2);
  if (d > max_distance_) return std::nullopt;
  return PatchMatch{best->patch_id, d};
}

std::optional<PatchMatch> assign_patch(const HomeLocation& home, const PatchIndex& index) {
  return index.nearest(home.cell.center());
}

// ---------------------------------------------------------------------------

void RegionMap::add(GridCell cell, const std::string& level, const std::string& unit_id) {
  if (cell.easting_m % cell_size_m_ != 0 || cell.northing_m % cell_size_m_ != 0)
    throw DataError("region cell (" + std::to_string(cell.easting_m) + ", " +
                    std::to_string(cell.northing_m) + ") is not aligned to " +
                    std::to_string(cell_size_m_) + " m");
  auto [it, inserted] =
      levels_[level].emplace(cell_key(cell.easting_m, cell.northing_m), unit_id);
  if (!inserted && it->second != unit_id)
    throw DataError("region cell assigned to two units at level '" + level + "'");
}

RegionMap RegionMap::load(const std::filesystem::path& path, int cell_size_m) {
  const auto t = csv::read(path);
  const auto ce = t.column("easting_m");
  const auto cn = t.column("northing_m");
  const auto cl = t.column("level");
  const auto cu = t.column("unit_id");
  RegionMap m(cell_size_m);
  for (const auto& r : t.rows) {
    GridCell c{csv::to_int(r[ce], "easting_m"), csv::to_int(r[cn], "northing_m"), cell_size_m};
    m.add(c, r[cl], r[cu]);
  }
  return m;
}

std::optional<std::string> RegionMap::lookup(const std::string& level, PlanarPoint p) const {
  auto lv = levels_.find(level);
  if (lv == levels_.end()) return std::nullopt;
  const GridCell c = GridCell::containing(p, cell_size_m_);
  auto it = lv->second.find(cell_key(c.easting_m, c.northing_m));
  if (it == lv->second.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> RegionMap::levels() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : levels_) out.push_back(k);
  return out;
}

ReferencePopulations load_reference(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto cl = t.column("level");
  const auto cu = t.column("unit_id");
  const auto cp = t.column("population");
  ReferencePopulations ref;
  for (const auto& r : t.rows) ref[r[cl]][r[cu]] = csv::to_double(r[cp], "population");
  return ref;
}

std::map<std::string, Representativeness> representativeness(
    const std::vector<PlanarPoint>& home_points, const RegionMap& regions,
    const ReferencePopulations& reference) {
  std::map<std::string, Representativeness> out;
  for (const auto& [level, pops] : reference) {
    if (pops.size() < 3)
      throw DataError("representativeness at level '" + level + "' needs at least 3 units");
    std::map<std::string, double> counts;
    for (const auto& [unit, _] : pops) counts[unit] = 0.0;
    Representativeness rep;
    rep.n_units = pops.size();
    for (const auto& p : home_points) {
      auto unit = regions.lookup(level, p);
      auto it = unit ? counts.find(*unit) : counts.end();
      if (it == counts.end())
        ++rep.unassigned;
      else
        it->second += 1.0;
    }
    // R^2 of the simple linear fit equals the squared Pearson correlation.
    double mx = 0, my = 0;
    for (const auto& [unit, pop] : pops) {
      mx += pop;
      my += counts[unit];
    }
    const double n = static_cast<double>(pops.size());
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (const auto& [unit, pop] : pops) {
      const double dx = pop - mx, dy = counts[unit] - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    if (sxx <= 0.0) throw DataError("reference populations at level '" + level + "' are constant");
    rep.r2 = syy <= 0.0 ? 0.0 : std::min(1.0, sxy * sxy / (sxx * syy));
    out.emplace(level, rep);
  }
  return out;
}

}  // namespace geoloc
}  // namespace sociolex
