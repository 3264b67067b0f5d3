#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sociolex/corpus.hpp"

namespace sociolex {

/// Planar coordinates in meters.
struct PlanarPoint {
  double easting = 0.0;
  double northing = 0.0;
};

/// Square grid cell identified by its south-west corner.
struct GridCell {
  std::int64_t easting_m = 0;
  std::int64_t northing_m = 0;
  int cell_size_m = 100;

  PlanarPoint center() const {
    return {static_cast<double>(easting_m) + cell_size_m / 2.0,
            static_cast<double>(northing_m) + cell_size_m / 2.0};
  }
  /// Floor a point to the cell containing it.
  static GridCell containing(PlanarPoint p, int cell_size_m);

  friend bool operator==(const GridCell&, const GridCell&) = default;
  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

struct HomeLocation {
  std::string author_id;
  GridCell cell;  // 100 m
  std::size_t support = 0;
  std::size_t total_geoposts = 0;
};

namespace geoloc {

constexpr double kEarthRadiusM = 6'371'000.0;
constexpr int kHomeCellM = 100;
constexpr int kPatchCellM = 200;
constexpr double kMaxPatchDistanceM = 1'000.0;
constexpr std::size_t kOverusedThreshold = 500;

/// Equirectangular projection about one reference latitude.
class Projection {
 public:
  explicit Projection(double ref_lat_deg = 46.5);
  PlanarPoint project(GeoPoint p) const;
  GeoPoint unproject(PlanarPoint p) const;
  double ref_lat_deg() const { return ref_lat_deg_; }

 private:
  double ref_lat_deg_;
  double cos_ref_;
};

struct BoundingBox {
  double lat_min = 41.0;
  double lat_max = 51.5;
  double lon_min = -5.5;
  double lon_max = 10.0;
  bool contains(GeoPoint p) const {
    return p.lat >= lat_min && p.lat <= lat_max && p.lon >= lon_min && p.lon <= lon_max;
  }
};

/// Projects a point, or nullopt when it lies outside the bounding box.
std::optional<PlanarPoint> project_within(const Projection& proj, const BoundingBox& box,
                                          GeoPoint p);

struct GeoPost {
  std::string author_id;
  std::int64_t timestamp = 0;
  GeoPoint point;
};

/// Geotagged posts of a clean corpus, in corpus order.
std::vector<GeoPost> collect_geoposts(const std::vector<CleanPost>& posts);

/// Drop every post whose exact (lat, lon) occurs more than `threshold` times.
std::vector<GeoPost> filter_overused_coords(const std::vector<GeoPost>& posts,
                                            std::size_t threshold = kOverusedThreshold,
                                            std::size_t* removed = nullptr);

/// Modal 100 m cell of a user's posts. Ties go to the cell seen first in time.
std::optional<HomeLocation> infer_home(const std::string& author_id,
                                       const std::vector<GeoPost>& user_posts,
                                       const Projection& proj);

struct HomeInference {
  std::map<std::string, HomeLocation> homes;
  std::size_t overused_removed = 0;
  std::size_t out_of_bbox = 0;
};

/// Overuse filter, bounding-box filter, then per-user home inference.
HomeInference infer_homes(const std::vector<GeoPost>& posts, const Projection& proj,
                          const BoundingBox& box, std::size_t threshold = kOverusedThreshold);

struct PatchSite {
  std::string patch_id;
  GridCell cell;  // 200 m
};

struct PatchMatch {
  std::string patch_id;
  double distance_m = 0.0;
};

/// Read-only spatial hash over patch centers.
class PatchIndex {
 public:
  explicit PatchIndex(std::vector<PatchSite> sites, double max_distance_m = kMaxPatchDistanceM);

  /// Nearest center within max distance; ties go to the smallest patch id.
  std::optional<PatchMatch> nearest(PlanarPoint p) const;
  const std::vector<PatchSite>& sites() const { return sites_; }
  double max_distance() const { return max_distance_; }

 private:
  std::vector<PatchSite> sites_;
  double max_distance_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
  std::uint64_t bucket_key(std::int64_t bx, std::int64_t by) const;
};

/// Nearest patch to the center of the home cell.
std::optional<PatchMatch> assign_patch(const HomeLocation& home, const PatchIndex& index);

/// Administrative units per level, keyed by grid cell.
class RegionMap {
 public:
  explicit RegionMap(int cell_size_m = kPatchCellM) : cell_size_m_(cell_size_m) {}

  /// CSV header `easting_m,northing_m,level,unit_id`; coordinates are SW corners.
  static RegionMap load(const std::filesystem::path& path, int cell_size_m = kPatchCellM);

  void add(GridCell cell, const std::string& level, const std::string& unit_id);
  std::optional<std::string> lookup(const std::string& level, PlanarPoint p) const;
  std::vector<std::string> levels() const;
  int cell_size_m() const { return cell_size_m_; }

 private:
  int cell_size_m_;
  std::map<std::string, std::unordered_map<std::uint64_t, std::string>> levels_;
};

/// level -> unit -> population
using ReferencePopulations = std::map<std::string, std::map<std::string, double>>;

/// CSV header `level,unit_id,population`.
ReferencePopulations load_reference(const std::filesystem::path& path);

struct Representativeness {
  double r2 = 0.0;
  std::size_t n_units = 0;
  std::size_t unassigned = 0;  // homes outside every unit of the level
};

/// R^2 of user counts against reference populations across the units of each
/// level in `reference`. Throws DataError for a level with fewer than 3 units.
std::map<std::string, Representativeness> representativeness(
    const std::vector<PlanarPoint>& home_points, const RegionMap& regions,
    const ReferencePopulations& reference);

}  // namespace geoloc
}  // namespace sociolex
