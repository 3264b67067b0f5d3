#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sociolex/geoloc.hpp"
#include "sociolex/stats.hpp"

namespace sociolex {

struct Indicators {
  std::optional<double> S_inc;  // euros per inhabitant
  std::optional<double> S_own;  // owner fraction
  std::optional<double> S_den;  // persons per square meter
};

/// One 200 m census cell.
struct Patch {
  std::string patch_id;
  GridCell cell{0, 0, geoloc::kPatchCellM};
  double S_hh = 0.0;   // cumulative income
  double N_hh = 0.0;   // inhabitants
  double N_own = 0.0;  // owners
  double N = 0.0;      // individuals
  Indicators ind;
};

struct UserSES {
  std::string author_id;
  std::string patch_id;
  Indicators ind;
  std::optional<int> socio_class;  // 1..k once partitioned
};

struct ClassPartition {
  int k = 0;
  std::vector<double> boundaries;  // k-1 lower income edges of classes 2..k
  std::map<std::string, int> assignment;
  std::vector<double> class_income;  // income sum per class
  std::vector<std::size_t> class_size;
};

namespace ses {

constexpr double kPatchAreaM2 = 200.0 * 200.0;
constexpr int kDefaultClasses = 9;

Indicators compute_indicators(double S_hh, double N_hh, double N_own, double N);

/// CSV header `patch_id,easting_m,northing_m,S_hh,N_hh,N_own,N`.
/// Rows with N_own > N or negative counts raise DataError.
std::vector<Patch> load_patches(const std::filesystem::path& path);

std::vector<geoloc::PatchSite> patch_sites(const std::vector<Patch>& patches);

/// Users inherit the indicators of the patch nearest their home.
std::map<std::string, UserSES> attach(const std::map<std::string, HomeLocation>& homes,
                                      const std::vector<Patch>& patches,
                                      std::size_t* unmatched = nullptr);

/// Pairwise correlations over {S_inc, S_own, S_den}; rows lacking any
/// indicator are skipped. Throws DataError with fewer than 10 complete rows.
using CorrelationMatrix = std::array<std::array<stats::Correlation, 3>, 3>;
CorrelationMatrix cross_correlations(const std::vector<Indicators>& rows,
                                     std::size_t n_perm = stats::kDefaultPermutations,
                                     std::uint64_t seed = 0);

/// Equal-cumulative-income classes. Users are sorted by (income, id) and cut
/// into k contiguous runs: the largest class sum is made as small as possible,
/// then the smallest as large as possible. Class sums end up within the
/// largest individual income of each other.
ClassPartition partition_classes(const std::vector<std::pair<std::string, double>>& incomes,
                                 int k = kDefaultClasses);

}  // namespace ses
}  // namespace sociolex
