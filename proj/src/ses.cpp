#include "sociolex/ses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "sociolex/common.hpp"
#include "sociolex/csv.hpp"

namespace sociolex::ses {

Indicators compute_indicators(double S_hh, double N_hh, double N_own, double N) {
  Indicators ind;
  if (N_hh > 0.0) ind.S_inc = S_hh / N_hh;
  if (N > 0.0) ind.S_own = N_own / N;
  ind.S_den = N / kPatchAreaM2;
  return ind;
}

std::vector<Patch> load_patches(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto c_id = t.column("patch_id");
  const auto c_e = t.column("easting_m");
  const auto c_n = t.column("northing_m");
  const auto c_shh = t.column("S_hh");
  const auto c_nhh = t.column("N_hh");
  const auto c_own = t.column("N_own");
  const auto c_N = t.column("N");
  std::vector<Patch> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    Patch p;
    p.patch_id = r[c_id];
    p.cell = {csv::to_int(r[c_e], "easting_m"), csv::to_int(r[c_n], "northing_m"),
              geoloc::kPatchCellM};
    p.S_hh = csv::to_double(r[c_shh], "S_hh");
    p.N_hh = csv::to_double(r[c_nhh], "N_hh");
    p.N_own = csv::to_double(r[c_own], "N_own");
    p.N = csv::to_double(r[c_N], "N");
    if (p.S_hh < 0 || p.N_hh < 0 || p.N_own < 0 || p.N < 0)
      throw DataError(path.string() + ": negative value in patch '" + p.patch_id + "'");
    if (p.N_own > p.N)
      throw DataError(path.string() + ": patch '" + p.patch_id + "' has more owners than individuals");
    p.ind = compute_indicators(p.S_hh, p.N_hh, p.N_own, p.N);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<geoloc::PatchSite> patch_sites(const std::vector<Patch>& patches) {
  std::vector<geoloc::PatchSite> sites;
  sites.reserve(patches.size());
  for (const auto& p : patches) sites.push_back({p.patch_id, p.cell});
  return sites;
}

std::map<std::string, UserSES> attach(const std::map<std::string, HomeLocation>& homes,
                                      const std::vector<Patch>& patches, std::size_t* unmatched) {
  const geoloc::PatchIndex index(patch_sites(patches));
  std::map<std::string, const Patch*> by_id;
  for (const auto& p : patches) by_id[p.patch_id] = &p;
  std::map<std::string, UserSES> out;
  std::size_t missed = 0;
  for (const auto& [user, home] : homes) {
    auto m = geoloc::assign_patch(home, index);
    if (!m) {
      ++missed;
      continue;
    }
    const Patch& p = *by_id.at(m->patch_id);
    out.emplace(user, UserSES{user, p.patch_id, p.ind, std::nullopt});
  }
  if (unmatched) *unmatched = missed;
  return out;
}

CorrelationMatrix cross_correlations(const std::vector<Indicators>& rows, std::size_t n_perm,
                                     std::uint64_t seed) {
  std::array<std::vector<double>, 3> cols;
  for (const auto& r : rows) {
    if (!r.S_inc || !r.S_own || !r.S_den) continue;
    cols[0].push_back(*r.S_inc);
    cols[1].push_back(*r.S_own);
    cols[2].push_back(*r.S_den);
  }
  if (cols[0].size() < 10)
    throw DataError("SES cross-correlation needs at least 10 complete observations, got " +
                    std::to_string(cols[0].size()));
  CorrelationMatrix m{};
  for (int i = 0; i < 3; ++i) {
    m[i][i] = {1.0, 1.0 / (static_cast<double>(n_perm) + 1.0), cols[0].size()};
    for (int j = i + 1; j < 3; ++j) {
      m[i][j] = stats::pearson(cols[i], cols[j], n_perm, derive_seed(seed, i * 3 + j));
      m[j][i] = m[i][j];
    }
  }
  return m;
}

namespace {

// Cut positions 0 = b_0 < b_1 < ... < b_k = n over prefix sums `cum`.

// Greedy fill: every class but the last takes the longest run fitting under
// `cap`, leaving at least one user per remaining class.
std::optional<std::vector<std::size_t>> fill_under(const std::vector<double>& cum, std::size_t k,
                                                   double cap) {
  const std::size_t n = cum.size() - 1;
  std::vector<std::size_t> b{0};
  for (std::size_t c = 1; c < k; ++c) {
    const double limit = cum[b.back()] + cap;
    std::size_t j = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), limit) - cum.begin()) - 1;
    j = std::min(j, n - (k - c));
    if (j <= b.back()) return std::nullopt;
    b.push_back(j);
  }
  if (cum[n] > cum[b.back()] + cap) return std::nullopt;
  b.push_back(n);
  return b;
}

// Partition with every class sum in [lo, hi], if one exists. Reachable cut
// positions are swept class by class; the walk back takes the latest
// admissible predecessor.
std::optional<std::vector<std::size_t>> fit_between(const std::vector<double>& cum, std::size_t k,
                                                    double lo, double hi) {
  const std::size_t n = cum.size() - 1;
  std::vector<std::vector<std::size_t>> reach{{0}};
  std::vector<int> mark(n + 2);
  for (std::size_t c = 1; c <= k; ++c) {
    std::fill(mark.begin(), mark.end(), 0);
    std::size_t a = 0, z = 0;  // monotone pointers: first j with sum >= lo, first j with sum > hi
    for (std::size_t i : reach.back()) {
      a = std::max(a, i + 1);
      while (a <= n && cum[a] < cum[i] + lo) ++a;
      z = std::max(z, a);
      while (z <= n && cum[z] <= cum[i] + hi) ++z;
      if (a < z) {
        ++mark[a];
        --mark[z];
      }
    }
    std::vector<std::size_t> next;
    int run = 0;
    for (std::size_t j = 0; j <= n; ++j)
      if ((run += mark[j]) > 0) next.push_back(j);
    if (next.empty()) return std::nullopt;
    reach.push_back(std::move(next));
  }
  if (reach[k].back() != n) return std::nullopt;
  std::vector<std::size_t> b(k + 1);
  b[k] = n;
  for (std::size_t c = k; c > 0; --c) {
    const auto& prev = reach[c - 1];
    auto it = std::find_if(prev.rbegin(), prev.rend(), [&](std::size_t i) {
      return i < b[c] && cum[b[c]] >= cum[i] + lo && cum[b[c]] <= cum[i] + hi;
    });
    b[c - 1] = *it;
  }
  return b;
}

// Smallest achievable largest class sum, then the largest achievable smallest
// class sum under it. On incomes sorted ascending this keeps every class sum
// within one maximal income of the others.
std::vector<std::size_t> balanced_cuts(const std::vector<double>& cum, std::size_t k) {
  const double total = cum.back();
  const double tol = total * 1e-13;
  double lo = 0.0, hi = total;
  auto best = *fill_under(cum, k, hi);
  while (hi - lo > tol) {
    const double mid = lo + (hi - lo) / 2.0;
    if (auto b = fill_under(cum, k, mid)) {
      hi = mid;
      best = std::move(*b);
    } else {
      lo = mid;
    }
  }
  const double cap = hi;
  double floor_lo = 0.0, floor_hi = cap;
  while (floor_hi - floor_lo > tol) {
    const double mid = floor_lo + (floor_hi - floor_lo) / 2.0;
    if (auto b = fit_between(cum, k, mid, cap)) {
      floor_lo = mid;
      best = std::move(*b);
    } else {
      floor_hi = mid;
    }
  }
  return best;
}

}  // namespace

ClassPartition partition_classes(const std::vector<std::pair<std::string, double>>& incomes, int k) {
  if (k < 2) throw UsageError("partition needs at least 2 classes");
  if (incomes.size() < static_cast<std::size_t>(k))
    throw UsageError("partition needs at least as many users as classes");
  std::vector<const std::pair<std::string, double>*> order;
  order.reserve(incomes.size());
  double total = 0.0;
  for (const auto& u : incomes) {
    if (!(u.second >= 0.0) || !std::isfinite(u.second))
      throw DataError("income of user '" + u.first + "' is negative or not finite");
    order.push_back(&u);
    total += u.second;
  }
  if (!(total > 0.0)) throw DataError("total income is zero");
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    if (a->second != b->second) return a->second < b->second;
    return a->first < b->first;
  });

  const std::size_t n = order.size();
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + order[i]->second;
  const auto cuts = balanced_cuts(cum, static_cast<std::size_t>(k));

  ClassPartition part;
  part.k = k;
  part.boundaries.resize(k - 1);
  part.class_income.assign(k, 0.0);
  part.class_size.assign(k, 0);
  for (int c = 1; c <= k; ++c) {
    if (c > 1) part.boundaries[c - 2] = order[cuts[c - 1]]->second;
    for (std::size_t i = cuts[c - 1]; i < cuts[c]; ++i) {
      part.assignment[order[i]->first] = c;
      part.class_income[c - 1] += order[i]->second;
      ++part.class_size[c - 1];
    }
  }
  return part;
}

}  // namespace sociolex::ses
