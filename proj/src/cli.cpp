#include "sociolex/cli.hpp"

#include <glob.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sociolex/analysis.hpp"
#include "sociolex/common.hpp"
#include "sociolex/corpus.hpp"
#include "sociolex/csv.hpp"
#include "sociolex/geoloc.hpp"
#include "sociolex/lingmark.hpp"
#include "sociolex/manifest.hpp"
#include "sociolex/ses.hpp"
#include "sociolex/socionet.hpp"
#include "sociolex/stats.hpp"
#include "sociolex/synth.hpp"

#ifndef SOCIOLEX_VERSION
#define SOCIOLEX_VERSION "dev"
#endif
#ifndef SOCIOLEX_DATA_DIR
#define SOCIOLEX_DATA_DIR "data"
#endif

namespace sociolex::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kBatch = 1 << 15;

// Seed stream tags for the analysis battery.
constexpr std::uint64_t kTagFig2 = 0x66696732;
constexpr std::uint64_t kTagFig3 = 0x66696733;
constexpr std::uint64_t kTagTable1 = 0x74616231;
constexpr std::uint64_t kTagTable3 = 0x74616233;
constexpr std::uint64_t kTagFig5 = 0x66696735;

const std::array<Marker, 3> kMarkers = {Marker::Negation, Marker::Plural, Marker::Vocabulary};
const std::array<const char*, 3> kIndicators = {"S_inc", "S_own", "S_den"};

std::optional<double> indicator(const Indicators& ind, int i) {
  return i == 0 ? ind.S_inc : (i == 1 ? ind.S_own : ind.S_den);
}

fs::path default_lexicon() {
  const char* env = std::getenv("SOCIOLEX_DATA_DIR");
  return fs::path(env && *env ? env : SOCIOLEX_DATA_DIR) / "lexicon.csv";
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<fs::path> out;
  for (const auto& pat : patterns) {
    if (pat.find_first_of("*?[") == std::string::npos) {
      out.emplace_back(pat);
      continue;
    }
    glob_t g{};
    const int rc = ::glob(pat.c_str(), 0, nullptr, &g);
    std::vector<std::string> found;
    if (rc == 0)
      for (std::size_t i = 0; i < g.gl_pathc; ++i) found.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    if (found.empty()) throw DataError("no files match '" + pat + "'");
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + p.string());
  return f;
}

void write_json(const fs::path& p, const json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

// Non-finite values have no JSON representation.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(std::optional<double> v) { return csv::cell(v); }
std::string fmt(double v) { return format_double(v); }

// --- table readers ----------------------------------------------------------

std::map<std::string, LinguisticProfile> read_profiles(const fs::path& path) {
  const auto t = csv::read(path);
  const auto cu = t.column("user"), ccn = t.column("L_cn"), ccp = t.column("L_cp"), cvs = t.column("L_vs");
  std::map<std::string, LinguisticProfile> out;
  for (const auto& r : t.rows)
    out[r[cu]] = {csv::to_optional_double(r[ccn], "L_cn"), csv::to_optional_double(r[ccp], "L_cp"),
                  csv::to_optional_double(r[cvs], "L_vs")};
  return out;
}

struct HomeRow {
  HomeLocation home;
  GeoPoint center;
};

std::map<std::string, HomeRow> read_homes(const fs::path& path) {
  const auto t = csv::read(path);
  const auto cu = t.column("user"), ce = t.column("easting_m"), cn = t.column("northing_m");
  const auto clat = t.column("lat"), clon = t.column("lon");
  std::map<std::string, HomeRow> out;
  for (const auto& r : t.rows) {
    HomeRow h;
    h.home.author_id = r[cu];
    h.home.cell = {csv::to_int(r[ce], "easting_m"), csv::to_int(r[cn], "northing_m"), geoloc::kHomeCellM};
    h.center = {csv::to_double(r[clat], "lat"), csv::to_double(r[clon], "lon")};
    if (!out.emplace(r[cu], h).second) throw DataError(path.string() + ": duplicate user '" + r[cu] + "'");
  }
  return out;
}

std::map<std::string, UserSES> read_ses(const fs::path& path) {
  const auto t = csv::read(path);
  const auto cu = t.column("user"), cp = t.column("patch_id"), ci = t.column("S_inc");
  const auto co = t.column("S_own"), cd = t.column("S_den"), cc = t.column("class");
  std::map<std::string, UserSES> out;
  for (const auto& r : t.rows) {
    UserSES u;
    u.author_id = r[cu];
    u.patch_id = r[cp];
    u.ind = {csv::to_optional_double(r[ci], "S_inc"), csv::to_optional_double(r[co], "S_own"),
             csv::to_optional_double(r[cd], "S_den")};
    if (!r[cc].empty()) u.socio_class = static_cast<int>(csv::to_int(r[cc], "class"));
    out[u.author_id] = u;
  }
  return out;
}

ClassPartition partition_from(const std::map<std::string, UserSES>& ses_rows, int k) {
  ClassPartition p;
  for (const auto& [user, u] : ses_rows)
    if (u.socio_class) {
      p.assignment[user] = *u.socio_class;
      p.k = std::max(p.k, *u.socio_class);
    }
  if (k > 0) {
    if (p.k > k) throw DataError("class " + std::to_string(p.k) + " exceeds --classes " + std::to_string(k));
    p.k = k;
  }
  if (p.k == 0) throw DataError("no user carries a class");
  return p;
}

std::vector<std::pair<std::string, std::string>> read_edges(const fs::path& path) {
  const auto t = csv::read(path);
  const auto cu = t.column("u"), cv = t.column("v");
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) out.emplace_back(r[cu], r[cv]);
  return out;
}

MentionGraph graph_with(const std::vector<std::pair<std::string, std::string>>& edges,
                        const std::map<std::string, UserSES>& ses_rows) {
  std::set<std::string> nodes;
  for (const auto& [a, b] : edges) {
    nodes.insert(a);
    nodes.insert(b);
  }
  for (const auto& [user, _] : ses_rows) nodes.insert(user);
  return MentionGraph(std::vector<std::string>(nodes.begin(), nodes.end()), edges);
}

// --- subcommand state --------------------------------------------------------

struct Common {
  std::size_t threads = 0;
  std::string config;
  std::string manifest;
};

struct SynthArgs {
  std::string config, outdir, lexicon;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> set;
  bool null_effects = false;
};
struct IngestArgs {
  std::vector<std::string> input;
  std::string out;
};
struct MarkersArgs {
  std::vector<std::string> in;
  std::string lexicon, out;
  bool strict_ne = false;
};
struct GeoArgs {
  std::vector<std::string> in;
  std::string patches, regions, reference, out, repr_out;
  double ref_lat = 46.5;
  std::vector<double> bbox;
  std::size_t overuse = geoloc::kOverusedThreshold;
};
struct SesArgs {
  std::string patches, homes, out;
  int classes = ses::kDefaultClasses;
};
struct NetworkArgs {
  std::vector<std::string> in;
  std::string out;
};
struct HomophilyArgs {
  std::string edges, ses, out, json_out;
  std::size_t samples = socionet::kDefaultNullSamples;
  std::size_t swaps = socionet::kDefaultSwapsPerEdge;
  std::uint64_t seed = 0;
  int classes = 0;
};
struct AnalyzeArgs {
  std::vector<std::string> what;
  std::vector<std::string> in;
  std::string profiles, ses, homes, edges, regions, lexicon, outdir, level = "department";
  int bins = 30;
  std::size_t permutations = stats::kDefaultPermutations;
  std::size_t bootstrap = stats::kDefaultBootstrap;
  std::size_t pairs = socionet::kDefaultPairSamples;
  double bin_width = 0.05;
  double ref_lat = 46.5;
  std::uint64_t seed = 0;
  bool strict_ne = false;
};
struct ReportArgs {
  std::string dir, truth, homophily, out;
};

void record_parameters(const CLI::App& sub, RunManifest& m) {
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
    const auto& res = opt->results();
    std::string joined;
    for (std::size_t i = 0; i < res.size(); ++i) joined += (i ? "," : "") + res[i];
    if (res.empty()) {
      joined = opt->get_default_str();
      if (joined.empty()) continue;
    }
    std::string name = opt->get_name();
    while (!name.empty() && name.front() == '-') name.erase(name.begin());
    m.parameters[name] = joined;
  }
}

// --- synth -------------------------------------------------------------------

void cmd_synth(const SynthArgs& a, RunManifest& m, std::ostream& out) {
  std::map<std::string, std::string> kv;
  if (!a.config.empty()) {
    kv = synth::read_kv_file(a.config);
    m.add_input(a.config);
  }
  for (const auto& s : a.set) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  synth::SynthConfig cfg = synth::SynthConfig::from_kv(kv);
  if (a.seed) cfg.seed = a.seed;
  if (a.null_effects) cfg = cfg.null_effects();
  cfg.validate();
  m.seed = cfg.seed;
  const fs::path lex_path = a.lexicon.empty() ? default_lexicon() : fs::path(a.lexicon);
  const PluralLexicon lexicon = PluralLexicon::load(lex_path);
  m.add_input(lex_path);
  const auto data = synth::generate(cfg, lexicon);
  synth::write(data, lexicon, a.outdir);
  for (const char* f : {"patches.csv", "regions.csv", "reference.csv", "lexicon.csv", "synth.cfg",
                        "ground_truth.json"})
    m.outputs.push_back((fs::path(a.outdir) / f).string());
  out << "synth: " << data.users.size() << " users, " << data.n_posts << " posts (+" << data.n_retweets
      << " retweets), " << data.edges.size() << " planted edges, " << data.patches.size()
      << " patches -> " << a.outdir << '\n';
}

// --- ingest ------------------------------------------------------------------

void cmd_ingest(const IngestArgs& a, RunManifest& m, std::ostream& out) {
  const auto paths = expand_inputs(a.input);
  for (const auto& p : paths) m.add_input(p);
  auto f = open_out(a.out);
  std::vector<RawPost> batch;
  std::size_t kept = 0, retweets = 0;
  auto flush = [&] {
    std::size_t dropped = 0;
    const auto clean = corpus::preprocess_all(batch, &dropped);
    retweets += dropped;
    for (const auto& c : clean) f << corpus::to_ndjson(c) << '\n';
    kept += clean.size();
    batch.clear();
  };
  const auto st = corpus::ingest(paths, [&](RawPost&& p) {
    batch.push_back(std::move(p));
    if (batch.size() == kBatch) flush();
  });
  flush();
  if (!f) throw DataError("error while writing " + a.out);
  m.outputs.push_back(a.out);
  out << "ingest: " << st.records << " records, " << st.malformed << " malformed, " << retweets
      << " retweets dropped, " << kept << " clean posts -> " << a.out << '\n';
}

// --- markers -----------------------------------------------------------------

void cmd_markers(const MarkersArgs& a, RunManifest& m, std::ostream& out) {
  const auto paths = expand_inputs(a.in);
  for (const auto& p : paths) m.add_input(p);
  const fs::path lex_path = a.lexicon.empty() ? default_lexicon() : fs::path(a.lexicon);
  const PluralLexicon lexicon = PluralLexicon::load(lex_path);
  m.add_input(lex_path);
  lingmark::ProfileBuilder builder(lexicon, {a.strict_ne});
  std::vector<CleanPost> batch;
  corpus::stream_clean(paths, [&](CleanPost&& p) {
    batch.push_back(std::move(p));
    if (batch.size() == kBatch) {
      builder.add_batch(batch);
      batch.clear();
    }
  });
  builder.add_batch(batch);
  const auto profiles = builder.finish();
  auto f = open_out(a.out);
  csv::Writer w(f);
  w.row({"user", "n_cn", "n_incn", "L_cn", "n_cp", "n_incp", "L_cp", "N_vs", "N_tw", "L_vs"});
  for (const auto& [user, um] : profiles) {
    const auto& c = um.counts;
    w.row({user, std::to_string(c.n_cn), std::to_string(c.n_incn), fmt(um.profile.L_cn),
           std::to_string(c.n_cp), std::to_string(c.n_incp), fmt(um.profile.L_cp),
           std::to_string(c.n_unique_words), std::to_string(c.n_tweets), fmt(um.profile.L_vs)});
  }
  m.outputs.push_back(a.out);
  out << "markers: " << profiles.size() << " users -> " << a.out << '\n';
}

// --- geo ---------------------------------------------------------------------

void cmd_geo(const GeoArgs& a, RunManifest& m, std::ostream& out) {
  const auto paths = expand_inputs(a.in);
  for (const auto& p : paths) m.add_input(p);
  geoloc::BoundingBox box;
  if (!a.bbox.empty()) {
    if (a.bbox.size() != 4 || !(a.bbox[0] < a.bbox[1]) || !(a.bbox[2] < a.bbox[3]))
      throw UsageError("--bbox expects lat_min,lat_max,lon_min,lon_max");
    box = {a.bbox[0], a.bbox[1], a.bbox[2], a.bbox[3]};
  }
  const geoloc::Projection proj(a.ref_lat);

  std::vector<geoloc::GeoPost> geoposts;
  corpus::stream_clean(paths, [&](CleanPost&& p) {
    if (p.coords) geoposts.push_back({std::move(p.author_id), p.timestamp, *p.coords});
  });
  const auto inferred = geoloc::infer_homes(geoposts, proj, box, a.overuse);
  geoposts = {};

  const auto patches = ses::load_patches(a.patches);
  m.add_input(a.patches);
  const geoloc::PatchIndex index(ses::patch_sites(patches));
  std::optional<geoloc::RegionMap> regions;
  std::vector<std::string> levels;
  if (!a.regions.empty()) {
    regions = geoloc::RegionMap::load(a.regions);
    m.add_input(a.regions);
    levels = regions->levels();
  }

  auto f = open_out(a.out);
  csv::Writer w(f);
  csv::Row header = {"user", "easting_m", "northing_m", "lat", "lon", "support", "total_geoposts",
                     "patch_id", "distance_m"};
  header.insert(header.end(), levels.begin(), levels.end());
  w.row(header);
  std::size_t matched = 0;
  std::vector<PlanarPoint> points;
  for (const auto& [user, h] : inferred.homes) {
    const PlanarPoint c = h.cell.center();
    points.push_back(c);
    const GeoPoint g = proj.unproject(c);
    const auto match = geoloc::assign_patch(h, index);
    if (match) ++matched;
    csv::Row r = {user,
                  std::to_string(h.cell.easting_m),
                  std::to_string(h.cell.northing_m),
                  fmt(g.lat),
                  fmt(g.lon),
                  std::to_string(h.support),
                  std::to_string(h.total_geoposts),
                  match ? match->patch_id : "",
                  match ? fmt(match->distance_m) : ""};
    for (const auto& level : levels) r.push_back(regions->lookup(level, c).value_or(""));
    w.row(r);
  }
  m.outputs.push_back(a.out);
  out << "geo: " << inferred.homes.size() << " homes (" << matched << " joined to a patch, "
      << inferred.overused_removed << " posts at overused coordinates, " << inferred.out_of_bbox
      << " outside the bounding box) -> " << a.out << '\n';

  if (!a.reference.empty()) {
    if (!regions) throw UsageError("--reference requires --regions");
    const auto ref = geoloc::load_reference(a.reference);
    m.add_input(a.reference);
    const auto repr = geoloc::representativeness(points, *regions, ref);
    json j;
    for (const auto& [level, r] : repr)
      j[level] = {{"r2", num(r.r2)}, {"n_units", r.n_units}, {"unassigned", r.unassigned}};
    const fs::path rp = a.repr_out.empty() ? fs::path(a.out).parent_path() / "representativeness.json"
                                           : fs::path(a.repr_out);
    write_json(rp, j);
    m.outputs.push_back(rp.string());
    for (const auto& [level, r] : repr)
      out << "geo: representativeness " << level << " R^2 = " << fmt(r.r2) << " over " << r.n_units
          << " units\n";
  }
}

// --- ses ---------------------------------------------------------------------

void cmd_ses(const SesArgs& a, RunManifest& m, std::ostream& out) {
  const auto patches = ses::load_patches(a.patches);
  m.add_input(a.patches);
  const auto rows = read_homes(a.homes);
  m.add_input(a.homes);
  std::map<std::string, HomeLocation> homes;
  for (const auto& [user, h] : rows) homes[user] = h.home;
  std::size_t unmatched = 0;
  auto users = ses::attach(homes, patches, &unmatched);
  std::vector<std::pair<std::string, double>> incomes;
  for (const auto& [user, u] : users)
    if (u.ind.S_inc) incomes.emplace_back(user, *u.ind.S_inc);
  const auto part = ses::partition_classes(incomes, a.classes);
  for (auto& [user, u] : users) {
    auto it = part.assignment.find(user);
    if (it != part.assignment.end()) u.socio_class = it->second;
  }
  auto f = open_out(a.out);
  csv::Writer w(f);
  w.row({"user", "patch_id", "S_inc", "S_own", "S_den", "class"});
  for (const auto& [user, u] : users)
    w.row({user, u.patch_id, fmt(u.ind.S_inc), fmt(u.ind.S_own), fmt(u.ind.S_den),
           u.socio_class ? std::to_string(*u.socio_class) : ""});
  m.outputs.push_back(a.out);
  out << "ses: " << users.size() << " users attached, " << unmatched << " without a patch within "
      << geoloc::kMaxPatchDistanceM << " m, " << part.k << " classes -> " << a.out << '\n';
}

// --- network -----------------------------------------------------------------

void cmd_network(const NetworkArgs& a, RunManifest& m, std::ostream& out) {
  const auto paths = expand_inputs(a.in);
  for (const auto& p : paths) m.add_input(p);
  std::map<std::string, std::set<std::string>> mentioned;
  corpus::stream_clean(paths, [&](CleanPost&& p) {
    auto& s = mentioned[p.author_id];
    for (auto& id : p.mentioned_ids) s.insert(std::move(id));
  });
  std::vector<std::pair<std::string, std::vector<std::string>>> pairs;
  for (auto& [user, s] : mentioned) pairs.emplace_back(user, std::vector<std::string>(s.begin(), s.end()));
  mentioned.clear();
  const MentionGraph g = socionet::build_network(pairs);
  auto f = open_out(a.out);
  csv::Writer w(f);
  w.row({"u", "v"});
  for (const auto& e : g.edges()) w.row({g.nodes()[e.u], g.nodes()[e.v]});
  m.outputs.push_back(a.out);
  out << "network: " << g.node_count() << " authors, " << g.edge_count() << " mutual-mention edges -> "
      << a.out << '\n';
}

// --- homophily ---------------------------------------------------------------

void cmd_homophily(const HomophilyArgs& a, RunManifest& m, std::ostream& out) {
  if (a.samples < 1) throw UsageError("--samples must be at least 1");
  const auto edges = read_edges(a.edges);
  m.add_input(a.edges);
  const auto ses_rows = read_ses(a.ses);
  m.add_input(a.ses);
  m.seed = a.seed;
  const auto part = partition_from(ses_rows, a.classes);
  const MentionGraph g = graph_with(edges, ses_rows);
  const auto classes = socionet::label_nodes(g, part);
  const auto null = socionet::configuration_null(g, classes, a.samples, a.swaps, a.seed);
  const auto hm = socionet::homophily_matrix(g, classes, null);
  const auto chi = socionet::chi_square_test(hm.observed, null);

  auto f = open_out(a.out);
  csv::Writer w(f);
  csv::Row header = {"class"};
  for (int j = 1; j <= hm.k; ++j) header.push_back(std::to_string(j));
  w.row(header);
  double diag = 0.0;
  int n_diag = 0;
  for (int i = 0; i < hm.k; ++i) {
    csv::Row r = {std::to_string(i + 1)};
    for (int j = 0; j < hm.k; ++j) r.push_back(fmt(hm.ratio.at(i, j)));
    w.row(r);
    if (std::isfinite(hm.ratio.at(i, i))) {
      diag += hm.ratio.at(i, i);
      ++n_diag;
    }
  }
  auto matrix = [&](const ClassMatrix& cm) {
    json rows = json::array();
    for (int i = 0; i < cm.k; ++i) {
      json r = json::array();
      for (int j = 0; j < cm.k; ++j) r.push_back(num(cm.at(i, j)));
      rows.push_back(r);
    }
    return rows;
  };
  json j;
  j["statistic"] = num(chi.statistic);
  j["p"] = num(chi.p);
  j["n_samples"] = chi.n_samples;
  j["seed"] = a.seed;
  j["k"] = hm.k;
  j["n_edges"] = g.edge_count();
  j["dropped_nodes"] = hm.dropped_nodes;
  j["dropped_edges"] = hm.dropped_edges;
  j["diagonal_mean"] = n_diag ? num(diag / n_diag) : json(nullptr);
  j["observed"] = matrix(hm.observed);
  j["expected"] = matrix(hm.expected);
  j["ratio"] = matrix(hm.ratio);
  const fs::path jp = a.json_out.empty() ? fs::path(a.out).replace_extension(".json") : fs::path(a.json_out);
  write_json(jp, j);
  m.outputs.push_back(a.out);
  m.outputs.push_back(jp.string());
  out << "homophily: " << g.edge_count() << " edges, diagonal mean ratio "
      << (n_diag ? fmt(diag / n_diag) : "n/a") << ", chi2 = " << fmt(chi.statistic) << " (p = " << fmt(chi.p)
      << ") -> " << a.out << '\n';
}

// --- analyze -----------------------------------------------------------------

class Analyzer {
 public:
  Analyzer(const AnalyzeArgs& a, RunManifest& m, std::ostream& out) : a_(a), m_(m), out_(out) {}

  void run(const std::string& what) {
    if (what == "fig2" || what == "table2") binned(what);
    else if (what == "fig3") fig3();
    else if (what == "fig4" || what == "table3") temporal(what);
    else if (what == "fig5") fig5();
    else if (what == "table1") table1();
    else if (what == "multivar") multivar();
    else throw UsageError("unknown --what '" + what + "'");
  }

 private:
  const AnalyzeArgs& a_;
  RunManifest& m_;
  std::ostream& out_;
  fs::path dir() const { return a_.outdir; }

  std::optional<std::map<std::string, LinguisticProfile>> profiles_;
  std::optional<std::map<std::string, UserSES>> ses_;
  std::optional<std::map<std::string, HomeRow>> homes_;
  std::optional<std::vector<stats::StatResult>> binned_;
  std::optional<std::vector<TemporalProfile>> temporal_;

  const std::string& need(const std::string& value, const char* flag, const std::string& what) const {
    if (value.empty()) throw UsageError("--what " + what + " requires " + flag);
    return value;
  }
  const std::map<std::string, LinguisticProfile>& profiles(const std::string& what) {
    if (!profiles_) {
      profiles_ = read_profiles(need(a_.profiles, "--profiles", what));
      m_.add_input(a_.profiles);
    }
    return *profiles_;
  }
  const std::map<std::string, UserSES>& ses(const std::string& what) {
    if (!ses_) {
      ses_ = read_ses(need(a_.ses, "--ses", what));
      m_.add_input(a_.ses);
    }
    return *ses_;
  }
  const std::map<std::string, HomeRow>& homes(const std::string& what) {
    if (!homes_) {
      homes_ = read_homes(need(a_.homes, "--homes", what));
      m_.add_input(a_.homes);
    }
    return *homes_;
  }
  std::ofstream output(const std::string& name) {
    m_.outputs.push_back((dir() / name).string());
    return open_out(dir() / name);
  }

  void binned(const std::string& what) {
    const auto& prof = profiles(what);
    const auto& users = ses(what);
    if (!binned_) {
      std::vector<stats::StatResult> results;
      for (std::size_t mi = 0; mi < kMarkers.size(); ++mi) {
        for (int ii = 0; ii < 3; ++ii) {
          std::map<std::string, double> x;
          for (const auto& [user, u] : users)
            if (auto v = indicator(u.ind, ii)) x[user] = *v;
          const auto paired = analysis::pair_up(x, prof, kMarkers[mi]);
          stats::BinnedOptions opt;
          opt.n_bins = a_.bins;
          opt.log_x = ii == 2;
          opt.n_perm = a_.permutations;
          opt.n_boot = a_.bootstrap;
          opt.seed = derive_seed(a_.seed, kTagFig2, mi * 3 + ii);
          results.push_back(stats::binned_regression(paired.x, paired.y, opt));
        }
      }
      binned_ = std::move(results);
    }
    json j = json::array();
    if (what == "fig2") {
      auto f = output("fig2_binned.csv");
      csv::Writer w(f);
      w.row({"marker", "indicator", "log_x", "bin", "center", "mean", "n", "ci_low", "ci_high"});
      for (std::size_t k = 0; k < binned_->size(); ++k) {
        const auto& r = (*binned_)[k];
        for (const auto& p : r.points)
          w.row({marker_name(kMarkers[k / 3]), kIndicators[k % 3], r.log_x ? "1" : "0", std::to_string(p.bin),
                 fmt(p.center), fmt(p.mean_y), std::to_string(p.n), fmt(p.ci_low), fmt(p.ci_high)});
      }
    } else {
      auto f = output("table2_r2.csv");
      csv::Writer w(f);
      w.row({"marker", "indicator", "log_x", "n", "n_bins", "slope", "slope_ci_low", "slope_ci_high",
             "intercept", "r", "r2", "p"});
      for (std::size_t k = 0; k < binned_->size(); ++k) {
        const auto& r = (*binned_)[k];
        w.row({marker_name(kMarkers[k / 3]), kIndicators[k % 3], r.log_x ? "1" : "0", std::to_string(r.n),
               std::to_string(r.n_bins), fmt(r.slope), fmt(r.slope_ci_low), fmt(r.slope_ci_high),
               fmt(r.intercept), fmt(r.r), fmt(r.r2), fmt(r.p)});
      }
    }
    for (std::size_t k = 0; k < binned_->size(); ++k) {
      const auto& r = (*binned_)[k];
      j.push_back({{"marker", marker_name(kMarkers[k / 3])}, {"indicator", kIndicators[k % 3]},
                   {"log_x", r.log_x}, {"n", r.n}, {"n_bins", r.n_bins}, {"slope", num(r.slope)},
                   {"slope_ci", {num(r.slope_ci_low), num(r.slope_ci_high)}}, {"r2", num(r.r2)},
                   {"p", num(r.p)}});
    }
    write_json(dir() / (what + ".json"), j);
    m_.outputs.push_back((dir() / (what + ".json")).string());
    out_ << "analyze " << what << ": 9 binned regressions\n";
  }

  void fig3() {
    const auto& prof = profiles("fig3");
    const auto& h = homes("fig3");
    const auto regions = geoloc::RegionMap::load(need(a_.regions, "--regions", "fig3"));
    m_.add_input(a_.regions);
    const geoloc::Projection proj(a_.ref_lat);
    std::map<std::string, PlanarPoint> points;
    for (const auto& [user, row] : h) points[user] = row.home.cell.center();
    auto f = output("fig3_departments.csv");
    csv::Writer w(f);
    w.row({"level", "unit_id", "marker", "n_users", "n_with_marker", "mean", "mean_lat", "mean_lon"});
    json j;
    for (std::size_t mi = 0; mi < kMarkers.size(); ++mi) {
      const auto agg = analysis::spatial_aggregate(points, prof, regions, a_.level, kMarkers[mi], proj);
      std::vector<double> lat, val;
      for (const auto& u : agg.units) {
        w.row({agg.level, u.unit_id, marker_name(kMarkers[mi]), std::to_string(u.n_users),
               std::to_string(u.n_with_marker), fmt(u.mean), fmt(u.mean_lat), fmt(u.mean_lon)});
        if (u.mean) {
          lat.push_back(u.mean_lat);
          val.push_back(*u.mean);
        }
      }
      json mj = {{"n_units", agg.units.size()}, {"unassigned", agg.unassigned}};
      if (lat.size() >= 3) {
        const auto c = stats::spearman(lat, val, a_.permutations, derive_seed(a_.seed, kTagFig3, mi));
        mj["latitude_rho"] = num(c.r);
        mj["p"] = num(c.p);
        mj["n"] = c.n;
      }
      j[marker_name(kMarkers[mi])] = mj;
    }
    write_json(dir() / "fig3.json", j);
    m_.outputs.push_back((dir() / "fig3.json").string());
    out_ << "analyze fig3: " << a_.level << " aggregates\n";
  }

  void temporal(const std::string& what) {
    if (!temporal_) {
      const auto& users = ses(what);
      const auto paths = expand_inputs(a_.in.empty() ? throw UsageError("--what " + what + " requires --in")
                                                     : a_.in);
      for (const auto& p : paths) m_.add_input(p);
      const fs::path lex_path = a_.lexicon.empty() ? default_lexicon() : fs::path(a_.lexicon);
      const PluralLexicon lexicon = PluralLexicon::load(lex_path);
      m_.add_input(lex_path);
      std::map<std::string, double> incomes;
      std::set<std::string> geo;
      for (const auto& [user, u] : users) {
        geo.insert(user);
        if (u.ind.S_inc) incomes[user] = *u.ind.S_inc;
      }
      std::vector<analysis::TemporalBuilder> builders;
      for (Marker mk : {Marker::Negation, Marker::Plural}) {
        analysis::TemporalOptions all;
        all.negation.require_ne_before_particle = a_.strict_ne;
        analysis::TemporalOptions g = all;
        g.population = &geo;
        g.population_label = "geo";
        builders.emplace_back(lexicon, mk, incomes, all);
        builders.emplace_back(lexicon, mk, incomes, g);
      }
      std::vector<CleanPost> batch;
      auto flush = [&] {
        for (auto& b : builders) b.add_batch(batch);
        batch.clear();
      };
      corpus::stream_clean(paths, [&](CleanPost&& p) {
        batch.push_back(std::move(p));
        if (batch.size() == kBatch) flush();
      });
      flush();
      std::vector<TemporalProfile> tps;
      for (const auto& b : builders) tps.push_back(b.finish());
      temporal_ = std::move(tps);
    }
    if (what == "fig4") {
      auto f = output("fig4_profile.csv");
      csv::Writer w(f);
      w.row({"population", "marker", "hour", "value", "income", "n_observations", "n_active_users"});
      for (const auto& tp : *temporal_)
        for (int h = 0; h < kHoursPerWeek; ++h)
          w.row({tp.population, marker_name(tp.marker), std::to_string(h), fmt(tp.values[h]),
                 fmt(tp.income_overlay[h]), std::to_string(tp.n_observations[h]),
                 std::to_string(tp.n_active_users[h])});
      out_ << "analyze fig4: " << temporal_->size() << " weekly profiles\n";
      return;
    }
    auto f = output("table3.csv");
    csv::Writer w(f);
    w.row({"population", "marker", "r", "p", "n_hours"});
    json j = json::array();
    for (std::size_t i = 0; i < temporal_->size(); ++i) {
      const auto& tp = (*temporal_)[i];
      const auto c = analysis::temporal_income_correlation(tp, a_.permutations, derive_seed(a_.seed, kTagTable3, i));
      w.row({tp.population, marker_name(tp.marker), fmt(c.r), fmt(c.p), std::to_string(c.n)});
      j.push_back({{"population", tp.population}, {"marker", marker_name(tp.marker)}, {"r", num(c.r)},
                   {"p", num(c.p)}, {"n_hours", c.n}});
    }
    write_json(dir() / "table3.json", j);
    m_.outputs.push_back((dir() / "table3.json").string());
    out_ << "analyze table3: hourly income correlations\n";
  }

  void fig5() {
    const auto& prof = profiles("fig5");
    const auto& users = ses("fig5");
    const auto edges = read_edges(need(a_.edges, "--edges", "fig5"));
    m_.add_input(a_.edges);
    const auto part = partition_from(users, 0);
    const MentionGraph g = graph_with(edges, users);
    auto f = output("fig5_histograms.csv");
    csv::Writer w(f);
    w.row({"marker", "category", "bin", "low", "high", "count"});
    auto fs_ = output("fig5_summary.csv");
    csv::Writer ws(fs_);
    ws.row({"marker", "category", "n_pairs", "resampled", "mean"});
    json j;
    for (std::size_t mi = 0; mi < kMarkers.size(); ++mi) {
      const auto dists = analysis::similarity_distributions(g, part, prof, kMarkers[mi], a_.pairs, a_.bin_width,
                                                            derive_seed(a_.seed, kTagFig5, mi));
      for (const auto& d : dists) {
        const std::string cat = socionet::category_name(d.category);
        for (std::size_t b = 0; b < d.histogram.size(); ++b)
          w.row({marker_name(kMarkers[mi]), cat, std::to_string(b), fmt(b * d.bin_width),
                 fmt((b + 1) * d.bin_width), std::to_string(d.histogram[b])});
        ws.row({marker_name(kMarkers[mi]), cat, std::to_string(d.n_pairs), std::to_string(d.resampled),
                fmt(d.mean)});
        j[marker_name(kMarkers[mi])][cat] = {{"mean", num(d.mean)}, {"n_pairs", d.n_pairs},
                                             {"resampled", d.resampled}};
      }
    }
    write_json(dir() / "fig5.json", j);
    m_.outputs.push_back((dir() / "fig5.json").string());
    out_ << "analyze fig5: pair similarity distributions\n";
  }

  void table1() {
    const auto& users = ses("table1");
    std::vector<Indicators> rows;
    for (const auto& [_, u] : users) rows.push_back(u.ind);
    const auto cm = ses::cross_correlations(rows, a_.permutations, derive_seed(a_.seed, kTagTable1));
    auto f = output("table1.csv");
    csv::Writer w(f);
    w.row({"a", "b", "r", "p", "n"});
    json j = json::array();
    for (int i = 0; i < 3; ++i)
      for (int k = i + 1; k < 3; ++k) {
        const auto& c = cm[i][k];
        w.row({kIndicators[i], kIndicators[k], fmt(c.r), fmt(c.p), std::to_string(c.n)});
        j.push_back({{"a", kIndicators[i]}, {"b", kIndicators[k]}, {"r", num(c.r)}, {"p", num(c.p)}, {"n", c.n}});
      }
    write_json(dir() / "table1.json", j);
    m_.outputs.push_back((dir() / "table1.json").string());
    out_ << "analyze table1: SES cross-correlations\n";
  }

  void multivar() {
    const auto& prof = profiles("multivar");
    const auto& users = ses("multivar");
    const auto& h = homes("multivar");
    auto f = output("multivar.csv");
    csv::Writer w(f);
    w.row({"marker", "term", "coefficient", "r2", "n"});
    json j;
    for (Marker mk : kMarkers) {
      std::vector<double> y, lat, lon, inc;
      for (const auto& [user, row] : h) {
        auto su = users.find(user);
        auto pu = prof.find(user);
        if (su == users.end() || pu == prof.end() || !su->second.ind.S_inc) continue;
        auto v = marker_value(pu->second, mk);
        if (!v) continue;
        y.push_back(*v);
        lat.push_back(row.center.lat);
        lon.push_back(row.center.lon);
        inc.push_back(*su->second.ind.S_inc);
      }
      const auto r = stats::multivariate_regression(y, {lat, lon, inc}, {"latitude", "longitude", "S_inc"});
      w.row({marker_name(mk), "intercept", fmt(r.intercept), fmt(r.r2), std::to_string(r.n)});
      json mj = {{"intercept", num(r.intercept)}, {"r2", num(r.r2)}, {"n", r.n}};
      for (std::size_t t = 0; t < r.names.size(); ++t) {
        w.row({marker_name(mk), r.names[t], fmt(r.coefficients[t]), fmt(r.r2), std::to_string(r.n)});
        mj["coefficients"][r.names[t]] = num(r.coefficients[t]);
      }
      j[marker_name(mk)] = mj;
    }
    write_json(dir() / "multivar.json", j);
    m_.outputs.push_back((dir() / "multivar.json").string());
    out_ << "analyze multivar: standardized regressions\n";
  }
};

std::vector<std::string> analyses(const std::vector<std::string>& what) {
  static const std::vector<std::string> all = {"table1", "fig2",  "table2", "fig3",
                                               "fig4",   "table3", "fig5",  "multivar"};
  std::vector<std::string> out;
  for (const auto& w : what) {
    if (w == "all") {
      out.insert(out.end(), all.begin(), all.end());
    } else if (std::find(all.begin(), all.end(), w) == all.end()) {
      throw UsageError("unknown --what '" + w + "' (expected one of fig2 fig3 fig4 fig5 table1 table2 table3 multivar all)");
    } else {
      out.push_back(w);
    }
  }
  return out;
}

void cmd_analyze(const AnalyzeArgs& a, RunManifest& m, std::ostream& out) {
  if (a.bins < 20 || a.bins > 50) throw UsageError("--bins must lie in [20, 50]");
  if (!(a.bin_width > 0.0)) throw UsageError("--bin-width must be positive");
  const auto whats = analyses(a.what);
  m.seed = a.seed;
  fs::create_directories(a.outdir);
  Analyzer an(a, m, out);
  for (const auto& w : whats) an.run(w);
}

// --- report ------------------------------------------------------------------

std::optional<csv::Table> maybe_table(const fs::path& p, RunManifest& m) {
  if (!fs::exists(p)) return std::nullopt;
  m.add_input(p);
  return csv::read(p);
}

std::optional<json> maybe_json(const fs::path& p, RunManifest& m) {
  if (!fs::exists(p)) return std::nullopt;
  m.add_input(p);
  std::ifstream in(p);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError(p.string() + ": invalid JSON");
  return j;
}

void markdown_table(std::ostream& md, const csv::Table& t) {
  md << '|';
  for (const auto& h : t.header) md << ' ' << h << " |";
  md << "\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) md << " --- |";
  md << '\n';
  for (const auto& r : t.rows) {
    md << '|';
    for (const auto& c : r) md << ' ' << (c.empty() ? "-" : c) << " |";
    md << '\n';
  }
  md << '\n';
}

struct Check {
  std::string name;
  std::string expected;
  std::string observed;
  std::optional<bool> pass;  // nullopt when the data is missing
};

int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

std::string sign_text(int s) { return s > 0 ? "positive" : (s < 0 ? "negative" : "none"); }

void cmd_report(const ReportArgs& a, RunManifest& m, std::ostream& out) {
  const fs::path dir(a.dir);
  if (!fs::is_directory(dir)) throw DataError("cannot read directory " + dir.string());
  std::ostringstream md;
  md << "# sociolex report\n\n";

  const auto t1 = maybe_table(dir / "table1.csv", m);
  const auto t2 = maybe_table(dir / "table2_r2.csv", m);
  const auto t3 = maybe_table(dir / "table3.csv", m);
  const auto f2 = maybe_table(dir / "fig2_binned.csv", m);
  const auto f3 = maybe_json(dir / "fig3.json", m);
  const auto f4 = maybe_table(dir / "fig4_profile.csv", m);
  const auto f5 = maybe_table(dir / "fig5_summary.csv", m);
  const auto mv = maybe_table(dir / "multivar.csv", m);
  const fs::path hpath = a.homophily.empty() ? dir / "homophily.json" : fs::path(a.homophily);
  if (!a.homophily.empty() && !fs::exists(hpath)) throw DataError("cannot read " + hpath.string());
  const auto hom = maybe_json(hpath, m);

  auto section = [&](const char* title, const std::optional<csv::Table>& t) {
    md << "## " << title << "\n\n";
    if (t) markdown_table(md, *t);
    else md << "_not computed_\n\n";
  };
  section("SES indicator correlations", t1);
  section("Binned regressions of markers on SES", t2);
  section("Hourly marker / income correlations", t3);
  section("Pair similarity by category", f5);
  section("Multivariate regression", mv);

  md << "## Binned income curves\n\n";
  if (f2) {
    csv::Table sub{f2->header, {}, f2->source};
    const auto ci = f2->column("indicator");
    for (const auto& r : f2->rows)
      if (r[ci] == "S_inc") sub.rows.push_back(r);
    markdown_table(md, sub);
  } else {
    md << "_not computed_\n\n";
  }

  md << "## Spatial gradient\n\n";
  if (f3) {
    md << "| marker | latitude rho | p | units |\n| --- | --- | --- | --- |\n";
    for (auto it = f3->begin(); it != f3->end(); ++it) {
      const auto& v = it.value();
      md << "| " << it.key() << " | " << (v.contains("latitude_rho") ? v["latitude_rho"].dump() : "-") << " | "
         << (v.contains("p") ? v["p"].dump() : "-") << " | " << v.value("n_units", 0) << " |\n";
    }
    md << '\n';
  } else {
    md << "_not computed_\n\n";
  }

  md << "## Weekly profile coverage\n\n";
  if (f4) {
    const auto cp = f4->column("population"), cm = f4->column("marker"), cv = f4->column("value");
    std::map<std::pair<std::string, std::string>, int> defined;
    for (const auto& r : f4->rows)
      if (!r[cv].empty()) ++defined[{r[cp], r[cm]}];
    md << "| population | marker | hours with data |\n| --- | --- | --- |\n";
    for (const auto& [k, n] : defined) md << "| " << k.first << " | " << k.second << " | " << n << " |\n";
    md << '\n';
  } else {
    md << "_not computed_\n\n";
  }

  md << "## Homophily\n\n";
  if (hom) {
    md << "- diagonal mean ratio: " << (*hom)["diagonal_mean"].dump() << "\n";
    md << "- chi-square: " << (*hom)["statistic"].dump() << " (Monte Carlo p = " << (*hom)["p"].dump() << ", "
       << (*hom)["n_samples"].dump() << " null samples)\n\n";
  } else {
    md << "_not computed_\n\n";
  }

  std::size_t failed = 0;
  if (!a.truth.empty()) {
    const auto truth = maybe_json(a.truth, m);
    if (!truth) throw DataError("cannot read " + a.truth);
    const auto& planted = truth->at("planted_signs");
    std::vector<Check> checks;
    if (t2) {
      const auto cm = t2->column("marker"), ci = t2->column("indicator"), cs = t2->column("slope"),
                 cp = t2->column("p");
      for (const auto& r : t2->rows) {
        if (r[ci] != "S_inc") continue;
        const int want = planted.value(r[cm] + "_vs_income", 0);
        const int got = sign_of(csv::to_double(r[cs], "slope"));
        const double p = csv::to_double(r[cp], "p");
        const bool significant = p < 0.01;
        checks.push_back({r[cm] + " vs income", sign_text(want),
                          sign_text(got) + " slope, p = " + r[cp],
                          want == 0 ? !significant : (got == want && significant)});
      }
    }
    if (f3) {
      for (auto it = f3->begin(); it != f3->end(); ++it) {
        const int want = planted.value(it.key() + "_vs_latitude", 0);
        const auto& v = it.value();
        if (!v.contains("latitude_rho") || v["latitude_rho"].is_null()) continue;
        const int got = sign_of(v["latitude_rho"].get<double>());
        checks.push_back({it.key() + " vs latitude", sign_text(want),
                          sign_text(got) + " rho, p = " + v["p"].dump(),
                          want == 0 ? v["p"].get<double>() > 0.01 : got == want});
      }
    }
    if (hom && !(*hom)["diagonal_mean"].is_null()) {
      const bool want = planted.value("homophily", 0) > 0;
      const double d = (*hom)["diagonal_mean"].get<double>();
      const double p = (*hom)["p"].get<double>();
      checks.push_back({"status homophily", want ? "diagonal ratio > 1, significant" : "none",
                        "diagonal " + format_double(d) + ", p = " + format_double(p),
                        want ? (d > 1.0 && p <= 0.01) : p > 0.01});
    }
    if (t3) {
      const auto cpop = t3->column("population"), cm = t3->column("marker"), cr = t3->column("r");
      for (const auto& r : t3->rows) {
        if (r[cpop] != "all" || r[cr].empty()) continue;
        const int want = planted.value(r[cm] + "_hourly_income", 0);
        const int got = sign_of(csv::to_double(r[cr], "r"));
        checks.push_back({r[cm] + " hourly income correlation", sign_text(want), "r = " + r[cr],
                          want == 0 ? std::optional<bool>() : std::optional<bool>(got == want)});
      }
    }
    if (f5) {
      const auto cm = f5->column("marker"), cc = f5->column("category"), cmean = f5->column("mean");
      std::map<std::string, std::map<std::string, double>> means;
      for (const auto& r : f5->rows) means[r[cm]][r[cc]] = csv::to_double(r[cmean], "mean");
      const bool influence = planted.value("network_influence", 0) > 0;
      const bool homophily = planted.value("homophily", 0) > 0;
      for (const auto& [marker, mm] : means) {
        const double a1 = mm.at("connected-same-class"), a2 = mm.at("connected"),
                     a3 = mm.at("disconnected-same-class"), a4 = mm.at("disconnected-random");
        const std::string observed = format_double(a1) + " / " + format_double(a2) + " / " +
                                     format_double(a3) + " / " + format_double(a4);
        if (influence && homophily)
          checks.push_back({marker + " pair similarity ordering",
                            "same-class connected < connected < same-class < random", observed,
                            a1 < a2 && a2 < a3 && a3 < a4});
        else if (influence)
          checks.push_back({marker + " pair similarity ordering", "connected < disconnected", observed,
                            a2 < a3 && a2 < a4});
        else
          checks.push_back({marker + " pair similarity ordering", "none", observed, std::nullopt});
      }
    }
    md << "## Planted-effect checks\n\n| check | planted | observed | result |\n| --- | --- | --- | --- |\n";
    for (const auto& c : checks) {
      const char* res = !c.pass ? "n/a" : (*c.pass ? "PASS" : "FAIL");
      if (c.pass && !*c.pass) ++failed;
      md << "| " << c.name << " | " << c.expected << " | " << c.observed << " | " << res << " |\n";
    }
    md << '\n';
  }

  auto f = open_out(a.out);
  f << md.str();
  m.outputs.push_back(a.out);
  out << "report: " << a.out;
  if (!a.truth.empty()) out << " (" << failed << " planted-effect checks failed)";
  out << '\n';
}

// --- argument plumbing -------------------------------------------------------

// Flat `key = value` defaults are spliced in ahead of the explicit arguments,
// so anything given on the command line wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty() || args[0] == "synth") return args;
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  std::vector<std::string> out = {args[0]};
  for (const auto& [key, value] : synth::read_kv_file(*path)) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    out.push_back("--" + flag + "=" + value);
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

void add_common(CLI::App* sub, Common& c, bool with_config = true) {
  sub->add_option("--threads", c.threads, "worker threads (default: SOCIOLEX_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  if (with_config) sub->add_option("--config", c.config, "flat key = value file of flag defaults");
  sub->add_option("--manifest", c.manifest, "run manifest path (default: next to the main output)");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  CLI::App app{"sociolex: sociolinguistic marker, SES and network analysis pipeline", "sociolex"};
  app.set_version_flag("--version", SOCIOLEX_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  SynthArgs sy;
  IngestArgs in;
  MarkersArgs mk;
  GeoArgs geo;
  SesArgs se;
  NetworkArgs nw;
  HomophilyArgs ho;
  AnalyzeArgs an;
  ReportArgs rp;

  auto* s_synth = app.add_subcommand("synth", "generate a synthetic corpus with planted effects");
  s_synth->add_option("--config", sy.config, "flat key = value generator parameters");
  s_synth->add_option("--outdir", sy.outdir, "output directory")->required();
  s_synth->add_option("--seed", sy.seed, "random seed (overrides the config)");
  s_synth->add_option("--set", sy.set, "override one parameter, key=value")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_synth->add_flag("--null", sy.null_effects, "switch every planted effect off");
  s_synth->add_option("--lexicon", sy.lexicon, "plural lexicon CSV (default: bundled)");
  add_common(s_synth, common, false);

  auto* s_ingest = app.add_subcommand("ingest", "parse and normalize NDJSON corpus files");
  s_ingest->add_option("--input", in.input, "input file or glob (repeatable)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_ingest->add_option("--out", in.out, "clean NDJSON output")->required();
  add_common(s_ingest, common);

  auto* s_markers = app.add_subcommand("markers", "per-user linguistic marker rates");
  s_markers->add_option("--in", mk.in, "clean NDJSON (repeatable, globs allowed)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_markers->add_option("--lexicon", mk.lexicon, "plural lexicon CSV (default: bundled)");
  s_markers->add_option("--out", mk.out, "profiles CSV")->required();
  s_markers->add_flag("--strict-negation", mk.strict_ne, "require ne/n' before the particle");
  add_common(s_markers, common);

  auto* s_geo = app.add_subcommand("geo", "infer home locations and join them to patches");
  s_geo->add_option("--in", geo.in, "clean NDJSON (repeatable, globs allowed)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_geo->add_option("--patches", geo.patches, "patch CSV")->required();
  s_geo->add_option("--regions", geo.regions, "region map CSV");
  s_geo->add_option("--reference", geo.reference, "reference populations CSV");
  s_geo->add_option("--out", geo.out, "homes CSV")->required();
  s_geo->add_option("--representativeness", geo.repr_out, "representativeness JSON path");
  s_geo->add_option("--ref-lat", geo.ref_lat, "projection reference latitude");
  s_geo->add_option("--bbox", geo.bbox, "lat_min,lat_max,lon_min,lon_max")->delimiter(',')->expected(4);
  s_geo->add_option("--overuse-threshold", geo.overuse, "drop coordinates seen more often than this");
  add_common(s_geo, common);

  auto* s_ses = app.add_subcommand("ses", "attach SES indicators and socioeconomic classes");
  s_ses->add_option("--patches", se.patches, "patch CSV")->required();
  s_ses->add_option("--homes", se.homes, "homes CSV from `geo`")->required();
  s_ses->add_option("--classes", se.classes, "number of classes")->check(CLI::Range(1, 1000));
  s_ses->add_option("--out", se.out, "users SES CSV")->required();
  add_common(s_ses, common);

  auto* s_net = app.add_subcommand("network", "build the mutual-mention network");
  s_net->add_option("--in", nw.in, "clean NDJSON (repeatable, globs allowed)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_net->add_option("--out", nw.out, "edge list CSV")->required();
  add_common(s_net, common);

  auto* s_hom = app.add_subcommand("homophily", "class mixing against a configuration-model null");
  s_hom->add_option("--edges", ho.edges, "edge list CSV")->required();
  s_hom->add_option("--ses", ho.ses, "users SES CSV")->required();
  s_hom->add_option("--samples", ho.samples, "null-model samples");
  s_hom->add_option("--swaps", ho.swaps, "attempted swaps per edge");
  s_hom->add_option("--classes", ho.classes, "number of classes (default: largest class seen)");
  s_hom->add_option("--seed", ho.seed, "random seed");
  s_hom->add_option("--out", ho.out, "ratio matrix CSV")->required();
  s_hom->add_option("--json", ho.json_out, "statistics JSON (default: --out with .json)");
  add_common(s_hom, common);

  auto* s_an = app.add_subcommand("analyze", "statistical battery");
  s_an->add_option("--what", an.what, "fig2 fig3 fig4 fig5 table1 table2 table3 multivar all")
      ->required()
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_an->add_option("--in", an.in, "clean NDJSON (fig4, table3)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_an->add_option("--profiles", an.profiles, "profiles CSV");
  s_an->add_option("--ses", an.ses, "users SES CSV");
  s_an->add_option("--homes", an.homes, "homes CSV");
  s_an->add_option("--edges", an.edges, "edge list CSV (fig5)");
  s_an->add_option("--regions", an.regions, "region map CSV (fig3)");
  s_an->add_option("--lexicon", an.lexicon, "plural lexicon CSV (default: bundled)");
  s_an->add_option("--level", an.level, "region level for spatial aggregation");
  s_an->add_option("--bins", an.bins, "bins for binned regressions, 20..50");
  s_an->add_option("--permutations", an.permutations, "permutation replicas");
  s_an->add_option("--bootstrap", an.bootstrap, "bootstrap replicas");
  s_an->add_option("--pairs", an.pairs, "pairs per similarity category");
  s_an->add_option("--bin-width", an.bin_width, "similarity histogram bin width");
  s_an->add_option("--ref-lat", an.ref_lat, "projection reference latitude");
  s_an->add_flag("--strict-negation", an.strict_ne, "require ne/n' before the particle");
  s_an->add_option("--seed", an.seed, "random seed");
  s_an->add_option("--outdir", an.outdir, "output directory")->required();
  add_common(s_an, common);

  auto* s_rep = app.add_subcommand("report", "markdown summary of an analysis directory");
  s_rep->add_option("--dir", rp.dir, "analysis output directory")->required();
  s_rep->add_option("--truth", rp.truth, "ground_truth.json from synth");
  s_rep->add_option("--homophily", rp.homophily, "homophily JSON (default: DIR/homophily.json)");
  s_rep->add_option("--out", rp.out, "markdown output")->required();
  add_common(s_rep, common);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "sociolex: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "sociolex: " << e.what() << "\n";
    return kExitData;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunManifest manifest;
  manifest.subcommand = sub->get_name();
  manifest.version = SOCIOLEX_VERSION;
  try {
    set_thread_count(common.threads ? common.threads : env_thread_count());
    manifest.threads = thread_count();
    fs::path mpath;
    const std::string name = sub->get_name();
    if (name == "synth") {
      cmd_synth(sy, manifest, out);
      mpath = fs::path(sy.outdir) / "synth.manifest.json";
    } else if (name == "ingest") {
      cmd_ingest(in, manifest, out);
      mpath = in.out + ".manifest.json";
    } else if (name == "markers") {
      cmd_markers(mk, manifest, out);
      mpath = mk.out + ".manifest.json";
    } else if (name == "geo") {
      cmd_geo(geo, manifest, out);
      mpath = geo.out + ".manifest.json";
    } else if (name == "ses") {
      cmd_ses(se, manifest, out);
      mpath = se.out + ".manifest.json";
    } else if (name == "network") {
      cmd_network(nw, manifest, out);
      mpath = nw.out + ".manifest.json";
    } else if (name == "homophily") {
      cmd_homophily(ho, manifest, out);
      mpath = ho.out + ".manifest.json";
    } else if (name == "analyze") {
      cmd_analyze(an, manifest, out);
      mpath = fs::path(an.outdir) / "analyze.manifest.json";
    } else {
      cmd_report(rp, manifest, out);
      mpath = rp.out + ".manifest.json";
    }
    if (!common.manifest.empty()) mpath = common.manifest;
    record_parameters(*sub, manifest);
    manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    manifest.write(mpath);
  } catch (const UsageError& e) {
    err << "sociolex " << sub->get_name() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "sociolex " << sub->get_name() << ": " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sociolex::cli
