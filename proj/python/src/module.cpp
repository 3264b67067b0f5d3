// Python bindings for the core operations. Containers cross the boundary as
// plain lists and dicts; absent values become None.

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sociolex/analysis.hpp"
#include "sociolex/cli.hpp"
#include "sociolex/common.hpp"
#include "sociolex/corpus.hpp"
#include "sociolex/lingmark.hpp"
#include "sociolex/manifest.hpp"
#include "sociolex/ses.hpp"
#include "sociolex/socionet.hpp"
#include "sociolex/stats.hpp"

namespace py = pybind11;
using namespace sociolex;

namespace {

const char* negation_label(NegationResult r) {
  switch (r) {
    case NegationResult::Standard: return "standard";
    case NegationResult::Nonstandard: return "nonstandard";
    default: return "none";
  }
}

py::dict profile_dict(const LinguisticProfile& p) {
  py::dict d;
  d["L_cn"] = p.L_cn;
  d["L_cp"] = p.L_cp;
  d["L_vs"] = p.L_vs;
  return d;
}

std::vector<std::vector<double>> rows(const ClassMatrix& m) {
  std::vector<std::vector<double>> out(m.k, std::vector<double>(m.k));
  for (int i = 0; i < m.k; ++i)
    for (int j = 0; j < m.k; ++j) out[i][j] = m.at(i, j);
  return out;
}

}  // namespace

PYBIND11_MODULE(_sociolex, m) {
  m.doc() = "sociolex core bindings";

  static py::exception<UsageError> usage_error(m, "UsageError", PyExc_ValueError);
  static py::exception<DataError> data_error(m, "DataError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const UsageError& e) {
      py::set_error(usage_error, e.what());
    } catch (const DataError& e) {
      py::set_error(data_error, e.what());
    }
  });

  m.def("set_threads", &set_thread_count, py::arg("n"));
  m.def("thread_count", &thread_count);
  m.def("sha256_file", &sha256_file, py::arg("path"));
  m.def("sha256_hex", [](const py::bytes& b) { return sha256_hex(std::string(b)); }, py::arg("data"));

  // corpus
  m.def(
      "normalize_text",
      [](const std::string& text) {
        auto n = corpus::normalize_text(text);
        return py::make_tuple(n.text_marker, n.tokens);
      },
      py::arg("text"), "Return (text_marker, tokens) after stripping and downcasing.");
  m.def("hour_of_week", &corpus::hour_of_week, py::arg("utc_seconds"), py::arg("utc_offset_minutes") = 0);

  // lingmark
  py::class_<PluralLexicon>(m, "PluralLexicon")
      .def(py::init<>())
      .def_static("load", &PluralLexicon::load, py::arg("path"))
      .def("add", &PluralLexicon::add, py::arg("singular"), py::arg("plural"))
      .def("__len__", &PluralLexicon::size)
      .def("is_determiner", [](const PluralLexicon& l, const std::string& w) { return l.is_determiner(w); })
      .def("classify", [](const PluralLexicon& l, const std::string& w) -> std::optional<std::string> {
        auto v = l.classify(w);
        if (!v) return std::nullopt;
        return *v == Variant::Standard ? "standard" : "nonstandard";
      });

  m.def(
      "detect_negation",
      [](const std::string& text_marker, bool strict) {
        return negation_label(lingmark::detect_negation(text_marker, {strict}));
      },
      py::arg("text_marker"), py::arg("strict") = false);
  m.def(
      "detect_plural",
      [](const std::vector<std::string>& tokens, const PluralLexicon& lex) {
        std::vector<std::string> out;
        for (auto v : lingmark::detect_plural(tokens, lex))
          out.push_back(v == Variant::Standard ? "standard" : "nonstandard");
        return out;
      },
      py::arg("tokens"), py::arg("lexicon"));
  m.def(
      "profile_user",
      [](const std::vector<std::string>& texts, const PluralLexicon& lex, bool strict) {
        UserTimeline tl{"u", {}};
        std::int64_t ts = 0;
        for (const auto& t : texts) {
          RawPost r;
          r.post_id = std::to_string(ts);
          r.author_id = "u";
          r.timestamp = ts++;
          r.text = t;
          tl.posts.push_back(*corpus::preprocess(r));
        }
        const auto um = lingmark::profile_user(tl, lex, {strict});
        py::dict d = profile_dict(um.profile);
        d["n_cn"] = um.counts.n_cn;
        d["n_incn"] = um.counts.n_incn;
        d["n_cp"] = um.counts.n_cp;
        d["n_incp"] = um.counts.n_incp;
        d["n_unique_words"] = um.counts.n_unique_words;
        d["n_tweets"] = um.counts.n_tweets;
        return d;
      },
      py::arg("texts"), py::arg("lexicon"), py::arg("strict") = false,
      "Marker counts and rates for one user's raw post texts.");

  // ses
  m.def(
      "compute_indicators",
      [](double S_hh, double N_hh, double N_own, double N) {
        const auto ind = ses::compute_indicators(S_hh, N_hh, N_own, N);
        py::dict d;
        d["S_inc"] = ind.S_inc;
        d["S_own"] = ind.S_own;
        d["S_den"] = ind.S_den;
        return d;
      },
      py::arg("S_hh"), py::arg("N_hh"), py::arg("N_own"), py::arg("N"));
  m.def(
      "partition_classes",
      [](const std::map<std::string, double>& incomes, int k) {
        std::vector<std::pair<std::string, double>> v(incomes.begin(), incomes.end());
        const auto p = ses::partition_classes(v, k);
        py::dict d;
        d["k"] = p.k;
        d["assignment"] = p.assignment;
        d["boundaries"] = p.boundaries;
        d["class_income"] = p.class_income;
        d["class_size"] = p.class_size;
        return d;
      },
      py::arg("incomes"), py::arg("k") = 9);

  // socionet
  m.def(
      "homophily",
      [](const std::vector<std::pair<std::string, std::string>>& edges, const std::map<std::string, int>& classes,
         int k, std::size_t samples, std::size_t swaps, std::uint64_t seed) {
        std::set<std::string> ids;
        for (const auto& [a, b] : edges) {
          ids.insert(a);
          ids.insert(b);
        }
        const MentionGraph g(std::vector<std::string>(ids.begin(), ids.end()), edges);
        ClassPartition part;
        part.k = k;
        part.assignment = classes;
        const auto nc = socionet::label_nodes(g, part);
        const auto ens = socionet::configuration_null(g, nc, samples, swaps, seed);
        const auto h = socionet::homophily_matrix(g, nc, ens);
        const auto chi = socionet::chi_square_test(h.observed, ens);
        py::dict d;
        d["observed"] = rows(h.observed);
        d["expected"] = rows(h.expected);
        d["ratio"] = rows(h.ratio);
        d["statistic"] = chi.statistic;
        d["p"] = chi.p;
        return d;
      },
      py::arg("edges"), py::arg("classes"), py::arg("k"), py::arg("samples") = 100,
      py::arg("swaps") = socionet::kDefaultSwapsPerEdge, py::arg("seed") = 0,
      "Class mixing ratios against a degree-preserving null. Classes are 1-based.");
  m.def(
      "randomize",
      [](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges, std::size_t swaps, std::uint64_t seed) {
        std::vector<Edge> e;
        for (const auto& [u, v] : edges) e.push_back(u < v ? Edge{u, v} : Edge{v, u});
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        for (const auto& x : socionet::randomize(e, swaps, seed)) out.emplace_back(x.u, x.v);
        return out;
      },
      py::arg("edges"), py::arg("swaps_per_edge") = socionet::kDefaultSwapsPerEdge, py::arg("seed") = 0,
      "Double-edge swaps on an integer edge list.");

  // stats
  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y, std::size_t n_perm, std::uint64_t seed) {
        const auto c = stats::pearson(x, y, n_perm, seed);
        return py::make_tuple(c.r, c.p);
      },
      py::arg("x"), py::arg("y"), py::arg("n_perm") = stats::kDefaultPermutations, py::arg("seed") = 0);
  m.def(
      "binned_regression",
      [](const std::vector<double>& x, const std::vector<double>& y, int n_bins, bool log_x, std::size_t n_perm,
         std::size_t n_boot, std::uint64_t seed) {
        stats::BinnedOptions opt;
        opt.n_bins = n_bins;
        opt.log_x = log_x;
        opt.n_perm = n_perm;
        opt.n_boot = n_boot;
        opt.seed = seed;
        const auto r = stats::binned_regression(x, y, opt);
        py::dict d;
        d["slope"] = r.slope;
        d["intercept"] = r.intercept;
        d["r"] = r.r;
        d["r2"] = r.r2;
        d["p"] = r.p;
        d["slope_ci"] = py::make_tuple(r.slope_ci_low, r.slope_ci_high);
        d["n"] = r.n;
        std::vector<py::dict> pts;
        for (const auto& pt : r.points) {
          py::dict q;
          q["center"] = pt.center;
          q["mean_y"] = pt.mean_y;
          q["n"] = pt.n;
          pts.push_back(q);
        }
        d["points"] = pts;
        return d;
      },
      py::arg("x"), py::arg("y"), py::arg("n_bins") = 30, py::arg("log_x") = false,
      py::arg("n_perm") = stats::kDefaultPermutations, py::arg("n_boot") = stats::kDefaultBootstrap,
      py::arg("seed") = 0);

  // cli
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a sociolex subcommand in-process; returns (exit_code, stdout, stderr).");
}
