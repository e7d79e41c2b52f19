#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "shredkit/classify.hpp"
#include "shredkit/commands.hpp"
#include "shredkit/corpus.hpp"
#include "shredkit/error.hpp"
#include "shredkit/musicology.hpp"
#include "shredkit/stats.hpp"
#include "shredkit/stylelm.hpp"
#include "shredkit/synth.hpp"
#include "shredkit/tokens.hpp"

namespace py = pybind11;
using namespace shredkit;

namespace {

using Counts = std::map<std::string, double>;

Counts to_dict(const Distribution& d) {
  Counts out;
  for (const auto& b : d.bins()) out[b.label] = b.count;
  return out;
}

Distribution from_dict(const Counts& c) {
  Distribution d;
  for (const auto& [k, v] : c) d.add(k, v);
  return d;
}

PitchClassCounts pc_counts(const std::vector<double>& v) {
  if (v.size() != 12) throw std::invalid_argument("expected 12 pitch-class counts");
  PitchClassCounts c{};
  std::copy(v.begin(), v.end(), c.begin());
  return c;
}

// Runs a command, returning (exit code, diagnostics).
template <class F>
std::pair<int, std::string> run(F&& f) {
  std::ostringstream err;
  const int rc = f(err);
  return {rc, err.str()};
}

}  // namespace

PYBIND11_MODULE(_shredkit, m) {
  m.doc() = "Guitar tablature token toolkit: parsing, musicology, statistics, style model and classifier.";
  py::register_exception<Error>(m, "ShredkitError", PyExc_ValueError);
  m.attr("__version__") = SHREDKIT_VERSION;

  m.def("canonicalize", [](const std::string& text) { return serialize(parse_stream(text)); },
        py::arg("text"), "Parse a token file and re-serialize it canonically.");
  m.def("token_kind", [](const std::string& word) { return std::string(kind_name(parse_token(word))); },
        py::arg("word"));
  m.def(
      "validate",
      [](const std::string& text) {
        std::vector<std::tuple<std::size_t, std::string, std::string>> out;
        for (const auto& v : validate(parse_stream(text))) {
          out.emplace_back(v.token_index, v.severity == Severity::Error ? "error" : "warning", v.message);
        }
        return out;
      },
      py::arg("text"), "List of (token_index, severity, message).");

  m.def(
      "note_durations",
      [](const std::string& text, std::optional<std::string> instrument) {
        return to_dict(note_duration_distribution(decode_events(parse_stream(text), instrument)));
      },
      py::arg("text"), py::arg("instrument") = py::none());
  m.def("techniques", [](const std::string& text) { return to_dict(technique_distribution(parse_stream(text))); },
        py::arg("text"));
  m.def(
      "pitch_class_counts",
      [](const std::string& text, std::optional<std::string> instrument) {
        const auto c = to_pitch_class_counts(pitch_class_histogram(decode_events(parse_stream(text), instrument)));
        return std::vector<double>(c.begin(), c.end());
      },
      py::arg("text"), py::arg("instrument") = py::none(), "Counts for C, C#, ..., B.");
  m.def("pitch_class_entropy", [](const std::vector<double>& c) { return pitch_class_entropy(pc_counts(c)); },
        py::arg("counts"));
  m.def(
      "scale_consistency",
      [](const std::vector<double>& c) {
        const auto r = scale_consistency(pc_counts(c));
        return std::make_pair(r.consistency, to_string(r.best_scale));
      },
      py::arg("counts"), "(consistency, best scale name)");

  m.def("kld", [](const Counts& p, const Counts& q, double eps) { return kld(from_dict(p), from_dict(q), eps); },
        py::arg("p"), py::arg("q"), py::arg("epsilon") = kDefaultKldEpsilon, "KL(p||q) in bits.");
  m.def(
      "kruskal_wallis",
      [](const std::vector<std::vector<double>>& groups) {
        const auto r = kruskal_wallis(groups);
        py::dict d;
        d["statistic"] = r.statistic;
        d["df"] = r.df;
        d["p"] = r.p;
        d["tie_correction"] = r.tie_correction;
        return d;
      },
      py::arg("groups"));
  m.def("chi_square_sf", &chi_square_sf, py::arg("x"), py::arg("df"));

  py::class_<StyleLM>(m, "StyleModel")
      .def_static(
          "train",
          [](const std::filesystem::path& corpus, int order, double lambda, double add_k) {
            return StyleLM::train(ingest(corpus), {order, lambda, add_k, 0.4});
          },
          py::arg("corpus"), py::arg("order") = 4, py::arg("lam") = 0.7, py::arg("add_k") = 0.01)
      .def_static("load", &StyleLM::load, py::arg("path"))
      .def("save", &StyleLM::save, py::arg("path"))
      .def_property_readonly("artists", &StyleLM::artists)
      .def_property_readonly("vocab_size", [](const StyleLM& s) { return s.vocab().size(); })
      .def(
          "prob",
          [](const StyleLM& s, const std::vector<std::string>& context, const std::string& token,
             const std::string& artist) { return s.prob(context, token, artist); },
          py::arg("context"), py::arg("token"), py::arg("artist"))
      .def(
          "generate",
          [](const StyleLM& s, const std::string& prompt, const std::string& artist, bool solo,
             std::optional<int> max_tokens, double temperature, std::optional<int> top_k, std::uint64_t seed) {
            GenerationConfig cfg;
            cfg.mode = solo ? GenMode::Solo : GenMode::Multi;
            cfg.max_tokens = max_tokens;
            cfg.temperature = temperature;
            cfg.top_k = top_k;
            cfg.seed = seed;
            auto p = parse_stream(prompt);
            p.has_end = false;
            return serialize(generate(s, p, artist, cfg));
          },
          py::arg("prompt"), py::arg("artist"), py::arg("solo") = false, py::arg("max_tokens") = py::none(),
          py::arg("temperature") = 1.0, py::arg("top_k") = py::none(), py::arg("seed") = 0);

  py::class_<NBModel>(m, "NaiveBayes")
      .def_static(
          "train", [](const std::filesystem::path& corpus, double alpha) { return train_nb(ingest(corpus), {alpha}); },
          py::arg("corpus"), py::arg("alpha") = 1.0)
      .def_property_readonly("artists", &NBModel::artists)
      .def(
          "scores",
          [](const NBModel& nb, const std::string& text) {
            const auto s = nb.scores(parse_stream(text));
            Counts out;
            for (std::size_t i = 0; i < s.size(); ++i) out[nb.artists()[i]] = s[i];
            return out;
          },
          py::arg("text"));

  m.def(
      "synth",
      [](const std::filesystem::path& out, int songs_per_artist, int measures, std::uint64_t seed) {
        return run([&](std::ostream& err) { return cmd_synth({out, songs_per_artist, measures, seed}, err); });
      },
      py::arg("out"), py::arg("songs_per_artist") = 20, py::arg("measures") = 12, py::arg("seed") = 7);
  m.def(
      "analyze",
      [](const std::filesystem::path& corpus, const std::filesystem::path& out) {
        return run([&](std::ostream& err) { return cmd_analyze({corpus, out, std::nullopt, false}, err); });
      },
      py::arg("corpus"), py::arg("out"));
  m.def(
      "report",
      [](const std::filesystem::path& corpus, const std::filesystem::path& annotations,
         const std::filesystem::path& out, int n, std::uint64_t seed) {
        ReportOptions opt;
        opt.corpus = corpus;
        opt.annotations = annotations;
        opt.out = out;
        opt.n = n;
        opt.seed = seed;
        return run([&](std::ostream& err) { return cmd_report(opt, err); });
      },
      py::arg("corpus"), py::arg("annotations"), py::arg("out"), py::arg("n") = 20, py::arg("seed") = 0,
      "Full analysis, generation, comparison and classification run. Returns (exit code, diagnostics).");
}
