#include <cmath>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "shredkit/classify.hpp"
#include "shredkit/error.hpp"
#include "shredkit/random.hpp"
#include "shredkit/stylelm.hpp"
#include "shredkit/synth.hpp"

using namespace shredkit;

namespace {

using Docs = std::vector<NBModel::Document>;

std::map<std::string, std::vector<std::vector<std::string>>> group(const Docs& docs) {
  std::map<std::string, std::vector<std::vector<std::string>>> g;
  for (const auto& [a, f] : docs) g[a].push_back(f);
  return g;
}

}  // namespace

TEST_CASE("hand-computed toy model") {
  const Docs docs = {{"a", {"x", "x", "y"}}, {"b", {"y", "z"}}};
  const auto m = NBModel::train_documents(docs, 1.0);
  CHECK(m.artists() == std::vector<std::string>{"a", "b"});
  CHECK(m.vocab() == std::vector<std::string>{"x", "y", "z"});
  CHECK(m.log_prior(0) == doctest::Approx(std::log(0.5)));
  CHECK(m.log_likelihood(0, "x") == doctest::Approx(std::log(3.0 / 6.0)));
  CHECK(m.log_likelihood(1, "x") == doctest::Approx(std::log(1.0 / 5.0)));
  CHECK(std::isnan(m.log_likelihood(0, "w")));

  const std::vector<std::string> q = {"x", "y", "w"};
  const auto s = m.scores_features(q);
  const double pa = 0.5 * (3.0 / 6) * (2.0 / 6), pb = 0.5 * (1.0 / 5) * (2.0 / 5);
  CHECK(s[0] == doctest::Approx(pa / (pa + pb)).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(pb / (pa + pb)).epsilon(1e-12));
  const std::vector<std::string> unseen = {"w"};
  CHECK(m.scores_features(unseen)[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(m.scores_features(std::vector<std::string>{}), Error);
  CHECK_THROWS_AS(m.scores(parse_stream("artist:a start end")), Error);
  CHECK_THROWS_AS(NBModel::train_documents({{"a", {"x"}}}, 1.0), Error);
  CHECK_THROWS_AS(NBModel::train_documents(docs, 0.0), std::invalid_argument);
}

TEST_CASE("posteriors match the direct-product oracle") {
  Rng rng(31);
  const std::vector<std::string> alphabet = {"p", "q", "r", "s", "t", "u"};
  for (int trial = 0; trial < 200; ++trial) {
    Docs docs;
    const auto classes = 2 + uniform_below(rng, 3);
    for (std::uint64_t c = 0; c < classes; ++c) {
      const auto n_docs = 1 + uniform_below(rng, 3);
      for (std::uint64_t d = 0; d < n_docs; ++d) {
        std::vector<std::string> f;
        const auto len = 1 + uniform_below(rng, 6);
        for (std::uint64_t k = 0; k < len; ++k) f.push_back(alphabet[uniform_below(rng, alphabet.size())]);
        docs.push_back({"c" + std::to_string(c), f});
      }
    }
    std::vector<std::string> query;
    for (int k = 0; k < 5; ++k) query.push_back(alphabet[uniform_below(rng, alphabet.size())]);
    query.push_back("never");
    const double alpha = 0.5 + uniform01(rng);
    const auto m = NBModel::train_documents(docs, alpha);
    bool known = false;
    for (const auto& w : query) known = known || std::binary_search(m.vocab().begin(), m.vocab().end(), w);
    if (!known) continue;
    const auto got = m.scores_features(query);
    const auto want = oracle::nb_posterior(group(docs), query, alpha);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) REQUIRE(std::fabs(got[i] - want[i]) < 1e-9);
  }
}

TEST_CASE("likelihoods normalise and flatten as alpha grows") {
  const Docs docs = {{"a", {"x", "x", "x", "y"}}, {"b", {"y", "z"}}, {"c", {"z"}}, {"d", {"x", "z"}}};
  const auto m = NBModel::train_documents(docs, 1.0);
  for (std::size_t a = 0; a < m.artists().size(); ++a) {
    double total = 0;
    for (const auto& w : m.vocab()) total += std::exp(m.log_likelihood(a, w));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto flat = NBModel::train_documents(docs, 1e12);
  const std::vector<std::string> q = {"x", "x", "z"};
  for (double s : flat.scores_features(q)) CHECK(s == doctest::Approx(0.25).epsilon(1e-6));

  const Docs symmetric = {{"a", {"x"}}, {"b", {"y"}}, {"c", {"z"}}, {"d", {"w"}}};
  const auto sym = NBModel::train_documents(symmetric, 1.0);
  const std::vector<std::string> neutral = {"v", "x", "y", "z", "w"};
  for (double s : sym.scores_features(neutral)) CHECK(s == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("artist tokens never become features") {
  const auto s = parse_stream(
      "artist:alpha downtune:0 tempo:100 start new_measure g:note:s1:f0 nfx:bend bfx:vibrato b:note:s2:f1 "
      "wait:480 mystery:word g:note:s1:f2 wait:480 end");
  const auto f = nb_features(s, true);
  CHECK(f == std::vector<std::string>{"g:note:s1:f0", "nfx:bend", "bfx:vibrato", "wait:480", "g:note:s1:f2", "wait:480"});
  const auto all = nb_features(s, false);
  CHECK(std::find(all.begin(), all.end(), "b:note:s2:f1") != all.end());
  for (const auto& w : all) {
    CHECK(w.rfind("artist", 0) != 0);
    CHECK(w.rfind("mystery", 0) != 0);
  }
  auto renamed = s;
  renamed.header.artist = "beta";
  CHECK(nb_features(renamed) == f);
}

TEST_CASE("duplicating every training document keeps the decision") {
  const auto corpus = to_corpus_index(synth_corpus({.songs_per_artist = 6, .measures = 6}));
  const auto m = train_nb(corpus);
  CorpusIndex doubled = corpus;
  for (auto e : corpus.entries) {
    e.path += ".dup";
    doubled.entries.push_back(std::move(e));
  }
  const auto m2 = train_nb(doubled);
  for (const auto& e : corpus.entries) CHECK(argmax(m.scores(e.stream)) == argmax(m2.scores(e.stream)));
}

TEST_CASE("evaluation on synthetic players") {
  const auto corpus = to_corpus_index(synth_corpus({.songs_per_artist = 20, .measures = 8}));
  const auto parts = split(corpus, {}, 3);
  const auto m = train_nb(parts.train);
  const auto ev = evaluate(m, parts.test);
  CHECK(ev.total == parts.test.entries.size());
  long sum = 0;
  for (std::size_t i = 0; i < ev.confusion.size(); ++i) {
    long row = 0;
    for (long c : ev.confusion[i]) row += c;
    CHECK(static_cast<std::size_t>(row) == parts.test.count(ev.artists[i]));
    sum += ev.confusion[i][i];
  }
  CHECK(ev.accuracy == doctest::Approx(static_cast<double>(sum) / static_cast<double>(ev.total)));
  CHECK(ev.accuracy >= 0.9);

  CorpusIndex stranger = parts.test;
  stranger.entries.front().artist_label = "nobody";
  CHECK_THROWS_AS(evaluate(m, stranger), Error);
}

TEST_CASE("shuffled labels give chance-level accuracy") {
  auto corpus = to_corpus_index(synth_corpus({.songs_per_artist = 20, .measures = 6}));
  Rng rng(4);
  std::vector<std::string> labels;
  for (const auto& e : corpus.entries) labels.push_back(e.artist_label);
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[uniform_below(rng, i)]);
  for (std::size_t i = 0; i < labels.size(); ++i) corpus.entries[i].artist_label = labels[i];
  double total = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto parts = split(corpus, {}, seed);
    total += evaluate(train_nb(parts.train), parts.test).accuracy;
  }
  CHECK(total / 8 < 0.55);
}

TEST_CASE("score table and model file") {
  const auto corpus = to_corpus_index(synth_corpus({.songs_per_artist = 6, .measures = 6}));
  const auto m = train_nb(corpus);
  GeneratedCorpora gen;
  for (const auto& e : corpus.entries) {
    for (const char* cfg : kConfigNames) gen[{e.artist_label, cfg}].push_back(e.stream);
  }
  const auto table = score_table(m, gen);
  CHECK(table.columns == m.artists());
  REQUIRE(table.rows.size() == 16);
  CHECK(table.rows[0].configuration == "M-FP");
  CHECK(table.rows[1].configuration == "M-EP");
  CHECK(table.rows[3].configuration == "S-EP");
  CHECK(table.rows[4].artist == m.artists()[1]);
  for (const auto& r : table.rows) {
    CHECK(r.n_streams == 6);
    double s = 0;
    for (double x : r.scores) s += x;
    CHECK(s == doctest::Approx(1.0));
  }
  CHECK(table.diagonal_hits() == 16);
  const auto csv = table.to_csv();
  CHECK(csv.rfind("artist,configuration,n," + m.artists()[0], 0) == 0);

  gen[{"david_gilmour", "M-FP"}].clear();
  CHECK_THROWS_AS(score_table(m, gen), Error);

  const auto back = NBModel::from_json(m.to_json());
  CHECK(back.artists() == m.artists());
  CHECK(back.vocab() == m.vocab());
  for (const auto& e : corpus.entries) CHECK(back.scores(e.stream) == m.scores(e.stream));
  CHECK_THROWS_AS(NBModel::from_json(nlohmann::json{{"format", "x"}}), Error);

  CorpusIndex one;
  one.entries.push_back(corpus.entries.front());
  CHECK_THROWS_AS(train_nb(one), Error);
}

TEST_CASE("feature scorer separates synthetic players") {
  const auto corpus = to_corpus_index(synth_corpus({.songs_per_artist = 12, .measures = 8}));
  const auto parts = split(corpus, {0.5, 0.25, 0.25}, 9);
  const auto fs = FeatureScorer::train(parts.train);
  std::size_t hits = 0;
  for (const auto& e : parts.test.entries) {
    const auto s = fs.scores(e.stream);
    double sum = 0;
    for (double x : s) sum += x;
    CHECK(sum == doctest::Approx(1.0));
    hits += fs.artists()[argmax(s)] == e.artist_label;
  }
  CHECK(static_cast<double>(hits) / static_cast<double>(parts.test.entries.size()) >= 0.75);
}
