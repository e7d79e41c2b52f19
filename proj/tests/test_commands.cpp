#include <cmath>
#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "shredkit/commands.hpp"
#include "shredkit/corpus.hpp"
#include "shredkit/pipeline.hpp"
#include "shredkit/random.hpp"
#include "shredkit/synth.hpp"
#include "test_util.hpp"

using namespace shredkit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SHREDKIT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("validate exit codes") {
  TempDir dir;
  const auto good = dir.write("good.tokens.txt", "artist:a start g:note:s1:f0 wait:480 end");
  const auto bad = dir.write("bad.tokens.txt", "start nfx:bend wait:0 end");
  std::ostringstream err;
  CHECK(cmd_validate({good}, err) == kExitOk);
  CHECK(err.str().empty());
  CHECK(cmd_validate({good, bad}, err) == kExitDomain);
  CHECK(err.str().find("bad.tokens.txt:") != std::string::npos);
  CHECK(cmd_validate({dir.path / "missing.tokens.txt"}, err) == kExitIo);

  CHECK(run_cli("validate " + good.string()) == 0);
  CHECK(run_cli("validate " + bad.string()) == 1);
  CHECK(run_cli("validate " + (dir.path / "nope").string()) == 2);
  CHECK(run_cli("no-such-command") == 2);
  CHECK(run_cli("--version") == 0);
}

TEST_CASE("analyze writes tables and skips tests with one group") {
  TempDir dir;
  write_synth_corpus(synth_corpus({.songs_per_artist = 5, .measures = 6}), dir.path / "corpus");
  std::ostringstream err;
  REQUIRE(cmd_analyze({.corpus = dir.path / "corpus", .out = dir.path / "a"}, err) == kExitOk);
  for (const char* f : {"durations.csv", "techniques.csv", "pitch_classes.csv", "songs.csv", "pce_sc_summary.csv",
                        "summary.csv", "kruskal_wallis.json", "manifest.json"}) {
    CHECK(fs::exists(dir.path / "a" / f));
  }
  const auto kw = json::parse(slurp(dir.path / "a" / "kruskal_wallis.json"));
  CHECK(kw.at("tests").at("durations").at("df") == 3);
  const auto manifest = json::parse(slurp(dir.path / "a" / "manifest.json"));
  CHECK(manifest.at("command") == "analyze");
  CHECK(manifest.contains("timestamp"));

  fs::create_directories(dir.path / "solo");
  fs::copy(dir.path / "corpus" / "steve_vai", dir.path / "solo" / "steve_vai");
  REQUIRE(cmd_analyze({.corpus = dir.path / "solo", .out = dir.path / "b"}, err) == kExitOk);
  const auto single = json::parse(slurp(dir.path / "b" / "kruskal_wallis.json"));
  CHECK(single.at("tests").at("sc").at("skipped") == "need ≥2 groups");

  CHECK(cmd_analyze({.corpus = dir.path / "absent", .out = dir.path / "c"}, err) != kExitOk);
}

TEST_CASE("train-generate layout and budgets") {
  TempDir dir;
  write_synth_corpus(synth_corpus({.songs_per_artist = 4, .measures = 6}), dir.path / "corpus");
  std::ostringstream err;
  TrainGenerateOptions opt{.corpus = dir.path / "corpus", .out = dir.path / "gen", .mode = GenMode::Solo,
                           .prompt = PromptKind::Full, .n = 5, .seed = 3};
  REQUIRE(cmd_train_generate(opt, err) == kExitOk);
  const auto root = dir.path / "gen" / "S-FP";
  CHECK(fs::exists(root / "model.json"));
  CHECK(fs::exists(root / "manifest.json"));
  const auto corpus = ingest(dir.path / "corpus");
  std::size_t files = 0;
  for (const auto& artist : corpus.labels()) {
    for (int i = 0; i < 5; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "gen_%03d.tokens.txt", i + 1);
      const auto p = root / artist / name;
      REQUIRE(fs::exists(p));
      const auto s = parse_stream(slurp(p));
      CHECK(s.header.artist == artist);
      CHECK(error_count(validate(s)) == 0);
      const auto prompt = make_prompt(lead_view(corpus.of_artist(artist)[static_cast<std::size_t>(i) % 4]->stream),
                                      PromptKind::Full, artist);
      CHECK(s.body.size() <= prompt.body.size() + kSoloTokenBudget);
      ++files;
    }
  }
  CHECK(files == 20);
}

TEST_CASE("compare and classify report domain failures") {
  TempDir dir;
  write_synth_corpus(synth_corpus({.songs_per_artist = 5, .measures = 6}), dir.path / "corpus");
  std::ostringstream err;
  fs::create_directories(dir.path / "gen" / "M-FP");
  CHECK(cmd_compare({.groundtruth = dir.path / "corpus", .generated = dir.path / "gen", .out = dir.path / "cmp"}, err) ==
        kExitDomain);
  CHECK(err.str().find("M-EP") != std::string::npos);

  fs::create_directories(dir.path / "one");
  fs::copy(dir.path / "corpus" / "jimi_hendrix", dir.path / "one" / "jimi_hendrix");
  CHECK(cmd_classify({.corpus = dir.path / "one", .out = dir.path / "cl"}, err) == kExitDomain);
  CHECK(cmd_classify({.corpus = dir.path / "corpus", .out = dir.path / "cl"}, err) == kExitOk);
  const auto acc = json::parse(slurp(dir.path / "cl" / "accuracy.json"));
  CHECK(acc.at("total") == 4);  // 5 songs per artist: 3/1/1

  dir.write("ann.json", "{broken");
  CHECK(cmd_extract_solos({.corpus = dir.path / "corpus", .annotations = dir.path / "ann.json", .out = dir.path / "s"},
                          err) == kExitIo);
}

TEST_CASE("report is byte-identical across runs with the same seed") {
  TempDir dir;
  write_synth_corpus(synth_corpus({.songs_per_artist = 6, .measures = 6}), dir.path / "corpus");
  std::ostringstream err;
  auto run = [&](const char* name, std::uint64_t seed) {
    ReportOptions opt{.corpus = dir.path / "corpus", .annotations = dir.path / "corpus" / "annotations.json",
                      .out = dir.path / name, .n = 3, .seed = seed};
    REQUIRE(cmd_report(opt, err) == kExitOk);
    return tree_bytes(dir.path / name);
  };
  const auto a = run("a", 5);
  const auto b = run("b", 5);
  const auto c = run("c", 6);
  CHECK(a.size() > 50);
  CHECK(a == b);
  CHECK(a.at("generated/M-FP/steve_vai/gen_001.tokens.txt") != c.at("generated/M-FP/steve_vai/gen_001.tokens.txt"));
  CHECK(a.count("compare/kld_durations.csv") == 1);
  CHECK(a.count("classify/scores.csv") == 1);
}

TEST_CASE("compare flags the diagonal for copied corpora and the source for swapped ones") {
  TempDir dir;
  const auto corpus = dir.path / "corpus";
  write_synth_corpus(synth_corpus({.songs_per_artist = 4, .measures = 6}), corpus);
  const std::map<std::string, std::string> source = {{"david_gilmour", "david_gilmour"},
                                                     {"jimi_hendrix", "jimi_hendrix"},
                                                     {"steve_vai", "yngwie_malmsteen"},
                                                     {"yngwie_malmsteen", "yngwie_malmsteen"}};
  for (const char* cfg : kConfigNames) {
    fs::create_directories(dir.path / "gen" / cfg);
    for (const auto& [artist, from] : source) fs::copy(corpus / from, dir.path / "gen" / cfg / artist);
  }
  std::ostringstream err;
  REQUIRE(cmd_compare({.groundtruth = corpus, .generated = dir.path / "gen", .out = dir.path / "cmp"}, err) == kExitOk);
  for (const char* table : {"kld_durations.csv", "kld_techniques.csv"}) {
    std::istringstream in(slurp(dir.path / "cmp" / table));
    std::string line;
    std::getline(in, line);
    CHECK(line == "artist,configuration,david_gilmour,jimi_hendrix,steve_vai,yngwie_malmsteen,best");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      const auto artist = line.substr(0, line.find(','));
      CHECK(line.substr(line.rfind(',') + 1) == source.at(artist));
      std::vector<std::string> cells;
      std::stringstream ls(line);
      for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
      REQUIRE(cells.size() == 7);
      if (artist != "steve_vai") {
        const auto col = 2 + static_cast<std::size_t>(std::distance(source.begin(), source.find(artist)));
        CHECK(cells[col] == "0");
      }
    }
    CHECK(rows == 16);
  }
}

TEST_CASE("extract-solos writes one file per section and skips bad annotations") {
  TempDir dir;
  dir.write("corpus/a/song.tokens.txt",
            "start new_measure g:note:s1:f0 wait:480 new_measure g:note:s1:f2 wait:480 new_measure g:note:s1:f3 "
            "wait:480 new_measure g:note:s1:f5 wait:480 end");
  dir.write("corpus/b/other.tokens.txt", "start new_measure g:note:s1:f0 wait:480 end");
  dir.write("ann.json", R"([
    {"song_path": "a/song.tokens.txt", "target_instrument": "g",
     "sections": [{"start_measure": 1, "end_measure": 2}, {"start_measure": 4, "end_measure": 4}]},
    {"song_path": "b/other.tokens.txt", "target_instrument": "g",
     "sections": [{"start_measure": 2, "end_measure": 3}]}])");
  std::ostringstream err;
  REQUIRE(cmd_extract_solos({.corpus = dir.path / "corpus", .annotations = dir.path / "ann.json", .out = dir.path / "s"},
                            err) == kExitOk);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path / "s")) {
    if (e.path().string().ends_with(".tokens.txt")) {
      ++files;
      CHECK(error_count(validate(parse_stream(slurp(e.path())))) == 0);
    }
  }
  CHECK(files == 2);

  dir.write("bad.json", R"([{"song_path": "b/other.tokens.txt", "target_instrument": "g",
     "sections": [{"start_measure": 5, "end_measure": 6}]}])");
  CHECK(cmd_extract_solos({.corpus = dir.path / "corpus", .annotations = dir.path / "bad.json", .out = dir.path / "t"},
                          err) == kExitDomain);
}

TEST_CASE("classify: separable corpus, score layout and shuffled labels") {
  TempDir dir;
  const auto corpus = dir.path / "corpus";
  write_synth_corpus(synth_corpus({.songs_per_artist = 20, .measures = 8}), corpus);
  std::ostringstream err;
  REQUIRE(cmd_train_generate({.corpus = corpus, .out = dir.path / "gen", .n = 2, .seed = 1}, err) == kExitOk);
  for (const char* cfg : {"M-EP", "S-FP", "S-EP"}) fs::copy(dir.path / "gen" / "M-FP", dir.path / "gen" / cfg, fs::copy_options::recursive);
  REQUIRE(cmd_classify({.corpus = corpus, .eval = dir.path / "gen", .out = dir.path / "cl"}, err) == kExitOk);
  CHECK(json::parse(slurp(dir.path / "cl" / "accuracy.json")).at("accuracy") == 1.0);

  std::istringstream in(slurp(dir.path / "cl" / "scores.csv"));
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 8);
    double sum = 0;
    for (std::size_t c = 3; c < 7; ++c) sum += std::stod(cells[c]);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
  }
  CHECK(rows == 16);

  // Shuffle labels by moving files between artist directories.
  const auto shuffled = dir.path / "shuffled";
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(corpus)) {
    if (e.path().string().ends_with(".tokens.txt")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  Rng rng(17);
  for (std::size_t i = files.size(); i > 1; --i) std::swap(files[i - 1], files[uniform_below(rng, i)]);
  const std::vector<std::string> artists = {"a", "b", "c", "d"};
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::create_directories(shuffled / artists[i % 4]);
    fs::copy(files[i], shuffled / artists[i % 4] / ("s" + std::to_string(i) + ".tokens.txt"));
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    REQUIRE(cmd_classify({.corpus = shuffled, .out = dir.path / "sh", .seed = seed}, err) == kExitOk);
    const auto acc = json::parse(slurp(dir.path / "sh" / "accuracy.json"));
    const double n = acc.at("total").get<double>();
    const double sigma = std::sqrt(0.25 * 0.75 / n);
    CHECK(acc.at("accuracy").get<double>() <= 0.25 + 3 * sigma);
    CHECK(acc.at("accuracy").get<double>() >= 0.25 - 3 * sigma);
  }
}

TEST_CASE("analyze and train-generate repeat byte for byte") {
  TempDir dir;
  write_synth_corpus(synth_corpus({.songs_per_artist = 4, .measures = 6}), dir.path / "corpus");
  std::ostringstream err;
  for (const char* out : {"a1", "a2"}) {
    REQUIRE(cmd_analyze({.corpus = dir.path / "corpus", .out = dir.path / out}, err) == kExitOk);
  }
  CHECK(tree_bytes(dir.path / "a1") == tree_bytes(dir.path / "a2"));
  for (const char* out : {"g1", "g2"}) {
    REQUIRE(cmd_train_generate({.corpus = dir.path / "corpus", .out = dir.path / out, .prompt = PromptKind::Empty,
                                .n = 3, .seed = 9},
                               err) == kExitOk);
  }
  CHECK(tree_bytes(dir.path / "g1") == tree_bytes(dir.path / "g2"));
}
