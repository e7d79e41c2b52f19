#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "shredkit/error.hpp"
#include "shredkit/musicology.hpp"
#include "shredkit/random.hpp"
#include "shredkit/tokens.hpp"

using namespace shredkit;

namespace {

PitchClassCounts from_map(std::initializer_list<std::pair<int, double>> items) {
  PitchClassCounts c{};
  for (auto [pc, n] : items) c[static_cast<std::size_t>(pc)] = n;
  return c;
}

EventTimeline timeline_of_pitches(const std::vector<int>& pitches) {
  EventTimeline tl;
  std::int64_t t = 0;
  for (int p : pitches) {
    tl.events.push_back({"g", t, p, 240, {}});
    t += 240;
  }
  tl.total_ticks = t;
  return tl;
}

}  // namespace

TEST_CASE("note_duration_distribution bins exact tick values") {
  CHECK_THROWS_AS(note_duration_distribution(EventTimeline{}), Error);
  const auto run = decode_events(parse_stream(
      "start g:note:s1:f0 wait:240 g:note:s1:f1 wait:240 g:note:s1:f2 wait:240 g:note:s1:f3 wait:240 end"));
  const auto d = note_duration_distribution(run);
  REQUIRE(d.size() == 1);
  CHECK(d.bins()[0].label == "240");
  CHECK(d.count("240") == 4);

  const auto mixed = decode_events(parse_stream(
      "start g:note:s1:f0 wait:240 g:note:s1:f1 wait:240 g:note:s1:f2 wait:480 g:note:s1:f3 wait:160 end"));
  const auto m = note_duration_distribution(mixed);
  REQUIRE(m.size() == 3);
  CHECK(m.bins()[0].label == "160");
  CHECK(m.bins()[1].label == "240");
  CHECK(m.bins()[2].label == "480");
  CHECK(m.count("160") == 1);
  CHECK(m.count("240") == 2);
  CHECK(m.count("480") == 1);
  CHECK(m.total() == static_cast<double>(mixed.pitched_count()));
}

TEST_CASE("technique_distribution counts canonical techniques by prefix") {
  const auto s = parse_stream(
      "start g:note:s1:f0 nfx:hammer wait:1 g:note:s1:f0 nfx:hammer wait:1 g:note:s1:f0 nfx:hammer "
      "wait:1 g:note:s1:f0 nfx:bend:type1:pos0 wait:1 end");
  const auto d = technique_distribution(s);
  CHECK(d.size() == 6);
  CHECK(d.count("hammer") == 3);
  CHECK(d.count("bend") == 1);
  CHECK(d.total() == 4);

  const auto h = technique_distribution(parse_stream("start g:note:s1:f0 nfx:harmonic wait:1 end"));
  CHECK(h.total() == 0);

  // Manual tally over all six techniques in nfx and bfx form.
  const auto all = technique_distribution(parse_stream(
      "start g:note:s1:f0 nfx:bend nfx:vibrato bfx:palm_mute wait:1 g:note:s1:f0 nfx:slide:1 "
      "nfx:tapping wait:1 g:note:s1:f0 nfx:tap bfx:vibrato nfx:hammer wait:1 g:note:s1:f0 "
      "nfx:palm_mute nfx:let_ring wait:1 end"));
  CHECK(all.count("bend") == 1);
  CHECK(all.count("vibrato") == 2);
  CHECK(all.count("hammer") == 1);
  CHECK(all.count("slide") == 1);
  CHECK(all.count("tapping") == 2);
  CHECK(all.count("palm_mute") == 2);
  CHECK(technique_for_effect("harmonic") == std::nullopt);
}

TEST_CASE("pitch_class_histogram counts pitch mod 12") {
  CHECK_THROWS_AS(pitch_class_histogram(EventTimeline{}), Error);
  const auto h = pitch_class_histogram(timeline_of_pitches({60, 63, 67}));
  CHECK(h.size() == 12);
  CHECK(h.count("C") == 1);
  CHECK(h.count("Eb") == 1);
  CHECK(h.count("G") == 1);
  CHECK(h.total() == 3);

  // Eb minor pentatonic: Eb Gb Ab Bb Db.
  const auto pent = pitch_class_histogram(timeline_of_pitches({63, 66, 68, 70, 73, 75, 51}));
  int nonzero = 0;
  for (const auto& b : pent.bins()) nonzero += b.count > 0;
  CHECK(nonzero == 5);
}

TEST_CASE("pitch_class_entropy examples") {
  CHECK(pitch_class_entropy(from_map({{0, 5}})) == 0.0);
  PitchClassCounts uniform;
  uniform.fill(1.0);
  CHECK(pitch_class_entropy(uniform) == doctest::Approx(std::log2(12.0)).epsilon(1e-12));
  CHECK(pitch_class_entropy(from_map({{0, 2}, {7, 2}})) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pitch_class_entropy(PitchClassCounts{}), Error);
}

TEST_CASE("scale_consistency examples and tie-break") {
  const auto diatonic = scale_consistency(from_map({{0, 1}, {2, 1}, {4, 1}, {5, 1}, {7, 1}, {9, 1}, {11, 1}}));
  CHECK(diatonic.consistency == 1.0);
  CHECK(diatonic.best_scale == Scale{0, Mode::Major});

  PitchClassCounts uniform;
  uniform.fill(3.0);
  const auto chrom = scale_consistency(uniform);
  CHECK(std::fabs(chrom.consistency - 7.0 / 12.0) < 1e-12);
  CHECK(chrom.best_scale == Scale{0, Mode::Major});

  const auto semitone = scale_consistency(from_map({{0, 1}, {1, 1}}));
  CHECK(semitone.consistency == 1.0);
  CHECK(semitone.best_scale == Scale{1, Mode::Major});
  CHECK(to_string(semitone.best_scale) == "C# major");

  const auto a_minor = scale_consistency(from_map({{9, 4}, {0, 1}}));
  CHECK(a_minor.best_scale == Scale{0, Mode::Major});  // same set as A minor; lower root wins
  CHECK_THROWS_AS(scale_consistency(PitchClassCounts{}), Error);
}

TEST_CASE("scale_consistency matches the explicit 24-scale oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<double, 12> c{};
    const auto support = 1 + uniform_below(rng, 12);
    for (std::uint64_t k = 0; k < support; ++k) c[uniform_below(rng, 12)] += static_cast<double>(1 + uniform_below(rng, 9));
    const auto got = scale_consistency(c);
    const auto want = oracle::scale_consistency(c);
    REQUIRE(got.consistency == doctest::Approx(want.consistency).epsilon(1e-12));
    REQUIRE(to_string(got.best_scale) == want.scale);
  }
}

TEST_CASE("entropy and scale properties on random histograms") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    PitchClassCounts c{};
    const auto support = 1 + uniform_below(rng, 12);
    for (std::uint64_t k = 0; k < support; ++k) c[uniform_below(rng, 12)] += 1.0 + static_cast<double>(uniform_below(rng, 5));
    const double h = pitch_class_entropy(c);
    int nonzero = 0;
    for (double x : c) nonzero += x > 0;
    CHECK(h >= 0.0);
    CHECK(h <= std::log2(12.0) + 1e-12);
    CHECK((h == 0.0) == (nonzero == 1));
    CHECK(h == doctest::Approx(oracle::entropy_bits({c.begin(), c.end()})).epsilon(1e-12));

    // Best seven classes bound SC from above.
    std::array<double, 12> sorted = c;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double top7 = 0, total = 0;
    for (int i = 0; i < 12; ++i) {
      total += sorted[i];
      if (i < 7) top7 += sorted[i];
    }
    const auto sc = scale_consistency(c);
    CHECK(sc.consistency <= top7 / total + 1e-12);

    // Transposition covariance.
    const int k = static_cast<int>(uniform_below(rng, 12));
    PitchClassCounts t{};
    for (int i = 0; i < 12; ++i) t[static_cast<std::size_t>((i + k) % 12)] = c[static_cast<std::size_t>(i)];
    CHECK(pitch_class_entropy(t) == doctest::Approx(h).epsilon(1e-12));
    CHECK(scale_consistency(t).consistency == doctest::Approx(sc.consistency).epsilon(1e-12));
  }
}

TEST_CASE("corpus_summary averages header tempos and counts tokens") {
  std::vector<std::pair<std::string, TokenStream>> corpus = {
      {"a", parse_stream("tempo:90 start g:note:s1:f0 nfx:bend wait:1 g:note:s1:f0 bfx:x wait:1 end")},
      {"a", parse_stream("tempo:98 start g:note:s1:f0 drums:note:36 wait:1 end")},
      {"b", parse_stream("start g:note:s1:f0 wait:1 end")}};
  const auto rows = corpus_summary(corpus, {"a", "b", "c"});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].artist == "a");
  CHECK(rows[0].avg_tempo == 94);
  CHECK(rows[0].num_songs == 2);
  CHECK(rows[0].num_notes == 3);
  CHECK(rows[0].num_fx == 2);
  CHECK(rows[1].avg_tempo == 120);
  CHECK(rows[2].artist == "c");
  CHECK_FALSE(rows[2].avg_tempo.has_value());
  CHECK(rows[2].num_notes == 0);
}
