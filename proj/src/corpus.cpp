#include "shredkit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "shredkit/error.hpp"
#include "shredkit/random.hpp"
#include "shredkit/log.hpp"

namespace shredkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kTokenSuffix = ".tokens.txt";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read error on " + p.string());
  return ss.str();
}

json read_json(const fs::path& file) {
  try {
    return json::parse(read_file(file));
  } catch (const json::exception& e) {
    throw std::runtime_error(file.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace

std::vector<std::string> CorpusIndex::labels() const {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.artist_label);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t CorpusIndex::count(const std::string& label) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const auto& e) { return e.artist_label == label; }));
}

std::vector<const CorpusEntry*> CorpusIndex::of_artist(const std::string& label) const {
  std::vector<const CorpusEntry*> out;
  for (const auto& e : entries) {
    if (e.artist_label == label) out.push_back(&e);
  }
  return out;
}

Manifest load_manifest(const fs::path& file) {
  const json j = read_json(file);
  if (!j.is_object()) throw std::runtime_error(file.string() + ": manifest must be a JSON object");
  Manifest m;
  for (const auto& [path, label] : j.items()) m[path] = label.get<std::string>();
  return m;
}

CorpusIndex ingest(const fs::path& root, const LabelRule& rule) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::EmptyCorpus, root.string() + " is not a directory");
  }
  std::vector<std::pair<std::string, fs::path>> files;
  for (const auto& de : fs::recursive_directory_iterator(root)) {
    if (!de.is_regular_file()) continue;
    const auto name = de.path().filename().string();
    if (!name.ends_with(kTokenSuffix)) continue;
    files.emplace_back(fs::relative(de.path(), root).generic_string(), de.path());
  }
  std::sort(files.begin(), files.end());

  CorpusIndex index;
  for (const auto& [rel, full] : files) {
    std::string label;
    if (auto it = rule.manifest.find(rel); it != rule.manifest.end()) {
      label = it->second;
    } else if (auto slash = rel.find('/'); slash != std::string::npos) {
      label = rel.substr(0, slash);
    }
    if (label.empty()) {
      index.skipped.push_back({rel, "no artist label"});
      log().warn("skipping {}: no artist label", rel);
      continue;
    }
    try {
      CorpusEntry entry{rel, label, parse_stream(read_file(full), {.strict = true}), {}};
      entry.warnings = entry.stream.warnings;
      for (const auto& v : validate(entry.stream)) {
        entry.warnings.push_back(std::to_string(v.token_index) + ": " + v.message);
      }
      index.entries.push_back(std::move(entry));
    } catch (const std::exception& e) {
      index.skipped.push_back({rel, e.what()});
      log().warn("skipping {}: {}", rel, e.what());
    }
  }
  if (index.entries.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "no token files loaded from " + root.string());
  }
  return index;
}

TokenStream inject_artist_token(TokenStream stream, const std::string& artist) {
  const bool bad = artist.empty() || std::any_of(artist.begin(), artist.end(), [](char c) {
                     return c == ':' || std::isspace(static_cast<unsigned char>(c));
                   });
  if (bad) throw Error(ErrorCode::InvalidArtistName, "'" + artist + "'");
  stream.header.artist = artist;
  return stream;
}

std::vector<MeasureSpan> measure_spans(const TokenStream& stream) {
  const auto& body = stream.body;
  std::vector<std::size_t> marks;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (is<tok::NewMeasure>(body[i])) marks.push_back(i);
  }
  if (marks.empty()) return {};

  const bool timed_before_first = std::any_of(body.begin(), body.begin() + static_cast<long>(marks[0]),
                                              [](const Token& t) {
                                                return is<tok::Wait>(t) || is_note_like(t);
                                              });
  std::vector<MeasureSpan> spans;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < marks.size(); ++k) {
    if (k == 0 && !timed_before_first) continue;
    spans.push_back({begin, marks[k]});
    begin = marks[k];
  }
  spans.push_back({begin, body.size()});
  return spans;
}

namespace {

SoloAnnotation annotation_from_json(const json& j, std::string song_path) {
  SoloAnnotation a;
  a.song_path = std::move(song_path);
  a.target_instrument = j.at("target_instrument").get<std::string>();
  for (const auto& s : j.at("sections")) {
    a.sections.push_back({s.at("start_measure").get<int>(), s.at("end_measure").get<int>()});
  }
  return a;
}

}  // namespace

std::vector<SoloAnnotation> parse_annotations(const std::string& json_text) {
  const json j = json::parse(json_text);
  std::vector<SoloAnnotation> out;
  if (j.is_array()) {
    for (const auto& rec : j) out.push_back(annotation_from_json(rec, rec.at("song_path").get<std::string>()));
  } else if (j.is_object()) {
    for (const auto& [path, rec] : j.items()) out.push_back(annotation_from_json(rec, path));
  } else {
    throw std::runtime_error("annotations must be a JSON list or object");
  }
  return out;
}

std::vector<SoloAnnotation> load_annotations(const fs::path& file) {
  try {
    return parse_annotations(read_file(file));
  } catch (const json::exception& e) {
    throw std::runtime_error(file.string() + ": " + e.what());
  }
}

std::vector<Token> filter_instrument_tokens(std::span<const Token> tokens,
                                            const std::string& instrument) {
  std::vector<Token> out;
  bool kept_note_in_beat = false;  // a target note was emitted since the last wait
  bool attached_to_kept = false;   // the most recent note-like token was kept
  bool removed_since_wait = false;
  bool last_is_wait = false;

  auto emit = [&](const Token& t) {
    out.push_back(t);
    last_is_wait = false;
  };

  for (const auto& t : tokens) {
    if (auto* n = std::get_if<tok::Note>(&t)) {
      attached_to_kept = n->instrument == instrument;
      if (attached_to_kept) {
        emit(t);
        kept_note_in_beat = true;
      } else {
        removed_since_wait = true;
      }
    } else if (is<tok::Drums>(t)) {
      attached_to_kept = instrument == "drums";
      if (attached_to_kept) {
        emit(t);
        kept_note_in_beat = true;
      } else {
        removed_since_wait = true;
      }
    } else if (is<tok::NoteEffect>(t)) {
      if (attached_to_kept && kept_note_in_beat) {
        emit(t);
      } else {
        removed_since_wait = true;
      }
    } else if (is<tok::BeatEffect>(t)) {
      if (kept_note_in_beat) {
        emit(t);
      } else {
        removed_since_wait = true;
      }
    } else if (auto* w = std::get_if<tok::Wait>(&t)) {
      if (last_is_wait && removed_since_wait) {
        std::get<tok::Wait>(out.back()).ticks += w->ticks;
      } else {
        emit(t);
        last_is_wait = true;
      }
      removed_since_wait = false;
      kept_note_in_beat = false;
      attached_to_kept = false;
    } else if (is<tok::NewMeasure>(t) || is<tok::Tempo>(t)) {
      emit(t);
    } else {
      removed_since_wait = true;
    }
  }
  return out;
}

TokenStream filter_instrument(const TokenStream& stream, const std::string& instrument) {
  TokenStream out;
  out.header = stream.header;
  out.body = filter_instrument_tokens(stream.body, instrument);
  out.has_start = true;
  out.has_end = true;
  return out;
}

std::optional<std::string> lead_instrument(const TokenStream& stream) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : stream.body) {
    if (auto* n = std::get_if<tok::Note>(&t); n && !n->instrument.starts_with("bass")) {
      ++counts[n->instrument];
    }
  }
  std::optional<std::string> best;
  std::size_t best_count = 0;
  for (const auto& [name, c] : counts) {
    if (c > best_count) {
      best = name;
      best_count = c;
    }
  }
  return best;
}

TokenStream lead_view(const TokenStream& stream) {
  auto lead = lead_instrument(stream);
  if (!lead) return stream;
  return filter_instrument(stream, *lead);
}

TokenStream extract_section(const TokenStream& stream, const SoloSection& section,
                            const std::string& target_instrument) {
  const auto spans = measure_spans(stream);
  if (spans.empty()) throw Error(ErrorCode::NoMeasureTokens, "stream has no new_measure tokens");
  const auto count = static_cast<int>(spans.size());
  if (section.start_measure < 1 || section.start_measure > section.end_measure ||
      section.end_measure > count) {
    throw Error(ErrorCode::MeasureOutOfRange,
                "measures " + std::to_string(section.start_measure) + ".." +
                    std::to_string(section.end_measure) + " outside 1.." + std::to_string(count));
  }
  const auto begin = spans[static_cast<std::size_t>(section.start_measure - 1)].begin;
  const auto end = spans[static_cast<std::size_t>(section.end_measure - 1)].end;

  TokenStream out;
  out.header = stream.header;
  out.body = filter_instrument_tokens(std::span(stream.body).subspan(begin, end - begin),
                                      target_instrument);
  return out;
}

std::vector<TokenStream> extract_solo(const TokenStream& stream, const SoloAnnotation& annotation) {
  std::vector<TokenStream> out;
  for (const auto& s : annotation.sections) {
    out.push_back(extract_section(stream, s, annotation.target_instrument));
  }
  return out;
}

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios) {
  const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double quota = r[j] * static_cast<double>(n);
    // Snap quotas within rounding noise of an integer.
    const double rounded = std::round(quota);
    const double q = std::fabs(quota - rounded) < 1e-9 ? rounded : quota;
    counts[j] = static_cast<std::size_t>(std::floor(q));
    frac[j] = q - std::floor(q);
    assigned += counts[j];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
  return counts;
}

CorpusSplit split(const CorpusIndex& corpus, const SplitRatios& ratios, std::uint64_t seed) {
  const double sum = ratios.train + ratios.val + ratios.test;
  if (std::fabs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.val < 0 || ratios.test < 0) {
    throw std::invalid_argument("split ratios must be non-negative and sum to 1");
  }
  const bool all_parts = ratios.train > 0 && ratios.val > 0 && ratios.test > 0;

  Rng rng(seed);
  std::vector<int> part(corpus.entries.size(), 0);
  for (const auto& label : corpus.labels()) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
      if (corpus.entries[i].artist_label == label) idx.push_back(i);
    }
    if (all_parts && idx.size() < 3) {
      throw Error(ErrorCode::TooFewSongs, label + " has " + std::to_string(idx.size()) + " song(s)");
    }
    // Fisher-Yates with rejection-sampled bounded draws.
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[uniform_below(rng, i)]);
    }
    const auto counts = split_counts(idx.size(), ratios);
    std::size_t k = 0;
    for (int p = 0; p < 3; ++p) {
      for (std::size_t c = 0; c < counts[static_cast<std::size_t>(p)]; ++c) part[idx[k++]] = p;
    }
  }

  CorpusSplit out;
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    auto& dst = part[i] == 0 ? out.train : part[i] == 1 ? out.val : out.test;
    dst.entries.push_back(corpus.entries[i]);
  }
  return out;
}

}  // namespace shredkit
