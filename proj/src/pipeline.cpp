#include "shredkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "shredkit/error.hpp"
#include "shredkit/log.hpp"
#include "shredkit/random.hpp"

namespace shredkit {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

Distribution pooled_durations(const std::vector<const TokenStream*>& streams) {
  Distribution d;
  for (const auto* s : streams) {
    const EventTimeline tl = decode_events(lead_view(*s));
    if (tl.pitched_count() > 0) d.merge(note_duration_distribution(tl));
  }
  d.sort_numeric();
  return d;
}

Distribution pooled_techniques(const std::vector<const TokenStream*>& streams) {
  Distribution d(std::vector<std::string>(kTechniques.begin(), kTechniques.end()));
  for (const auto* s : streams) d.merge(technique_distribution(lead_view(*s)));
  return d;
}

SongFeatures song_features(const CorpusEntry& entry) {
  SongFeatures f;
  f.path = entry.path;
  f.artist = entry.artist_label;
  const TokenStream view = lead_view(entry.stream);
  const EventTimeline tl = decode_events(view);
  f.notes = tl.pitched_count();
  if (f.notes == 0) return f;

  const Distribution durations = note_duration_distribution(tl);
  double weighted = 0.0;
  for (const auto& b : durations.bins()) weighted += std::stod(b.label) * b.count;
  f.mean_duration = weighted / durations.total();
  f.technique_rate = technique_distribution(view).total() / static_cast<double>(f.notes);
  const Distribution pc = pitch_class_histogram(tl);
  f.pce = pitch_class_entropy(pc);
  const ScaleResult sc = scale_consistency(pc);
  f.sc = sc.consistency;
  f.best_scale = sc.best_scale;
  return f;
}

std::vector<KWOutcome> song_level_kruskal_wallis(const std::vector<SongFeatures>& songs,
                                                 const std::vector<std::string>& artists) {
  using Getter = std::optional<double> SongFeatures::*;
  const std::vector<std::pair<std::string, Getter>> features = {
      {"durations", &SongFeatures::mean_duration},
      {"techniques", &SongFeatures::technique_rate},
      {"pce", &SongFeatures::pce},
      {"sc", &SongFeatures::sc}};

  std::vector<KWOutcome> out;
  for (const auto& [name, getter] : features) {
    KWOutcome o;
    o.feature = name;
    std::vector<std::vector<double>> groups;
    for (const auto& a : artists) {
      std::vector<double> g;
      for (const auto& s : songs) {
        if (s.artist == a && (s.*getter).has_value()) g.push_back(*(s.*getter));
      }
      o.group_sizes.push_back(g.size());
      if (!g.empty()) groups.push_back(std::move(g));
    }
    if (groups.size() < 2) {
      o.skipped = "need ≥2 groups";
    } else {
      try {
        o.result = kruskal_wallis(groups);
      } catch (const Error& e) {
        o.skipped = e.what();
      }
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::size_t KldMatrix::diagonal_hits() const {
  std::size_t hits = 0;
  for (const auto& r : rows) {
    if (!r.values.empty() && columns.at(r.best) == r.artist) ++hits;
  }
  return hits;
}

std::string KldMatrix::to_csv() const {
  std::ostringstream os;
  os << "artist,configuration";
  for (const auto& c : columns) os << ',' << c;
  os << ",best\n";
  for (const auto& r : rows) {
    os << r.artist << ',' << r.configuration;
    for (double v : r.values) os << ',' << format_number(v);
    os << ',' << columns.at(r.best) << '\n';
  }
  return os.str();
}

KldMatrix kld_table(const std::map<std::string, Distribution>& groundtruth,
                    const DistributionTable& generated, double epsilon) {
  KldMatrix m;
  for (const auto& [artist, d] : groundtruth) m.columns.push_back(artist);
  auto rank = [&](const std::pair<std::string, std::string>& k) {
    const auto a = std::find(m.columns.begin(), m.columns.end(), k.first) - m.columns.begin();
    const auto c = std::find(kConfigNames.begin(), kConfigNames.end(), k.second) - kConfigNames.begin();
    return std::tuple(a, k.first, c, k.second);
  };
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& [k, d] : generated) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), [&](const auto& x, const auto& y) { return rank(x) < rank(y); });

  for (const auto& k : keys) {
    KldRow row{k.first, k.second, {}, 0};
    for (const auto& c : m.columns) row.values.push_back(kld(groundtruth.at(c), generated.at(k), epsilon));
    row.best = static_cast<std::size_t>(std::min_element(row.values.begin(), row.values.end()) -
                                        row.values.begin());
    m.rows.push_back(std::move(row));
  }
  return m;
}

CorpusIndex training_view(const CorpusIndex& corpus, GenMode mode) {
  if (mode == GenMode::Multi) return corpus;
  CorpusIndex out = corpus;
  for (auto& e : out.entries) e.stream = lead_view(e.stream);
  return out;
}

CorpusIndex solo_corpus(const CorpusIndex& corpus, const std::vector<SoloAnnotation>& annotations,
                        std::vector<SkippedFile>* failures) {
  std::map<std::string, const CorpusEntry*> by_path;
  for (const auto& e : corpus.entries) by_path[e.path] = &e;
  CorpusIndex out;
  for (const auto& a : annotations) {
    auto it = by_path.find(a.song_path);
    if (it == by_path.end()) {
      if (failures) failures->push_back({a.song_path, "song not in corpus"});
      continue;
    }
    const auto stem = a.song_path.substr(0, a.song_path.size() - std::string(".tokens.txt").size());
    for (std::size_t k = 0; k < a.sections.size(); ++k) {
      try {
        TokenStream s = extract_section(it->second->stream, a.sections[k], a.target_instrument);
        out.entries.push_back({stem + "_solo" + std::to_string(k + 1) + ".tokens.txt",
                               it->second->artist_label, std::move(s), {}});
      } catch (const Error& e) {
        log().warn("{} section {}: {}", a.song_path, k + 1, e.what());
        if (failures) failures->push_back({a.song_path, e.what()});
      }
    }
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const CorpusEntry& x, const CorpusEntry& y) { return x.path < y.path; });
  return out;
}

std::map<std::string, std::vector<TokenStream>> generate_for_config(
    const StyleLM& model, const CorpusIndex& prompt_source, GenMode mode, PromptKind prompt, int n,
    std::uint64_t seed, const SamplingKnobs& knobs) {
  const std::string config = config_name(mode, prompt);
  std::map<std::string, std::vector<TokenStream>> out;
  for (const auto& artist : prompt_source.labels()) {
    std::vector<TokenStream> prompts;
    for (const auto* e : prompt_source.of_artist(artist)) {
      try {
        prompts.push_back(make_prompt(e->stream, prompt, artist));
      } catch (const Error& err) {
        log().info("{}: no {} prompt: {}", e->path, config, err.what());
      }
    }
    if (prompts.empty()) {
      throw Error(ErrorCode::TooShort, "no usable " + config + " prompt for " + artist);
    }
    auto& dst = out[artist];
    for (int i = 0; i < n; ++i) {
      GenerationConfig gc;
      gc.mode = mode;
      gc.prompt_kind = prompt;
      gc.max_tokens = knobs.max_tokens;
      gc.temperature = knobs.temperature;
      gc.top_k = knobs.top_k;
      gc.seed = derive_seed(seed, artist + "/" + config, static_cast<std::uint64_t>(i));
      dst.push_back(generate(model, prompts[static_cast<std::size_t>(i) % prompts.size()], artist, gc));
    }
  }
  return out;
}

nlohmann::json kw_to_json(const KWResult& r) {
  return {{"statistic", r.statistic}, {"df", r.df}, {"p", r.p}, {"tie_correction", r.tie_correction}};
}

}  // namespace shredkit
