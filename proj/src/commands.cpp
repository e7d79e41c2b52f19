#include "shredkit/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "shredkit/classify.hpp"
#include "shredkit/corpus.hpp"
#include "shredkit/error.hpp"
#include "shredkit/log.hpp"
#include "shredkit/musicology.hpp"
#include "shredkit/pipeline.hpp"
#include "shredkit/stats.hpp"
#include "shredkit/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace shredkit {

namespace {

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& file, const std::string& content) {
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  std::ofstream os(file, std::ios::binary);
  os << content;
  if (!os) throw IoFailure("cannot write " + file.string());
}

void write_json(const fs::path& file, const json& j) { write_file(file, j.dump(2) + "\n"); }

std::string read_text(const fs::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw IoFailure("cannot read " + file.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void require_directory(const fs::path& dir, const char* what) {
  if (!fs::is_directory(dir)) throw IoFailure(std::string(what) + " " + dir.string() + " is not a directory");
}

// Maps exceptions onto the exit-code contract.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

CorpusIndex ingest_logged(const fs::path& root, const LabelRule& rule = {}) {
  CorpusIndex idx = ingest(root, rule);
  for (const auto& s : idx.skipped) log().warn("skipped {}: {}", s.path, s.reason);
  return idx;
}

std::vector<const TokenStream*> streams_of(const CorpusIndex& idx, const std::string& artist) {
  std::vector<const TokenStream*> out;
  for (const auto* e : idx.of_artist(artist)) out.push_back(&e->stream);
  return out;
}

std::string distribution_csv(const std::vector<std::pair<std::string, Distribution>>& rows) {
  std::ostringstream os;
  os << "artist,bin,count,probability\n";
  for (const auto& [artist, d] : rows) {
    const double total = d.total();
    for (const auto& b : d.bins()) {
      os << artist << ',' << b.label << ',' << format_number(b.count) << ','
         << format_number(total > 0 ? b.count / total : 0.0) << '\n';
    }
  }
  return os.str();
}

std::string gnuplot_histogram(const std::string& csv, const std::string& title) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set title '" << title << "'\n"
     << "set style data histograms\nset style fill solid 0.8\nset key outside\n"
     << "set ylabel 'probability'\nset xtics rotate by -45\n"
     << "artists = system(\"tail -n +2 " << csv << " | cut -d, -f1 | uniq\")\n"
     << "plot for [a in artists] '< grep \"^'.a.',\" " << csv
     << "' using 4:xtic(2) title a\n";
  return os.str();
}

std::string gnuplot_heatmap(const std::string& csv, const std::string& title, std::size_t cols) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set title '" << title << "'\n"
     << "unset key\nset view map\n"
     << "plot '" << csv << "' matrix rowheaders columnheaders every ::2::" << cols + 1
     << " with image\n";
  return os.str();
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

json sampling_json(double temperature, const std::optional<int>& top_k) {
  return {{"temperature", temperature}, {"top_k", top_k ? json(*top_k) : json(nullptr)}};
}

json lm_json(const StyleLMConfig& c) {
  return {{"order", c.order}, {"lambda", c.lambda}, {"add_k", c.add_k}, {"backoff", c.backoff}};
}

RunManifest make_manifest(std::string command, json config,
                          std::optional<std::uint64_t> seed = std::nullopt) {
  RunManifest m;
  m.command = std::move(command);
  m.config = std::move(config);
  m.seed = seed;
  return m;
}

}  // namespace

json RunManifest::to_json() const {
  return {{"command", command},
          {"config", config},
          {"seed", seed ? json(*seed) : json(nullptr)},
          {"inputs", inputs},
          {"version", version},
          {"timestamp", timestamp}};
}

void write_manifest(const fs::path& dir, RunManifest manifest) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  manifest.timestamp = buf;
  write_json(dir / "manifest.json", manifest.to_json());
}

int cmd_validate(const std::vector<fs::path>& files, std::ostream& err) {
  int rc = kExitOk;
  for (const auto& f : files) {
    std::string text;
    try {
      text = read_text(f);
    } catch (const IoFailure& e) {
      err << f.string() << ": " << e.what() << '\n';
      rc = kExitIo;
      continue;
    }
    const TokenStream s = parse_stream(text);
    const auto violations = validate(s);
    for (const auto& v : violations) {
      err << f.string() << ':' << v.token_index << ": "
          << (v.severity == Severity::Warning ? "warning: " : "") << v.message << '\n';
    }
    if (error_count(violations) > 0 && rc == kExitOk) rc = kExitDomain;
  }
  return rc;
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& err) {
  return guarded(err, [&] {
    require_directory(opt.corpus, "corpus");
    LabelRule rule;
    if (opt.manifest) rule.manifest = load_manifest(*opt.manifest);
    const CorpusIndex corpus = ingest_logged(opt.corpus, rule);
    const auto artists = corpus.labels();

    std::vector<std::pair<std::string, Distribution>> durations, techniques, pitch_classes;
    for (const auto& a : artists) {
      const auto streams = streams_of(corpus, a);
      durations.emplace_back(a, pooled_durations(streams));
      techniques.emplace_back(a, pooled_techniques(streams));
      Distribution pc(std::vector<std::string>(kPitchClassNames.begin(), kPitchClassNames.end()));
      for (const auto* s : streams) {
        const EventTimeline tl = decode_events(lead_view(*s));
        if (tl.pitched_count() > 0) pc.merge(pitch_class_histogram(tl));
      }
      pitch_classes.emplace_back(a, std::move(pc));
    }
    write_file(opt.out / "durations.csv", distribution_csv(durations));
    write_file(opt.out / "techniques.csv", distribution_csv(techniques));
    write_file(opt.out / "pitch_classes.csv", distribution_csv(pitch_classes));

    std::vector<SongFeatures> songs;
    std::ostringstream sc;
    sc << "path,artist,notes,mean_duration,technique_rate,pce,sc,best_scale\n";
    for (const auto& e : corpus.entries) {
      songs.push_back(song_features(e));
      const auto& f = songs.back();
      sc << f.path << ',' << f.artist << ',' << f.notes << ',' << opt_number(f.mean_duration) << ','
         << opt_number(f.technique_rate) << ',' << opt_number(f.pce) << ',' << opt_number(f.sc) << ','
         << (f.best_scale ? to_string(*f.best_scale) : "") << '\n';
    }
    write_file(opt.out / "songs.csv", sc.str());

    std::ostringstream ps;
    ps << "artist,feature,n,mean,median,std,min,max\n";
    for (const auto& a : artists) {
      for (const auto& [name, getter] : {std::pair{"pce", &SongFeatures::pce}, std::pair{"sc", &SongFeatures::sc}}) {
        std::vector<double> v;
        for (const auto& f : songs) {
          if (f.artist == a && (f.*getter)) v.push_back(*(f.*getter));
        }
        ps << a << ',' << name << ',' << v.size();
        if (v.empty()) {
          ps << ",,,,,\n";
          continue;
        }
        const Descriptive d = descriptive(v);
        ps << ',' << format_number(d.mean) << ',' << format_number(d.median) << ','
           << format_number(d.std) << ',' << format_number(d.min) << ',' << format_number(d.max) << '\n';
      }
    }
    write_file(opt.out / "pce_sc_summary.csv", ps.str());

    std::vector<std::pair<std::string, TokenStream>> pairs;
    for (const auto& e : corpus.entries) pairs.emplace_back(e.artist_label, e.stream);
    std::ostringstream ts;
    ts << "artist,avg_tempo,num_songs,num_notes,num_fx\n";
    for (const auto& row : corpus_summary(pairs, artists)) {
      ts << row.artist << ',' << (row.avg_tempo ? std::to_string(*row.avg_tempo) : "") << ','
         << row.num_songs << ',' << row.num_notes << ',' << row.num_fx << '\n';
    }
    write_file(opt.out / "summary.csv", ts.str());

    json kw = {{"unit", "song"},
               {"view", "lead instrument"},
               {"technique_counting", "per token"},
               {"features",
                {{"durations", "mean inter-onset ticks"},
                 {"techniques", "technique tokens per note"},
                 {"pce", "pitch-class entropy (bits)"},
                 {"sc", "scale consistency"}}},
               {"groups", artists},
               {"tests", json::object()}};
    for (const auto& o : song_level_kruskal_wallis(songs, artists)) {
      json t = o.result ? kw_to_json(*o.result) : json{{"skipped", o.skipped}};
      t["group_sizes"] = o.group_sizes;
      kw["tests"][o.feature] = t;
    }
    write_json(opt.out / "kruskal_wallis.json", kw);

    if (opt.emit_gnuplot) {
      write_file(opt.out / "plot_durations.gp", gnuplot_histogram("durations.csv", "Note durations"));
      write_file(opt.out / "plot_techniques.gp", gnuplot_histogram("techniques.csv", "Techniques"));
      write_file(opt.out / "plot_pitch_classes.gp",
                 gnuplot_histogram("pitch_classes.csv", "Pitch classes"));
    }

    RunManifest m = make_manifest("analyze", {{"emit_gnuplot", opt.emit_gnuplot}, {"view", "lead instrument"},
                              {"kw_unit", "song"},
                              {"technique_counting", "per token"}});
    m.inputs = {opt.corpus.string()};
    if (opt.manifest) m.inputs.push_back(opt.manifest->string());
    write_manifest(opt.out, m);
    return kExitOk;
  });
}

int cmd_compare(const CompareOptions& opt, std::ostream& err) {
  return guarded(err, [&] {
    require_directory(opt.groundtruth, "groundtruth");
    require_directory(opt.generated, "generated");
    std::vector<std::string> missing;
    for (const char* c : kConfigNames) {
      if (!fs::is_directory(opt.generated / c)) missing.emplace_back(c);
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      err << "error: missing configuration(s): " << list << '\n';
      return kExitDomain;
    }

    const CorpusIndex gt = ingest_logged(opt.groundtruth);
    std::map<std::string, Distribution> gt_dur, gt_tech;
    for (const auto& a : gt.labels()) {
      const auto s = streams_of(gt, a);
      gt_dur[a] = pooled_durations(s);
      gt_tech[a] = pooled_techniques(s);
    }
    DistributionTable gen_dur, gen_tech;
    for (const char* c : kConfigNames) {
      const CorpusIndex gen = ingest_logged(opt.generated / c);
      for (const auto& a : gen.labels()) {
        const auto s = streams_of(gen, a);
        gen_dur[{a, c}] = pooled_durations(s);
        gen_tech[{a, c}] = pooled_techniques(s);
      }
    }
    const KldMatrix dur = kld_table(gt_dur, gen_dur, opt.epsilon);
    const KldMatrix tech = kld_table(gt_tech, gen_tech, opt.epsilon);
    write_file(opt.out / "kld_durations.csv", dur.to_csv());
    write_file(opt.out / "kld_techniques.csv", tech.to_csv());
    write_json(opt.out / "compare.json",
               {{"epsilon", opt.epsilon},
                {"direction", "KL(groundtruth || generated), bits"},
                {"view", "lead instrument"},
                {"rows", dur.rows.size()},
                {"durations_diagonal_best", dur.diagonal_hits()},
                {"techniques_diagonal_best", tech.diagonal_hits()}});
    if (opt.emit_gnuplot) {
      write_file(opt.out / "plot_kld_durations.gp",
                 gnuplot_heatmap("kld_durations.csv", "KLD note durations", dur.columns.size()));
      write_file(opt.out / "plot_kld_techniques.gp",
                 gnuplot_heatmap("kld_techniques.csv", "KLD techniques", tech.columns.size()));
    }
    RunManifest m = make_manifest("compare", {{"epsilon", opt.epsilon}, {"emit_gnuplot", opt.emit_gnuplot}});
    m.inputs = {opt.groundtruth.string(), opt.generated.string()};
    write_manifest(opt.out, m);
    return kExitOk;
  });
}

int cmd_extract_solos(const ExtractOptions& opt, std::ostream& err) {
  return guarded(err, [&] {
    require_directory(opt.corpus, "corpus");
    const std::string text = read_text(opt.annotations);
    std::vector<SoloAnnotation> annotations;
    try {
      annotations = parse_annotations(text);
    } catch (const std::exception& e) {
      throw IoFailure("bad annotation file " + opt.annotations.string() + ": " + e.what());
    }
    const CorpusIndex corpus = ingest_logged(opt.corpus);
    std::vector<SkippedFile> failures;
    const CorpusIndex solos = solo_corpus(corpus, annotations, &failures);
    for (const auto& f : failures) err << f.path << ": " << f.reason << '\n';

    std::map<std::string, std::size_t> per_artist;
    for (const auto& e : solos.entries) {
      const fs::path name = fs::path(e.path).filename();
      write_file(opt.out / e.artist_label / name, serialize(e.stream) + "\n");
      ++per_artist[e.artist_label];
    }
    std::size_t requested = 0;
    for (const auto& a : annotations) requested += a.sections.size();
    json failed = json::array();
    for (const auto& f : failures) failed.push_back({{"path", f.path}, {"reason", f.reason}});
    write_json(opt.out / "solos_summary.json", {{"annotations", annotations.size()},
                                                {"sections_requested", requested},
                                                {"extracted", solos.entries.size()},
                                                {"per_artist", per_artist},
                                                {"failed", failed}});
    RunManifest m = make_manifest("extract-solos", json::object());
    m.inputs = {opt.corpus.string(), opt.annotations.string()};
    write_manifest(opt.out, m);
    if (solos.entries.empty()) {
      err << "error: no sections extracted\n";
      return kExitDomain;
    }
    return kExitOk;
  });
}

int cmd_train_generate(const TrainGenerateOptions& opt, std::ostream& err) {
  return guarded(err, [&] {
    require_directory(opt.corpus, "corpus");
    if (opt.n < 0) throw std::invalid_argument("--n must be non-negative");
    const CorpusIndex corpus = training_view(ingest_logged(opt.corpus), opt.mode);
    const StyleLM model = StyleLM::train(corpus, opt.lm);
    const std::string config = config_name(opt.mode, opt.prompt);
    const fs::path dir = opt.out / config;

    SamplingKnobs knobs{opt.temperature, opt.top_k, opt.max_tokens};
    const auto generated = generate_for_config(model, corpus, opt.mode, opt.prompt, opt.n, opt.seed, knobs);
    for (const auto& [artist, streams] : generated) {
      for (std::size_t i = 0; i < streams.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "gen_%03zu.tokens.txt", i + 1);
        write_file(dir / artist / name, serialize(streams[i]) + "\n");
      }
    }
    write_json(dir / "model.json", model.to_json());

    GenerationConfig probe;
    probe.mode = opt.mode;
    probe.max_tokens = opt.max_tokens;
    json cfg = {{"configuration", config},
                {"mode", opt.mode == GenMode::Multi ? "multi" : "solo"},
                {"prompt", opt.prompt == PromptKind::Full ? "full" : "empty"},
                {"n", opt.n},
                {"token_budget", probe.budget()},
                {"lm", lm_json(opt.lm)},
                {"sampling", sampling_json(opt.temperature, opt.top_k)},
                {"grammar_mask", true},
                {"training_view", opt.mode == GenMode::Multi ? "full streams" : "lead instrument"},
                {"empty_prompt", "first note of each prompting song"},
                {"seed_derivation", "derive_seed(seed, artist/config, index)"}};
    RunManifest m = make_manifest("train-generate", cfg, opt.seed);
    m.inputs = {opt.corpus.string()};
    write_manifest(dir, m);
    return kExitOk;
  });
}

namespace {

std::string confusion_csv(const Evaluation& ev) {
  std::ostringstream os;
  os << "true\\predicted";
  for (const auto& a : ev.artists) os << ',' << a;
  os << '\n';
  for (std::size_t i = 0; i < ev.artists.size(); ++i) {
    os << ev.artists[i];
    for (long c : ev.confusion[i]) os << ',' << c;
    os << '\n';
  }
  return os.str();
}

json evaluation_json(const Evaluation& ev) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ev.artists.size(); ++i) correct += static_cast<std::size_t>(ev.confusion[i][i]);
  return {{"accuracy", ev.accuracy}, {"correct", correct}, {"total", ev.total}, {"artists", ev.artists}};
}

}  // namespace

int cmd_classify(const ClassifyOptions& opt, std::ostream& err) {
  return guarded(err, [&] {
    require_directory(opt.corpus, "corpus");
    if (opt.eval) require_directory(*opt.eval, "evaluation root");
    const CorpusIndex corpus = ingest_logged(opt.corpus);
    const SplitRatios ratios;
    const CorpusSplit parts = split(corpus, ratios, opt.seed);
    const NBModel model = train_nb(parts.train, {.alpha = opt.alpha});
    const Evaluation ev = evaluate(model, parts.test);

    json acc = evaluation_json(ev);
    acc["split"] = {{"train", parts.train.entries.size()},
                    {"val", parts.val.entries.size()},
                    {"test", parts.test.entries.size()}};
    write_json(opt.out / "accuracy.json", acc);
    write_file(opt.out / "confusion.csv", confusion_csv(ev));
    write_json(opt.out / "model.json", model.to_json());

    if (opt.eval) {
      bool has_configs = false;
      for (const char* c : kConfigNames) has_configs = has_configs || fs::is_directory(*opt.eval / c);
      if (has_configs) {
        GeneratedCorpora gen;
        for (const char* c : kConfigNames) {
          if (!fs::is_directory(*opt.eval / c)) {
            log().warn("evaluation root has no {} configuration", c);
            continue;
          }
          const CorpusIndex idx = ingest_logged(*opt.eval / c);
          for (const auto& e : idx.entries) gen[{e.artist_label, c}].push_back(e.stream);
        }
        const ScoreMatrix sm = score_table(model, gen);
        write_file(opt.out / "scores.csv", sm.to_csv());
        write_json(opt.out / "scores.json", {{"rows", sm.rows.size()}, {"diagonal_max", sm.diagonal_hits()}});
      } else {
        const Evaluation held = evaluate(model, ingest_logged(*opt.eval));
        write_json(opt.out / "eval_accuracy.json", evaluation_json(held));
        write_file(opt.out / "eval_confusion.csv", confusion_csv(held));
      }
    }

    RunManifest m = make_manifest("classify",
                  {{"alpha", opt.alpha},
                   {"split", {ratios.train, ratios.val, ratios.test}},
                   {"features", "wait, note, nfx, bfx unigrams"},
                   {"view", "lead instrument"}},
                  opt.seed);
    m.inputs = {opt.corpus.string()};
    if (opt.eval) m.inputs.push_back(opt.eval->string());
    write_manifest(opt.out, m);
    return kExitOk;
  });
}

int cmd_synth(const SynthCommandOptions& opt, std::ostream& err) {
  return guarded(err, [&] {
    SynthOptions so;
    so.songs_per_artist = opt.songs_per_artist;
    so.measures = opt.measures;
    so.seed = opt.seed;
    write_synth_corpus(synth_corpus(so), opt.out);
    RunManifest m = make_manifest("synth", {{"songs_per_artist", so.songs_per_artist}, {"measures", so.measures}}, opt.seed);
    write_manifest(opt.out, m);
    return kExitOk;
  });
}

int cmd_report(const ReportOptions& opt, std::ostream& err) {
  if (int rc = cmd_analyze({opt.corpus, opt.out / "analysis", std::nullopt, opt.emit_gnuplot}, err)) {
    return rc;
  }
  if (int rc = cmd_extract_solos({opt.corpus, opt.annotations, opt.out / "solos"}, err)) return rc;
  for (GenMode mode : {GenMode::Multi, GenMode::Solo}) {
    for (PromptKind prompt : {PromptKind::Full, PromptKind::Empty}) {
      TrainGenerateOptions tg;
      tg.corpus = mode == GenMode::Multi ? opt.corpus : opt.out / "solos";
      tg.out = opt.out / "generated";
      tg.mode = mode;
      tg.prompt = prompt;
      tg.n = opt.n;
      tg.seed = opt.seed;
      tg.lm = opt.lm;
      tg.temperature = opt.temperature;
      tg.top_k = opt.top_k;
      if (int rc = cmd_train_generate(tg, err)) return rc;
    }
  }
  if (int rc = cmd_compare({opt.corpus, opt.out / "generated", opt.out / "compare", opt.epsilon,
                            opt.emit_gnuplot},
                           err)) {
    return rc;
  }
  if (int rc = cmd_classify({opt.corpus, opt.out / "generated", opt.out / "classify", opt.alpha, opt.seed},
                            err)) {
    return rc;
  }
  return guarded(err, [&] {
    RunManifest m = make_manifest("report",
                  {{"n", opt.n},
                   {"lm", lm_json(opt.lm)},
                   {"sampling", sampling_json(opt.temperature, opt.top_k)},
                   {"alpha", opt.alpha},
                   {"epsilon", opt.epsilon}},
                  opt.seed);
    m.inputs = {opt.corpus.string(), opt.annotations.string()};
    write_manifest(opt.out, m);
    return kExitOk;
  });
}

}  // namespace shredkit
