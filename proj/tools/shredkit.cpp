#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "shredkit/commands.hpp"

namespace fs = std::filesystem;
using namespace shredkit;

int main(int argc, char** argv) {
  CLI::App app{"shredkit: DadaGP guitar-tab token analysis, generation and classification"};
  app.set_version_flag("--version", SHREDKIT_VERSION);
  app.require_subcommand(1);
  int rc = kExitOk;

  std::vector<fs::path> validate_files;
  auto* validate = app.add_subcommand("validate", "Check token files against the grammar");
  validate->add_option("files", validate_files, "Token files")->required();
  validate->callback([&] { rc = cmd_validate(validate_files, std::cerr); });

  AnalyzeOptions an;
  std::string an_manifest;
  auto* analyze = app.add_subcommand("analyze", "Per-artist feature distributions and Kruskal-Wallis tests");
  analyze->add_option("--corpus", an.corpus, "Corpus root (<artist>/<song>.tokens.txt)")->required();
  analyze->add_option("--out", an.out, "Output directory")->required();
  analyze->add_option("--manifest", an_manifest, "JSON path -> artist label overrides");
  analyze->add_flag("--emit-gnuplot", an.emit_gnuplot, "Also write gnuplot scripts");
  analyze->callback([&] {
    if (!an_manifest.empty()) an.manifest = an_manifest;
    rc = cmd_analyze(an, std::cerr);
  });

  CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "KLD matrices between groundtruth and generated corpora");
  compare->add_option("--corpus", cmp.groundtruth, "Groundtruth corpus root")->required();
  compare->add_option("--generated", cmp.generated, "Root holding M-FP, M-EP, S-FP, S-EP")->required();
  compare->add_option("--out", cmp.out, "Output directory")->required();
  compare->add_option("--epsilon", cmp.epsilon, "Additive smoothing")->capture_default_str();
  compare->add_flag("--emit-gnuplot", cmp.emit_gnuplot, "Also write gnuplot scripts");
  compare->callback([&] { rc = cmd_compare(cmp, std::cerr); });

  ExtractOptions ex;
  auto* extract = app.add_subcommand("extract-solos", "Cut annotated solo sections");
  extract->add_option("--corpus", ex.corpus, "Corpus root")->required();
  extract->add_option("--annotations", ex.annotations, "Solo annotation JSON")->required();
  extract->add_option("--out", ex.out, "Output directory")->required();
  extract->callback([&] { rc = cmd_extract_solos(ex, std::cerr); });

  TrainGenerateOptions tg;
  std::string mode = "multi", prompt = "full";
  int top_k = 0, max_tokens = 0;
  auto* train = app.add_subcommand("train-generate", "Train the conditioned n-gram model and generate");
  train->add_option("--corpus", tg.corpus, "Training corpus root")->required();
  train->add_option("--out", tg.out, "Output root; files go to <out>/<CONFIG>/<artist>/")->required();
  train->add_option("--mode", mode, "multi or solo")
      ->check(CLI::IsMember({"multi", "solo"}))
      ->capture_default_str();
  train->add_option("--prompt", prompt, "full or empty")
      ->check(CLI::IsMember({"full", "empty"}))
      ->capture_default_str();
  train->add_option("--n", tg.n, "Generations per artist")->capture_default_str();
  train->add_option("--seed", tg.seed, "Base seed")->capture_default_str();
  train->add_option("--order", tg.lm.order, "n-gram order")->check(CLI::Range(1, 16))->capture_default_str();
  train->add_option("--lambda", tg.lm.lambda, "Artist mixture weight")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train->add_option("--temperature", tg.temperature, "Sampling temperature")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--top-k", top_k, "Keep the k most likely tokens (0 = off)")->check(CLI::NonNegativeNumber);
  train->add_option("--max-tokens", max_tokens, "Token budget (0 = 256 solo / 2048 multi)")
      ->check(CLI::NonNegativeNumber);
  train->callback([&] {
    tg.mode = mode == "solo" ? GenMode::Solo : GenMode::Multi;
    tg.prompt = prompt == "empty" ? PromptKind::Empty : PromptKind::Full;
    if (top_k > 0) tg.top_k = top_k;
    if (max_tokens > 0) tg.max_tokens = max_tokens;
    rc = cmd_train_generate(tg, std::cerr);
  });

  ClassifyOptions cl;
  std::string cl_eval;
  auto* classify = app.add_subcommand("classify", "Naive Bayes artist classifier and score tables");
  classify->add_option("--corpus", cl.corpus, "Labelled corpus root (split 55/20/25)")->required();
  classify->add_option("--eval", cl_eval, "Generated root (M-FP, ...) or a labelled corpus");
  classify->add_option("--out", cl.out, "Output directory")->required();
  classify->add_option("--alpha", cl.alpha, "Laplace smoothing")->check(CLI::PositiveNumber)->capture_default_str();
  classify->add_option("--seed", cl.seed, "Split seed")->capture_default_str();
  classify->callback([&] {
    if (!cl_eval.empty()) cl.eval = cl_eval;
    rc = cmd_classify(cl, std::cerr);
  });

  SynthCommandOptions sy;
  auto* synth = app.add_subcommand("synth", "Write the four-player synthetic fixture corpus");
  synth->add_option("--out", sy.out, "Output directory")->required();
  synth->add_option("--n", sy.songs_per_artist, "Songs per artist")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--measures", sy.measures, "Measures per song")->check(CLI::Range(4, 512))->capture_default_str();
  synth->add_option("--seed", sy.seed, "Seed")->capture_default_str();
  synth->callback([&] { rc = cmd_synth(sy, std::cerr); });

  ReportOptions rp;
  auto* report = app.add_subcommand("report", "Run analyze, extract-solos, all four generations, compare and classify");
  report->add_option("--corpus", rp.corpus, "Corpus root")->required();
  report->add_option("--annotations", rp.annotations, "Solo annotation JSON")->required();
  report->add_option("--out", rp.out, "Output directory")->required();
  report->add_option("--n", rp.n, "Generations per artist and configuration")->capture_default_str();
  report->add_option("--seed", rp.seed, "Base seed")->capture_default_str();
  report->add_option("--order", rp.lm.order, "n-gram order")->check(CLI::Range(1, 16))->capture_default_str();
  report->add_option("--lambda", rp.lm.lambda, "Artist mixture weight")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  report->add_option("--temperature", rp.temperature, "Sampling temperature")->check(CLI::PositiveNumber)->capture_default_str();
  report->add_option("--alpha", rp.alpha, "Laplace smoothing")->check(CLI::PositiveNumber)->capture_default_str();
  report->add_option("--epsilon", rp.epsilon, "KLD smoothing")->capture_default_str();
  report->add_flag("--emit-gnuplot", rp.emit_gnuplot, "Also write gnuplot scripts");
  report->callback([&] { rc = cmd_report(rp, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIo;
  }
  return rc;
}
