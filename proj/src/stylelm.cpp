#include "shredkit/stylelm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "shredkit/error.hpp"

namespace shredkit {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

std::vector<std::string> reserved_tokens() {
  return {"start", "end", std::string(Vocab::kUnknownText)};
}

}  // namespace

Vocab::Vocab() : tokens_(reserved_tokens()) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    ids_[tokens_[i]] = static_cast<int>(i);
    parsed_.push_back(parse_token(tokens_[i]));
  }
}

Vocab Vocab::build(std::vector<std::string> tokens) {
  Vocab v;
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  for (auto& t : tokens) {
    if (v.ids_.contains(t)) continue;
    v.ids_[t] = static_cast<int>(v.tokens_.size());
    v.parsed_.push_back(parse_token(t));
    v.tokens_.push_back(std::move(t));
  }
  return v;
}

int Vocab::id(std::string_view token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnknown : it->second;
}

bool Vocab::contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }

StyleLM StyleLM::train(const CorpusIndex& corpus, const StyleLMConfig& config) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot train on an empty corpus");
  std::vector<Sequence> sequences;
  sequences.reserve(corpus.entries.size());
  for (const auto& e : corpus.entries) {
    auto s = inject_artist_token(e.stream, e.artist_label);
    s.has_start = true;
    s.has_end = true;
    sequences.emplace_back(e.artist_label, to_words(s));
  }
  return train_sequences(sequences, config);
}

StyleLM StyleLM::train_sequences(const std::vector<Sequence>& sequences,
                                 const StyleLMConfig& config) {
  if (sequences.empty()) throw Error(ErrorCode::EmptyCorpus, "no training sequences");
  if (config.order < 1) throw std::invalid_argument("n-gram order must be >= 1");
  if (config.lambda < 0.0 || config.lambda > 1.0) throw std::invalid_argument("lambda outside [0,1]");
  if (!(config.add_k > 0.0)) throw std::invalid_argument("add_k must be positive");

  StyleLM model;
  model.config_ = config;
  std::vector<std::string> all;
  for (const auto& [artist, words] : sequences) {
    if (artist.empty()) throw std::invalid_argument("training sequence without artist label");
    all.insert(all.end(), words.begin(), words.end());
    model.artists_.push_back(artist);
  }
  model.vocab_ = Vocab::build(std::move(all));
  std::sort(model.artists_.begin(), model.artists_.end());
  model.artists_.erase(std::unique(model.artists_.begin(), model.artists_.end()),
                       model.artists_.end());

  const auto max_ctx = static_cast<std::size_t>(config.order - 1);
  for (const auto& [artist, words] : sequences) {
    const auto ids = model.encode(words);
    auto& table = model.per_artist_[artist];
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto longest = std::min(max_ctx, i);
      for (std::size_t len = 0; len <= longest; ++len) {
        std::vector<int> ctx(ids.begin() + static_cast<long>(i - len),
                             ids.begin() + static_cast<long>(i));
        for (NgramTable* t : {&table, &model.global_}) {
          auto& cc = (*t)[ctx];
          cc.total += 1.0;
          cc.next[ids[i]] += 1.0;
        }
      }
    }
  }
  model.finalize();
  return model;
}

void StyleLM::finalize() {
  const auto v = vocab_.size();
  auto unigram = [&](const NgramTable& table) {
    std::vector<double> u(v, 0.0);
    double total = 0.0;
    if (auto it = table.find({}); it != table.end()) {
      for (const auto& [id, c] : it->second.next) u[static_cast<std::size_t>(id)] = c;
      total = it->second.total;
    }
    const double z = total + config_.add_k * static_cast<double>(v);
    for (auto& x : u) x = (x + config_.add_k) / z;
    return u;
  };
  global_unigram_ = unigram(global_);
  artist_unigram_.clear();
  for (const auto& [artist, table] : per_artist_) artist_unigram_[artist] = unigram(table);
}

std::vector<int> StyleLM::encode(std::span<const std::string> words) const {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(vocab_.id(w));
  return ids;
}

bool StyleLM::has_artist(std::string_view artist) const {
  return per_artist_.find(artist) != per_artist_.end();
}

const NgramTable& StyleLM::artist_table(std::string_view artist) const {
  auto it = per_artist_.find(artist);
  if (it == per_artist_.end()) throw Error(ErrorCode::UnknownArtist, std::string(artist));
  return it->second;
}

std::vector<double> StyleLM::component(const NgramTable& table, const std::vector<double>& unigram,
                                       std::span<const int> context) const {
  const auto max_ctx = std::min(static_cast<std::size_t>(config_.order - 1), context.size());
  std::vector<const ContextCounts*> levels(max_ctx + 1, nullptr);
  std::size_t longest = 0;
  for (std::size_t len = 1; len <= max_ctx; ++len) {
    std::vector<int> ctx(context.end() - static_cast<long>(len), context.end());
    auto it = table.find(ctx);
    if (it == table.end() || it->second.total <= 0.0) break;
    levels[len] = &it->second;
    longest = len;
  }

  std::vector<double> s(unigram);
  const double base_scale = std::pow(config_.backoff, static_cast<double>(longest));
  for (auto& x : s) x *= base_scale;
  for (std::size_t len = 1; len <= longest; ++len) {
    const auto& cc = *levels[len];
    const double scale = std::pow(config_.backoff, static_cast<double>(longest - len));
    for (const auto& [id, c] : cc.next) s[static_cast<std::size_t>(id)] = scale * c / cc.total;
  }
  const double z = std::accumulate(s.begin(), s.end(), 0.0);
  for (auto& x : s) x /= z;
  return s;
}

std::vector<double> StyleLM::distribution(std::span<const int> context,
                                          std::string_view artist) const {
  auto global = component(global_, global_unigram_, context);
  if (artist == kGlobalArtist) return global;
  auto it = per_artist_.find(artist);
  if (it == per_artist_.end()) throw Error(ErrorCode::UnknownArtist, std::string(artist));
  const auto mine = component(it->second, artist_unigram_.find(artist)->second, context);
  const double lambda = config_.lambda;
  for (std::size_t i = 0; i < global.size(); ++i) {
    global[i] = lambda * mine[i] + (1.0 - lambda) * global[i];
  }
  return global;
}

double StyleLM::prob(std::span<const std::string> context, std::string_view token,
                     std::string_view artist) const {
  const auto ids = encode(context);
  return distribution(ids, artist)[static_cast<std::size_t>(vocab_.id(token))];
}

namespace {

json table_to_json(const NgramTable& table) {
  json rows = json::array();
  for (const auto& [ctx, cc] : table) {
    json next = json::array();
    for (const auto& [id, c] : cc.next) next.push_back({id, c});
    rows.push_back({{"ctx", ctx}, {"next", next}});
  }
  return rows;
}

NgramTable table_from_json(const json& rows) {
  NgramTable table;
  for (const auto& row : rows) {
    auto& cc = table[row.at("ctx").get<std::vector<int>>()];
    for (const auto& pair : row.at("next")) {
      const double c = pair.at(1).get<double>();
      cc.next[pair.at(0).get<int>()] = c;
      cc.total += c;
    }
  }
  return table;
}

}  // namespace

json StyleLM::to_json() const {
  json tables = json::object();
  for (const auto& [artist, table] : per_artist_) tables[artist] = table_to_json(table);
  return {
      {"format", "shredkit.stylelm"},
      {"version", kModelFormatVersion},
      {"order", config_.order},
      {"lambda", config_.lambda},
      {"add_k", config_.add_k},
      {"backoff", config_.backoff},
      {"vocab", vocab_.tokens()},
      {"global", table_to_json(global_)},
      {"artists", tables},
  };
}

StyleLM StyleLM::from_json(const json& j) {
  try {
    if (j.at("format") != "shredkit.stylelm" || j.at("version") != kModelFormatVersion) {
      throw Error(ErrorCode::BadModelFile, "not a version 1 style model");
    }
    StyleLM m;
    m.config_ = {j.at("order").get<int>(), j.at("lambda").get<double>(), j.at("add_k").get<double>(),
                 j.at("backoff").get<double>()};
    auto tokens = j.at("vocab").get<std::vector<std::string>>();
    if (tokens.size() < 3 || tokens[0] != "start" || tokens[1] != "end" ||
        tokens[2] != Vocab::kUnknownText) {
      throw Error(ErrorCode::BadModelFile, "vocab lacks reserved tokens");
    }
    m.vocab_ = Vocab::build(std::vector<std::string>(tokens.begin() + 3, tokens.end()));
    if (m.vocab_.tokens() != tokens) throw Error(ErrorCode::BadModelFile, "vocab not canonical");
    m.global_ = table_from_json(j.at("global"));
    for (const auto& [artist, rows] : j.at("artists").items()) {
      m.per_artist_[artist] = table_from_json(rows);
      m.artists_.push_back(artist);
    }
    m.finalize();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadModelFile, e.what());
  }
}

void StyleLM::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << to_json().dump() << '\n';
}

StyleLM StyleLM::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadModelFile, e.what());
  }
}

bool StyleLM::operator==(const StyleLM& o) const {
  return config_.order == o.config_.order && config_.lambda == o.config_.lambda &&
         config_.add_k == o.config_.add_k && config_.backoff == o.config_.backoff &&
         vocab_ == o.vocab_ && artists_ == o.artists_ && global_ == o.global_ &&
         per_artist_ == o.per_artist_;
}

void GrammarState::advance(const Token& t) {
  if (is<tok::Wait>(t)) {
    note_in_beat = false;
  } else if (is_note_like(t)) {
    note_in_beat = true;
  }
}

GrammarState GrammarState::after(std::span<const Token> body) {
  GrammarState g;
  for (const auto& t : body) g.advance(t);
  return g;
}

bool grammar_allows(const Token& t, const GrammarState& state) {
  if (is_effect(t)) return state.note_in_beat;
  if (auto* w = std::get_if<tok::Wait>(&t)) return w->ticks > 0;
  if (is<tok::Start>(t) || is<tok::Artist>(t) || is<tok::Downtune>(t) || is<tok::Tempo>(t)) {
    return false;
  }
  if (auto* u = std::get_if<tok::Unknown>(&t)) return u->raw != Vocab::kUnknownText;
  return true;
}

std::vector<double> sampling_distribution(const StyleLM& model, std::span<const int> context,
                                          std::string_view artist, const SamplingParams& params,
                                          const GrammarState& grammar) {
  if (!(params.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  const auto& vocab = model.vocab();
  auto p = model.distribution(context, artist);

  std::vector<double> masked(p.size(), 0.0);
  bool any = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (grammar_allows(vocab.parsed(static_cast<int>(i)), grammar)) {
      masked[i] = p[i];
      any = any || p[i] > 0.0;
    }
  }
  if (!any) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& t = vocab.parsed(static_cast<int>(i));
      if (auto* w = std::get_if<tok::Wait>(&t); w && w->ticks > 0) {
        masked[i] = p[i];
        any = true;
      }
    }
    if (!any) masked[Vocab::kEnd] = 1.0;
  }

  // Temperature in log space so tiny temperatures approach argmax cleanly.
  double max_log = -std::numeric_limits<double>::infinity();
  for (double x : masked) {
    if (x > 0.0) max_log = std::max(max_log, std::log(x) / params.temperature);
  }
  std::vector<double> w(masked.size(), 0.0);
  for (std::size_t i = 0; i < masked.size(); ++i) {
    if (masked[i] > 0.0) w[i] = std::exp(std::log(masked[i]) / params.temperature - max_log);
  }

  if (params.top_k && *params.top_k > 0 && static_cast<std::size_t>(*params.top_k) < w.size()) {
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return w[a] > w[b]; });
    for (std::size_t k = static_cast<std::size_t>(*params.top_k); k < order.size(); ++k) {
      w[order[k]] = 0.0;
    }
  }
  const double z = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= z;
  return w;
}

int sample_next(const StyleLM& model, std::span<const int> context, std::string_view artist,
                const SamplingParams& params, const GrammarState& grammar, Rng& rng) {
  const auto w = sampling_distribution(model, context, artist, params, grammar);
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_positive = Vocab::kEnd;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += w[i];
    if (u < acc) return last_positive;
  }
  return last_positive;
}

std::string config_name(GenMode mode, PromptKind kind) {
  std::string s = mode == GenMode::Multi ? "M-" : "S-";
  s += kind == PromptKind::Full ? "FP" : "EP";
  return s;
}

TokenStream make_prompt(const TokenStream& song, PromptKind kind, const std::string& artist) {
  TokenStream prompt = inject_artist_token(song, artist);
  prompt.prelude.clear();
  prompt.warnings.clear();
  prompt.has_start = true;
  prompt.has_end = false;
  const auto& body = song.body;

  if (kind == PromptKind::Full) {
    const auto spans = measure_spans(song);
    if (spans.size() < 2) {
      throw Error(ErrorCode::TooShort, "full prompt needs at least 2 measures, song has " +
                                           std::to_string(spans.size()));
    }
    prompt.body.assign(body.begin(), body.begin() + static_cast<long>(spans[1].end));
    return prompt;
  }

  prompt.body.clear();
  auto first = std::find_if(body.begin(), body.end(), is<tok::Note>);
  if (first == body.end()) throw Error(ErrorCode::TooShort, "song has no notes");
  prompt.body.push_back(*first);
  auto it = std::next(first);
  for (; it != body.end() && is<tok::NoteEffect>(*it); ++it) prompt.body.push_back(*it);
  auto wait = std::find_if(it, body.end(), is<tok::Wait>);
  if (wait != body.end()) prompt.body.push_back(*wait);
  return prompt;
}

TokenStream generate(const StyleLM& model, const TokenStream& prompt, const std::string& artist,
                     const GenerationConfig& config) {
  TokenStream out = inject_artist_token(prompt, artist);
  out.has_start = true;
  out.has_end = false;
  auto words = to_words(out);
  auto ids = model.encode(words);

  const auto ctx_len = static_cast<std::size_t>(std::max(0, model.config().order - 1));
  GrammarState grammar = GrammarState::after(out.body);
  Rng rng(config.seed);
  const SamplingParams params{config.temperature, config.top_k};

  for (int n = 0; n < config.budget(); ++n) {
    const auto take = std::min(ctx_len, ids.size());
    const std::span<const int> context(ids.data() + ids.size() - take, take);
    const int next = sample_next(model, context, artist, params, grammar, rng);
    if (next == Vocab::kEnd) break;
    Token t = model.vocab().parsed(next);
    grammar.advance(t);
    out.body.push_back(std::move(t));
    ids.push_back(next);
  }
  out.has_end = true;
  return out;
}

}  // namespace shredkit
