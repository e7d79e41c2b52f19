#include "shredkit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "shredkit/error.hpp"
#include "shredkit/musicology.hpp"
#include "shredkit/stylelm.hpp"

namespace shredkit {

std::vector<std::string> nb_features(const TokenStream& stream, bool lead_instrument_only) {
  const TokenStream view = lead_instrument_only ? lead_view(stream) : stream;
  std::vector<std::string> out;
  out.reserve(view.body.size());
  for (const auto& t : view.body) {
    if (is<tok::Wait>(t) || is<tok::Note>(t) || is_effect(t)) out.push_back(to_text(t));
  }
  return out;
}

NBModel NBModel::train_documents(const std::vector<Document>& docs, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  std::map<std::string, std::size_t> doc_counts;
  std::map<std::string, std::map<std::string, double>> counts;
  std::set<std::string> vocab;
  for (const auto& [artist, feats] : docs) {
    ++doc_counts[artist];
    auto& c = counts[artist];
    for (const auto& f : feats) {
      c[f] += 1.0;
      vocab.insert(f);
    }
  }
  if (doc_counts.size() < 2) {
    throw Error(ErrorCode::SingleClass,
                std::to_string(doc_counts.size()) + " artist label(s) in training data");
  }

  NBModel m;
  m.alpha_ = alpha;
  m.vocab_.assign(vocab.begin(), vocab.end());
  for (std::size_t i = 0; i < m.vocab_.size(); ++i) m.vocab_index_[m.vocab_[i]] = i;

  const double n_docs = static_cast<double>(docs.size());
  const double v = static_cast<double>(m.vocab_.size());
  for (const auto& [artist, n] : doc_counts) {
    m.artists_.push_back(artist);
    m.log_prior_.push_back(std::log(static_cast<double>(n) / n_docs));
    const auto& c = counts[artist];
    double total = 0.0;
    for (const auto& [tok_text, k] : c) total += k;
    const double denom = total + alpha * v;
    std::vector<double> ll(m.vocab_.size(), std::log(alpha / denom));
    for (const auto& [tok_text, k] : c) ll[m.vocab_index_.at(tok_text)] = std::log((k + alpha) / denom);
    m.log_lik_.push_back(std::move(ll));
  }
  return m;
}

NBModel train_nb(const CorpusIndex& train_split, const NBConfig& config) {
  std::vector<NBModel::Document> docs;
  docs.reserve(train_split.entries.size());
  for (const auto& e : train_split.entries) {
    docs.emplace_back(e.artist_label, nb_features(e.stream, config.lead_instrument_only));
  }
  NBModel m = NBModel::train_documents(docs, config.alpha);
  m.lead_only_ = config.lead_instrument_only;
  return m;
}

double NBModel::log_likelihood(std::size_t artist, const std::string& token) const {
  auto it = vocab_index_.find(token);
  if (it == vocab_index_.end()) return std::numeric_limits<double>::quiet_NaN();
  return log_lik_.at(artist)[it->second];
}

std::vector<double> NBModel::log_posterior(std::span<const std::string> features) const {
  std::vector<double> lp = log_prior_;
  for (const auto& f : features) {
    auto it = vocab_index_.find(f);
    if (it == vocab_index_.end()) continue;
    for (std::size_t a = 0; a < artists_.size(); ++a) lp[a] += log_lik_[a][it->second];
  }
  return lp;
}

std::vector<double> NBModel::scores_features(std::span<const std::string> features) const {
  if (features.empty()) {
    throw Error(ErrorCode::EmptyAfterFiltering, "no feature tokens after filtering");
  }
  std::vector<double> lp = log_posterior(features);
  const double mx = *std::max_element(lp.begin(), lp.end());
  double z = 0.0;
  for (double x : lp) z += std::exp(x - mx);
  const double log_z = mx + std::log(z);
  for (double& x : lp) x = std::exp(x - log_z);
  return lp;
}

std::vector<double> NBModel::scores(const TokenStream& stream) const {
  const auto feats = nb_features(stream, lead_only_);
  return scores_features(feats);
}

nlohmann::json NBModel::to_json() const {
  nlohmann::json j;
  j["format"] = "shredkit.nb";
  j["version"] = 1;
  j["alpha"] = alpha_;
  j["lead_instrument_only"] = lead_only_;
  j["vocab"] = vocab_;
  j["artists"] = nlohmann::json::array();
  for (std::size_t a = 0; a < artists_.size(); ++a) {
    j["artists"].push_back(
        {{"name", artists_[a]}, {"log_prior", log_prior_[a]}, {"log_likelihood", log_lik_[a]}});
  }
  return j;
}

NBModel NBModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "shredkit.nb" || j.at("version") != 1) {
      throw Error(ErrorCode::BadModelFile, "not a shredkit.nb v1 model");
    }
    NBModel m;
    m.alpha_ = j.at("alpha").get<double>();
    m.lead_only_ = j.at("lead_instrument_only").get<bool>();
    m.vocab_ = j.at("vocab").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < m.vocab_.size(); ++i) m.vocab_index_[m.vocab_[i]] = i;
    if (m.vocab_index_.size() != m.vocab_.size()) {
      throw Error(ErrorCode::BadModelFile, "duplicate vocabulary entry");
    }
    for (const auto& a : j.at("artists")) {
      m.artists_.push_back(a.at("name").get<std::string>());
      m.log_prior_.push_back(a.at("log_prior").get<double>());
      m.log_lik_.push_back(a.at("log_likelihood").get<std::vector<double>>());
      if (m.log_lik_.back().size() != m.vocab_.size()) {
        throw Error(ErrorCode::BadModelFile, "likelihood table size mismatch");
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadModelFile, e.what());
  }
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

Evaluation evaluate(const NBModel& model, const CorpusIndex& test_split) {
  Evaluation ev;
  ev.artists = model.artists();
  const std::size_t k = ev.artists.size();
  ev.confusion.assign(k, std::vector<long>(k, 0));
  std::size_t correct = 0;
  for (const auto& e : test_split.entries) {
    auto it = std::find(ev.artists.begin(), ev.artists.end(), e.artist_label);
    if (it == ev.artists.end()) {
      throw Error(ErrorCode::UnknownArtist, "test label '" + e.artist_label + "' not in model");
    }
    const std::size_t truth = static_cast<std::size_t>(it - ev.artists.begin());
    const auto s = model.scores(e.stream);
    const std::size_t pred = argmax(s);
    ++ev.confusion[truth][pred];
    if (pred == truth) ++correct;
    ++ev.total;
  }
  ev.accuracy = ev.total ? static_cast<double>(correct) / static_cast<double>(ev.total) : 0.0;
  return ev;
}

std::size_t ScoreMatrix::diagonal_hits() const {
  std::size_t hits = 0;
  for (const auto& r : rows) {
    if (r.scores.empty()) continue;
    if (columns.at(argmax(r.scores)) == r.artist) ++hits;
  }
  return hits;
}

std::string ScoreMatrix::to_csv() const {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  os << "artist,configuration,n";
  for (const auto& c : columns) os << ',' << c;
  os << ",predicted\n";
  for (const auto& r : rows) {
    os << r.artist << ',' << r.configuration << ',' << r.n_streams;
    for (double s : r.scores) os << ',' << s;
    os << ',' << columns.at(argmax(r.scores)) << '\n';
  }
  return os.str();
}

ScoreMatrix score_table(const NBModel& model, const GeneratedCorpora& generated) {
  ScoreMatrix sm;
  sm.columns = model.artists();
  auto config_rank = [](const std::string& c) {
    auto it = std::find(kConfigNames.begin(), kConfigNames.end(), c);
    return static_cast<std::size_t>(it - kConfigNames.begin());
  };
  auto artist_rank = [&](const std::string& a) {
    auto it = std::find(sm.columns.begin(), sm.columns.end(), a);
    return static_cast<std::size_t>(it - sm.columns.begin());
  };
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& [key, streams] : generated) keys.push_back(key);
  std::stable_sort(keys.begin(), keys.end(), [&](const auto& x, const auto& y) {
    return std::tuple(artist_rank(x.first), x.first, config_rank(x.second), x.second) <
           std::tuple(artist_rank(y.first), y.first, config_rank(y.second), y.second);
  });

  for (const auto& key : keys) {
    const auto& streams = generated.at(key);
    if (streams.empty()) {
      throw Error(ErrorCode::EmptyConfiguration, key.first + "/" + key.second + " has no streams");
    }
    ScoreRow row{key.first, key.second, streams.size(), std::vector<double>(sm.columns.size(), 0.0)};
    for (const auto& s : streams) {
      const auto sc = model.scores(s);
      for (std::size_t i = 0; i < sc.size(); ++i) row.scores[i] += sc[i];
    }
    for (double& x : row.scores) x /= static_cast<double>(streams.size());
    sm.rows.push_back(std::move(row));
  }
  return sm;
}

namespace {

std::vector<double> raw_features(const TokenStream& stream,
                                 const std::vector<std::string>& duration_bins) {
  const TokenStream view = lead_view(stream);
  const EventTimeline tl = decode_events(view);
  std::vector<double> f;
  f.reserve(duration_bins.size() + kTechniques.size() + 2);

  Distribution durations;
  if (tl.pitched_count() > 0) durations = note_duration_distribution(tl);
  const double dt = durations.total();
  for (const auto& b : duration_bins) f.push_back(dt > 0 ? durations.count(b) / dt : 0.0);

  const Distribution tech = technique_distribution(view);
  const double tt = tech.total();
  for (const char* t : kTechniques) f.push_back(tt > 0 ? tech.count(t) / tt : 0.0);

  if (tl.pitched_count() > 0) {
    const Distribution pc = pitch_class_histogram(tl);
    f.push_back(pitch_class_entropy(pc) / std::log2(12.0));
    f.push_back(scale_consistency(pc).consistency);
  } else {
    f.push_back(0.0);
    f.push_back(0.0);
  }
  return f;
}

}  // namespace

FeatureScorer FeatureScorer::train(const CorpusIndex& corpus) {
  FeatureScorer fs;
  fs.artists_ = corpus.labels();
  if (fs.artists_.size() < 2) {
    throw Error(ErrorCode::SingleClass,
                std::to_string(fs.artists_.size()) + " artist label(s) in training data");
  }

  Distribution all_durations;
  for (const auto& e : corpus.entries) {
    const EventTimeline tl = decode_events(lead_view(e.stream));
    if (tl.pitched_count() > 0) all_durations.merge(note_duration_distribution(tl));
  }
  all_durations.sort_numeric();
  for (const auto& b : all_durations.bins()) fs.duration_bins_.push_back(b.label);

  const std::size_t dim = fs.duration_bins_.size() + kTechniques.size() + 2;
  std::vector<std::vector<std::vector<double>>> per_artist(fs.artists_.size());
  for (const auto& e : corpus.entries) {
    const auto a = static_cast<std::size_t>(
        std::find(fs.artists_.begin(), fs.artists_.end(), e.artist_label) - fs.artists_.begin());
    per_artist[a].push_back(raw_features(e.stream, fs.duration_bins_));
  }

  fs.means_.assign(fs.artists_.size(), std::vector<double>(dim, 0.0));
  fs.variance_.assign(dim, 0.0);
  std::size_t n = 0;
  for (std::size_t a = 0; a < per_artist.size(); ++a) {
    for (const auto& x : per_artist[a]) {
      for (std::size_t d = 0; d < dim; ++d) fs.means_[a][d] += x[d];
    }
    for (double& m : fs.means_[a]) m /= static_cast<double>(per_artist[a].size());
    for (const auto& x : per_artist[a]) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double r = x[d] - fs.means_[a][d];
        fs.variance_[d] += r * r;
      }
      ++n;
    }
  }
  // Floor keeps constant features from dominating.
  for (double& v : fs.variance_) v = v / static_cast<double>(n) + 1e-4;
  return fs;
}

std::vector<double> FeatureScorer::features(const TokenStream& stream) const {
  return raw_features(stream, duration_bins_);
}

std::vector<double> FeatureScorer::scores(const TokenStream& stream) const {
  const auto x = features(stream);
  std::vector<double> lp(artists_.size(), 0.0);
  for (std::size_t a = 0; a < artists_.size(); ++a) {
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double r = x[d] - means_[a][d];
      lp[a] -= r * r / (2.0 * variance_[d]);
    }
  }
  const double mx = *std::max_element(lp.begin(), lp.end());
  double z = 0.0;
  for (double& v : lp) z += (v = std::exp(v - mx));
  for (double& v : lp) v /= z;
  return lp;
}

}  // namespace shredkit
