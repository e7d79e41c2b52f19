#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shredkit/corpus.hpp"
#include "shredkit/tokens.hpp"

namespace shredkit {

struct NBConfig {
  double alpha = 1.0;
  // Restrict each stream to its lead instrument before extracting features.
  bool lead_instrument_only = true;
};

// Feature words of a stream: wait, note, nfx and bfx tokens. Artist control
// tokens, unknown tokens and everything else are dropped.
std::vector<std::string> nb_features(const TokenStream& stream, bool lead_instrument_only = true);

// Multinomial naive Bayes over token unigrams with Laplace smoothing.
class NBModel {
 public:
  using Document = std::pair<std::string, std::vector<std::string>>;  // artist, features

  static NBModel train_documents(const std::vector<Document>& docs, double alpha = 1.0);

  const std::vector<std::string>& artists() const { return artists_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  double alpha() const { return alpha_; }
  bool lead_instrument_only() const { return lead_only_; }
  double log_prior(std::size_t artist) const { return log_prior_.at(artist); }
  // Log likelihood of `token` under `artist`; NaN when the token is out of vocabulary.
  double log_likelihood(std::size_t artist, const std::string& token) const;

  // Unnormalized log posteriors, out-of-vocabulary features ignored.
  std::vector<double> log_posterior(std::span<const std::string> features) const;
  // Normalized posterior; throws EmptyAfterFiltering for an empty feature list.
  std::vector<double> scores_features(std::span<const std::string> features) const;
  std::vector<double> scores(const TokenStream& stream) const;

  nlohmann::json to_json() const;
  static NBModel from_json(const nlohmann::json& j);

 private:
  friend NBModel train_nb(const CorpusIndex&, const NBConfig&);

  double alpha_ = 1.0;
  bool lead_only_ = true;
  std::vector<std::string> artists_;
  std::vector<std::string> vocab_;
  std::map<std::string, std::size_t> vocab_index_;
  std::vector<double> log_prior_;
  std::vector<std::vector<double>> log_lik_;  // [artist][token]
};

// Throws SingleClass when fewer than two artists are present.
NBModel train_nb(const CorpusIndex& train_split, const NBConfig& config = {});

std::size_t argmax(std::span<const double> v);

struct Evaluation {
  std::vector<std::string> artists;
  double accuracy = 0.0;
  std::size_t total = 0;
  std::vector<std::vector<long>> confusion;  // rows: true artist, columns: predicted
};

Evaluation evaluate(const NBModel& model, const CorpusIndex& test_split);

struct ScoreRow {
  std::string artist;
  std::string configuration;
  std::size_t n_streams = 0;
  std::vector<double> scores;  // aligned with ScoreMatrix::columns
};

struct ScoreMatrix {
  std::vector<std::string> columns;
  std::vector<ScoreRow> rows;

  std::size_t diagonal_hits() const;  // rows whose maximum is the conditioning artist
  std::string to_csv() const;
};

using GeneratedCorpora = std::map<std::pair<std::string, std::string>, std::vector<TokenStream>>;

// Mean score vector per (artist, configuration); rows ordered by model artist
// order then M-FP, M-EP, S-FP, S-EP. Throws EmptyConfiguration on an empty list.
ScoreMatrix score_table(const NBModel& model, const GeneratedCorpora& generated);

// Secondary scorer over musicology features (duration and technique
// probabilities, normalized PCE, SC): shared-variance Gaussian per artist.
class FeatureScorer {
 public:
  static FeatureScorer train(const CorpusIndex& corpus);

  std::vector<double> features(const TokenStream& stream) const;
  std::vector<double> scores(const TokenStream& stream) const;
  const std::vector<std::string>& artists() const { return artists_; }

 private:
  std::vector<std::string> artists_;
  std::vector<std::string> duration_bins_;
  std::vector<std::vector<double>> means_;
  std::vector<double> variance_;
};

}  // namespace shredkit
