#ifndef XCOM_SCORING_HPP_
#define XCOM_SCORING_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcom/classifier.hpp"
#include "xcom/encoder.hpp"
#include "xcom/error.hpp"
#include "xcom/gbt.hpp"
#include "xcom/lexicon.hpp"
#include "xcom/preprocess.hpp"
#include "xcom/tfidf.hpp"
#include "xcom/types.hpp"
#include "xcom/vocab.hpp"

namespace xcom {

// Mean lexicon score over the tokens found in the lexicon; nullopt when no
// token matches. Lexicon membership is what counts as an adjective.
inline std::optional<double> LexiconScore(std::span<const std::string> tokens,
                                          const Lexicon& lexicon) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    if (const auto s = lexicon.Find(t)) {
      sum += *s;
      ++hits;
    }
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

inline std::optional<double> LexiconScore(const Sentence& sentence,
                                          const Lexicon& lexicon) {
  return LexiconScore(sentence.tokens, lexicon);
}

// TF-IDF features plus a boosted regressor for sentences without lexicon
// hits. One instance per aspect.
struct RatingFallback {
  TfIdfModel tfidf;
  GbtRegressor gbt;

  double RawPredict(const std::vector<std::string>& tokens) const {
    return gbt.Predict(tfidf.Transform(tokens));
  }

  nlohmann::json ToJson() const {
    nlohmann::json j = tfidf.ToJson();
    j["gbt"] = gbt.ToJson();
    return j;
  }

  static RatingFallback FromJson(const nlohmann::json& j) {
    return {TfIdfModel::FromJson(j), GbtRegressor::FromJson(j.at("gbt"))};
  }
};

inline RatingFallback FitFallback(const std::vector<Sentence>& sentences,
                                  const std::vector<double>& targets,
                                  const GbtConfig& cfg) {
  if (sentences.empty() || sentences.size() != targets.size()) {
    throw Error(ErrorCode::kEmptyTraining,
                "fallback needs matching, non-empty sentences and targets");
  }
  for (double t : targets) {
    if (!(t >= kMinRating && t <= kMaxRating)) {
      throw Error(ErrorCode::kScoreOutOfRange, "fallback target outside [0, 5]");
    }
  }
  std::vector<std::vector<std::string>> docs;
  docs.reserve(sentences.size());
  for (const auto& s : sentences) docs.push_back(s.tokens);
  RatingFallback f;
  f.tfidf = TfIdfModel::Fit(docs);
  std::vector<std::vector<double>> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(f.tfidf.Transform(d));
  f.gbt = GbtRegressor::Fit(rows, targets, cfg);
  return f;
}

inline double ClampRating(double r) {
  return std::clamp(r, kMinRating, kMaxRating);
}

inline double SentenceRating(std::span<const std::string> tokens,
                             const Lexicon& lexicon,
                             const RatingFallback& fallback) {
  if (const auto s = LexiconScore(tokens, lexicon)) return *s;
  return ClampRating(
      fallback.RawPredict(std::vector<std::string>(tokens.begin(), tokens.end())));
}

inline double SentenceRating(const Sentence& sentence, const Lexicon& lexicon,
                             const RatingFallback& fallback) {
  return SentenceRating(sentence.tokens, lexicon, fallback);
}

inline double AggregateMin(std::span<const double> ratings) {
  if (ratings.empty()) throw Error(ErrorCode::kEmptyAspectSet, "");
  return *std::min_element(ratings.begin(), ratings.end());
}

inline double AspectRating(const AspectSentenceSet& set, const Lexicon& lexicon,
                           const RatingFallback& fallback) {
  std::vector<double> ratings;
  ratings.reserve(set.sentences.size());
  for (const auto& s : set.sentences) {
    ratings.push_back(SentenceRating(s, lexicon, fallback));
  }
  return AggregateMin(ratings);
}

// ---------------------------------------------------------------------------
// Rating-score classifier: [CLS] b(s1) [SEP] b(s2) [SEP] over score buckets.

inline constexpr int kNumScoreBuckets = 50;
inline constexpr double kScoreBucketWidth = 0.1;
inline constexpr std::size_t kRatingVocabSize =
    kNumSpecialTokens + kNumScoreBuckets;
inline constexpr std::size_t kRatingMaxLen = 8;

inline int ScoreBucket(double score) {
  if (!(score >= kMinRating && score <= kMaxRating)) {
    throw Error(ErrorCode::kScoreOutOfRange, std::to_string(score));
  }
  // The small offset keeps values such as 0.3 (0.29999...) in their bucket.
  const int b = static_cast<int>(std::floor(score / kScoreBucketWidth + 1e-9));
  return std::min(b, kNumScoreBuckets - 1);
}

inline TokenSequence RatingSequence(double first, double second) {
  return {{kClsId, kNumSpecialTokens + ScoreBucket(first), kSepId,
           kNumSpecialTokens + ScoreBucket(second), kSepId},
          {0, 0, 0, 1, 1}};
}

inline EncoderShape RatingEncoderShape(std::size_t dim, std::size_t heads = 4) {
  return {kRatingVocabSize, dim, kRatingMaxLen, 2, heads};
}

// Encoder over score tokens plus the d x 3 head.
struct RatingHead {
  SequenceClassifier model;

  RowVector Embed(double first, double second) const {
    return model.Embed({RatingSequence(first, second)});
  }
};

inline RowVector RatingLogits(double first, double second,
                              const RatingHead& head) {
  return head.model.Logits({RatingSequence(first, second)});
}

struct RatingSample {
  double first = 0.0;
  double second = 0.0;
  ComparativeLabel label = ComparativeLabel::kSimilar;
};

inline RatingHead TrainRatingHead(const std::vector<RatingSample>& samples,
                                  std::size_t dim, BranchTrainConfig cfg,
                                  std::vector<double>* epoch_loss = nullptr,
                                  std::size_t heads = 4) {
  std::vector<LabeledSequences> data;
  data.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.label == ComparativeLabel::kNull) {
      throw Error(ErrorCode::kDegenerateLabels, "Null label in rating training");
    }
    data.push_back({{RatingSequence(s.first, s.second)}, ClassIndex(s.label)});
  }
  cfg.mask_prob = 0.0;
  auto result = TrainClassifier({RatingEncoderShape(dim, heads)}, data, cfg);
  if (epoch_loss) *epoch_loss = result.epoch_loss;
  return {std::move(result.model)};
}

}  // namespace xcom

#endif  // XCOM_SCORING_HPP_
