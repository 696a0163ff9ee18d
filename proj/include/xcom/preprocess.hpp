#ifndef XCOM_PREPROCESS_HPP_
#define XCOM_PREPROCESS_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcom/corpus.hpp"
#include "xcom/error.hpp"
#include "xcom/rng.hpp"
#include "xcom/text.hpp"
#include "xcom/tfidf.hpp"
#include "xcom/types.hpp"

namespace xcom {

enum class Side { kFirst = 1, kSecond = 2 };

struct Sentence {
  std::string text;
  std::vector<std::string> tokens;
  std::string review_id;
  std::size_t index = 0;

  bool operator==(const Sentence&) const = default;
};

inline std::vector<Sentence> PreprocessReview(
    const Review& review,
    const std::set<std::string>& abbreviations = text::DefaultAbbreviations()) {
  std::vector<Sentence> out;
  const std::string normalized = text::Normalize(review.text);
  for (auto& s : text::SplitSentences(normalized, abbreviations)) {
    Sentence sentence;
    sentence.tokens = text::Tokenize(s);
    if (sentence.tokens.empty()) continue;
    sentence.text = std::move(s);
    sentence.review_id = review.review_id;
    sentence.index = out.size();
    out.push_back(std::move(sentence));
  }
  return out;
}

struct AspectSentenceSet {
  Aspect aspect = Aspect::kAppearance;
  Side side = Side::kFirst;
  std::vector<Sentence> sentences;

  bool empty() const { return sentences.empty(); }
};

struct AspectPair {
  AspectSentenceSet first;
  AspectSentenceSet second;
};

struct AspectPairSet {
  std::array<AspectPair, kNumAspects> pairs;
  // Sentences routed to no aspect, kept for auditing.
  std::vector<Sentence> discarded;

  const AspectPair& at(Aspect a) const { return pairs[Index(a)]; }
  AspectPair& at(Aspect a) { return pairs[Index(a)]; }
};

// ---------------------------------------------------------------------------
// Per-aspect binary sentence classifier: logistic regression over TF-IDF.

struct AspectTrainConfig {
  std::size_t epochs = 300;
  double learning_rate = 1.0;
  double l2 = 1e-4;
  double threshold = 0.5;
  std::uint64_t seed = 1;
};

namespace internal {

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace internal

// Mean binary cross-entropy plus (l2 / 2) * |w|^2 over dense rows.
struct LogisticObjective {
  const std::vector<std::vector<double>>& rows;
  const std::vector<int>& labels;
  double l2 = 0.0;

  double Loss(const std::vector<double>& w, double b) const {
    double loss = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double z = Dot(w, rows[i]) + b;
      // -[y log s(z) + (1 - y) log(1 - s(z))]
      loss += labels[i] ? internal::Softplus(-z) : internal::Softplus(z);
    }
    loss /= static_cast<double>(rows.size());
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return loss + 0.5 * l2 * reg;
  }

  void Gradient(const std::vector<double>& w, double b,
                std::vector<double>& grad_w, double& grad_b) const {
    grad_w.assign(w.size(), 0.0);
    grad_b = 0.0;
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double err =
          internal::Sigmoid(Dot(w, rows[i]) + b) - static_cast<double>(labels[i]);
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (rows[i][k] != 0.0) grad_w[k] += err * rows[i][k] * inv_n;
      }
      grad_b += err * inv_n;
    }
    for (std::size_t k = 0; k < w.size(); ++k) grad_w[k] += l2 * w[k];
  }

  static double Dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  }
};

class AspectClassifier {
 public:
  AspectClassifier() = default;

  Aspect aspect() const { return aspect_; }
  double threshold() const { return threshold_; }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  const TfIdfModel& features() const { return tfidf_; }
  // Full-batch training loss after each epoch (index 0 = initial weights).
  const std::vector<double>& loss_history() const { return loss_history_; }

  double Probability(const std::vector<std::string>& tokens) const {
    const auto row = tfidf_.Transform(tokens);
    return internal::Sigmoid(LogisticObjective::Dot(weights_, row) + bias_);
  }

  // Strict inequality: a probability equal to the threshold is negative.
  bool Classify(const std::vector<std::string>& tokens) const {
    return Probability(tokens) > threshold_;
  }

  static AspectClassifier Train(const std::vector<Sentence>& sentences,
                                const std::vector<int>& labels, Aspect aspect,
                                const AspectTrainConfig& cfg) {
    if (sentences.empty() || sentences.size() != labels.size()) {
      throw Error(ErrorCode::kEmptyTraining,
                  "aspect classifier needs matching, non-empty inputs");
    }
    bool has_pos = false;
    bool has_neg = false;
    for (int y : labels) (y ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
      throw Error(ErrorCode::kDegenerateLabels,
                  "aspect " + std::string(AspectName(aspect)));
    }
    if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "threshold must lie in (0, 1)");
    }

    AspectClassifier c;
    c.aspect_ = aspect;
    c.threshold_ = cfg.threshold;
    c.seed_ = cfg.seed;
    std::vector<std::vector<std::string>> docs;
    docs.reserve(sentences.size());
    for (const auto& s : sentences) docs.push_back(s.tokens);
    c.tfidf_ = TfIdfModel::Fit(docs);
    std::vector<std::vector<double>> rows;
    rows.reserve(docs.size());
    for (const auto& d : docs) rows.push_back(c.tfidf_.Transform(d));

    Rng rng(Rng::Mix(cfg.seed, Index(aspect)));
    c.weights_.resize(c.tfidf_.dim());
    for (double& w : c.weights_) w = 0.01 * rng.Normal();
    c.bias_ = 0.0;

    const LogisticObjective objective{rows, labels, cfg.l2};
    std::vector<double> grad_w;
    double grad_b = 0.0;
    c.loss_history_.push_back(objective.Loss(c.weights_, c.bias_));
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      objective.Gradient(c.weights_, c.bias_, grad_w, grad_b);
      for (std::size_t k = 0; k < c.weights_.size(); ++k) {
        c.weights_[k] -= cfg.learning_rate * grad_w[k];
      }
      c.bias_ -= cfg.learning_rate * grad_b;
      c.loss_history_.push_back(objective.Loss(c.weights_, c.bias_));
    }
    return c;
  }

  nlohmann::json ToJson() const {
    nlohmann::json j = tfidf_.ToJson();
    j["aspect"] = std::string(AspectName(aspect_));
    j["weights"] = weights_;
    j["bias"] = bias_;
    j["threshold"] = threshold_;
    j["seed"] = seed_;
    return j;
  }

  static AspectClassifier FromJson(const nlohmann::json& j) {
    AspectClassifier c;
    const auto aspect = ParseAspect(j.at("aspect").get<std::string>());
    if (!aspect) throw Error(ErrorCode::kParseError, "bad classifier aspect");
    c.aspect_ = *aspect;
    c.tfidf_ = TfIdfModel::FromJson(j);
    c.weights_ = j.at("weights").get<std::vector<double>>();
    c.bias_ = j.at("bias").get<double>();
    c.threshold_ = j.at("threshold").get<double>();
    c.seed_ = j.at("seed").get<std::uint64_t>();
    if (c.weights_.size() != c.tfidf_.dim()) {
      throw Error(ErrorCode::kDimMismatch, "classifier weights vs vocabulary");
    }
    return c;
  }

 private:
  Aspect aspect_ = Aspect::kAppearance;
  TfIdfModel tfidf_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  double threshold_ = 0.5;
  std::uint64_t seed_ = 0;
  std::vector<double> loss_history_;
};

using AspectClassifiers = std::array<AspectClassifier, kNumAspects>;

// ---------------------------------------------------------------------------
// Routing sentences into aspect sets.

// Returns, for one sentence, which aspects it belongs to.
using AspectRouter =
    std::function<std::array<bool, kNumAspects>(Side, const Sentence&)>;

inline AspectPairSet AssembleAspectPairs(const std::vector<Sentence>& first,
                                         const std::vector<Sentence>& second,
                                         const AspectRouter& route) {
  AspectPairSet out;
  for (Aspect a : kAllAspects) {
    out.at(a).first = {a, Side::kFirst, {}};
    out.at(a).second = {a, Side::kSecond, {}};
  }
  auto place = [&](Side side, const std::vector<Sentence>& sentences) {
    for (const auto& s : sentences) {
      const auto member = route(side, s);
      bool any = false;
      for (Aspect a : kAllAspects) {
        if (!member[Index(a)]) continue;
        any = true;
        auto& set = side == Side::kFirst ? out.at(a).first : out.at(a).second;
        set.sentences.push_back(s);
      }
      if (!any) out.discarded.push_back(s);
    }
  };
  place(Side::kFirst, first);
  place(Side::kSecond, second);
  return out;
}

inline AspectRouter ClassifierRouter(const AspectClassifiers& classifiers) {
  return [&classifiers](Side, const Sentence& s) {
    std::array<bool, kNumAspects> member{};
    for (Aspect a : kAllAspects) {
      member[Index(a)] = classifiers[Index(a)].Classify(s.tokens);
    }
    return member;
  };
}

inline AspectRouter RouteEverywhere() {
  return [](Side, const Sentence&) {
    return std::array<bool, kNumAspects>{true, true, true, true};
  };
}

// Routes by the reviews' sentence annotations (gold routing).
inline AspectRouter AnnotationRouter(const Review& first, const Review& second) {
  return [&first, &second](Side side, const Sentence& s) {
    const Review& r = side == Side::kFirst ? first : second;
    std::array<bool, kNumAspects> member{};
    if (!r.sentence_aspects || s.index >= r.sentence_aspects->size()) {
      throw Error(ErrorCode::kMissingField,
                  "sentence_aspects for review '" + r.review_id + "'");
    }
    for (Aspect a : (*r.sentence_aspects)[s.index]) member[Index(a)] = true;
    return member;
  };
}

inline AspectPairSet BuildAspectPairs(const Review& first, const Review& second,
                                      const AspectClassifiers& classifiers) {
  return AssembleAspectPairs(PreprocessReview(first), PreprocessReview(second),
                             ClassifierRouter(classifiers));
}

}  // namespace xcom

#endif  // XCOM_PREPROCESS_HPP_
