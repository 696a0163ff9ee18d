#ifndef XCOM_SEMANTIC_HPP_
#define XCOM_SEMANTIC_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcom/classifier.hpp"
#include "xcom/encoder.hpp"
#include "xcom/error.hpp"
#include "xcom/preprocess.hpp"
#include "xcom/types.hpp"
#include "xcom/vocab.hpp"

namespace xcom {

// [CLS] side1 [SEP] side2 [SEP] [PAD]... padded to exactly max_len.
struct PairInput {
  std::vector<int> ids;
  std::vector<int> segments;
  std::vector<int> attention_mask;
  bool truncated = false;

  // The attended (non-padding) prefix.
  TokenSequence Prefix() const {
    std::size_t n = 0;
    while (n < attention_mask.size() && attention_mask[n]) ++n;
    return {{ids.begin(), ids.begin() + static_cast<long>(n)},
            {segments.begin(), segments.begin() + static_cast<long>(n)}};
  }
};

// When both sides do not fit, each keeps its head; the content budget is
// split equally and a short side leaves its unused share to the other.
inline PairInput BuildPairInput(const std::vector<std::string>& first,
                                const std::vector<std::string>& second,
                                const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 8) throw Error(ErrorCode::kInvalidConfig, "max_len < 8");
  const std::size_t budget = max_len - 3;
  std::size_t keep1 = first.size();
  std::size_t keep2 = second.size();
  PairInput in;
  if (keep1 + keep2 > budget) {
    in.truncated = true;
    keep1 = std::min(first.size(), budget - std::min(second.size(), budget / 2));
    keep2 = std::min(second.size(), budget - keep1);
  }
  auto push = [&in](int id, int seg) {
    in.ids.push_back(id);
    in.segments.push_back(seg);
    in.attention_mask.push_back(1);
  };
  push(kClsId, 0);
  for (std::size_t i = 0; i < keep1; ++i) push(vocab.Id(first[i]), 0);
  push(kSepId, 0);
  for (std::size_t i = 0; i < keep2; ++i) push(vocab.Id(second[i]), 1);
  push(kSepId, 1);
  while (in.ids.size() < max_len) {
    in.ids.push_back(kPadId);
    in.segments.push_back(0);
    in.attention_mask.push_back(0);
  }
  return in;
}

inline std::vector<std::string> ConcatTokens(const AspectSentenceSet& set) {
  std::vector<std::string> out;
  for (const auto& s : set.sentences) {
    out.insert(out.end(), s.tokens.begin(), s.tokens.end());
  }
  return out;
}

// Semantic branch parameters: vocabulary, encoder and head.
struct SemanticModel {
  Vocabulary vocab;
  std::size_t max_len = 64;
  SequenceClassifier model;

  const EncoderParams& encoder() const { return model.encoders.front(); }
  const LinearHead& head() const { return model.head; }

  PairInput Input(const std::vector<std::string>& first,
                  const std::vector<std::string>& second) const {
    return BuildPairInput(first, second, vocab, max_len);
  }

  RowVector EmbedTokens(const std::vector<std::string>& first,
                        const std::vector<std::string>& second) const {
    return Encoder::Encode(encoder(), Input(first, second).Prefix());
  }

  nlohmann::json ToJson() const {
    return {{"vocabulary", vocab.ToJson()},
            {"max_len", max_len},
            {"model", model.ToJson()}};
  }

  static SemanticModel FromJson(const nlohmann::json& j) {
    SemanticModel m;
    m.vocab = Vocabulary::FromJson(j.at("vocabulary"));
    m.max_len = j.at("max_len").get<std::size_t>();
    m.model = SequenceClassifier::FromJson(j.at("model"));
    return m;
  }
};

inline RowVector EncodePair(const AspectSentenceSet& first,
                            const AspectSentenceSet& second,
                            const SemanticModel& model) {
  if (first.empty() || second.empty()) {
    throw Error(ErrorCode::kEmptySide, "both aspect sets must be non-empty");
  }
  return model.EmbedTokens(ConcatTokens(first), ConcatTokens(second));
}

inline RowVector SemanticLogits(const RowVector& z, const LinearHead& head) {
  return head.Apply(z);
}

struct SemanticSample {
  std::vector<std::string> first;
  std::vector<std::string> second;
  ComparativeLabel label = ComparativeLabel::kSimilar;
};

struct SemanticTrainConfig {
  std::size_t dim = 64;
  std::size_t max_len = 64;
  std::size_t heads = 4;
  BranchTrainConfig train;
};

inline Vocabulary BuildSemanticVocabulary(
    const std::vector<SemanticSample>& samples) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& s : samples) {
    docs.push_back(s.first);
    docs.push_back(s.second);
  }
  return Vocabulary::Build(docs);
}

inline std::vector<LabeledSequences> SemanticTrainingData(
    const std::vector<SemanticSample>& samples, const Vocabulary& vocab,
    std::size_t max_len) {
  std::vector<LabeledSequences> data;
  data.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.label == ComparativeLabel::kNull) {
      throw Error(ErrorCode::kDegenerateLabels, "Null label in semantic training");
    }
    data.push_back({{BuildPairInput(s.first, s.second, vocab, max_len).Prefix()},
                    ClassIndex(s.label)});
  }
  return data;
}

inline SemanticModel TrainSemanticBranch(const std::vector<SemanticSample>& samples,
                                         const SemanticTrainConfig& cfg,
                                         std::vector<double>* epoch_loss = nullptr) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyTraining, "semantic branch");
  SemanticModel m;
  m.vocab = BuildSemanticVocabulary(samples);
  m.max_len = cfg.max_len;
  BranchTrainConfig train = cfg.train;
  train.mask_id = kMaskId;
  train.min_maskable_id = kNumSpecialTokens;
  const auto data = SemanticTrainingData(samples, m.vocab, m.max_len);
  auto result = TrainClassifier(
      {EncoderShape{m.vocab.size(), cfg.dim, cfg.max_len, 2, cfg.heads}}, data, train);
  if (epoch_loss) *epoch_loss = result.epoch_loss;
  m.model = std::move(result.model);
  return m;
}

}  // namespace xcom

#endif  // XCOM_SEMANTIC_HPP_
