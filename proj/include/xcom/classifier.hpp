#ifndef XCOM_CLASSIFIER_HPP_
#define XCOM_CLASSIFIER_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcom/encoder.hpp"
#include "xcom/error.hpp"
#include "xcom/rng.hpp"
#include "xcom/types.hpp"

namespace xcom {

// One training/inference instance: one input sequence per encoder and a class
// index in {0, 1, 2}.
struct LabeledSequences {
  std::vector<TokenSequence> inputs;
  std::size_t label = 0;
};

struct BranchTrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 8;
  double learning_rate = 0.05;
  // Probability of replacing a maskable token by the mask id during
  // training, so the mask embedding learns to mean "absent".
  double mask_prob = 0.0;
  int mask_id = -1;
  int min_maskable_id = 0;
  std::size_t first_masked_input = 0;  // earlier input sequences are never masked
  enum class Optimizer { kSgd, kAdam } optimizer = Optimizer::kSgd;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
};

inline BranchTrainConfig::Optimizer ParseOptimizer(const std::string& name) {
  if (name == "sgd") return BranchTrainConfig::Optimizer::kSgd;
  if (name == "adam") return BranchTrainConfig::Optimizer::kAdam;
  throw Error(ErrorCode::kInvalidConfig, "unknown optimizer '" + name + "'");
}

// Encoders whose [CLS] states are concatenated and fed to one affine head.
// The two comparison branches use a single encoder each.
struct SequenceClassifier {
  std::vector<EncoderParams> encoders;
  LinearHead head;

  static SequenceClassifier Random(const std::vector<EncoderShape>& shapes,
                                   Rng& rng) {
    SequenceClassifier m;
    std::size_t total = 0;
    for (const auto& s : shapes) {
      m.encoders.push_back(EncoderParams::Random(s, rng));
      total += s.dim;
    }
    m.head = LinearHead::Random(total, rng, kNumClasses);
    return m;
  }

  SequenceClassifier ZerosLike() const {
    SequenceClassifier g;
    for (const auto& e : encoders) g.encoders.push_back(EncoderParams::Zeros(e.shape));
    g.head = LinearHead::Zeros(head.input_dim(), kNumClasses);
    return g;
  }

  std::vector<Matrix*> AllTensors() {
    std::vector<Matrix*> out;
    for (auto& e : encoders) {
      for (auto& [name, m] : e.Tensors()) out.push_back(m);
    }
    for (auto& [name, m] : head.Tensors()) out.push_back(m);
    return out;
  }

  RowVector Embed(const std::vector<TokenSequence>& inputs) const {
    if (inputs.size() != encoders.size()) {
      throw Error(ErrorCode::kDimMismatch, "one input per encoder expected");
    }
    RowVector z(static_cast<Eigen::Index>(head.input_dim()));
    Eigen::Index offset = 0;
    for (std::size_t k = 0; k < encoders.size(); ++k) {
      const RowVector part = Encoder::Encode(encoders[k], inputs[k]);
      z.segment(offset, part.size()) = part;
      offset += part.size();
    }
    return z;
  }

  RowVector Logits(const std::vector<TokenSequence>& inputs) const {
    return head.Apply(Embed(inputs));
  }

  nlohmann::json ToJson() const {
    nlohmann::json encs = nlohmann::json::array();
    for (const auto& e : encoders) encs.push_back(EncoderToJson(e));
    return {{"encoders", encs}, {"head", HeadToJson(head)}};
  }

  static SequenceClassifier FromJson(const nlohmann::json& j) {
    SequenceClassifier m;
    std::size_t total = 0;
    for (const auto& e : j.at("encoders")) {
      m.encoders.push_back(EncoderFromJson(e));
      total += m.encoders.back().shape.dim;
    }
    m.head = HeadFromJson(j.at("head"));
    if (m.head.input_dim() != total ||
        m.head.weight.cols() != static_cast<Eigen::Index>(kNumClasses)) {
      throw Error(ErrorCode::kDimMismatch, "head does not match encoders");
    }
    return m;
  }
};

namespace internal {

inline RowVector StableSoftmax(const RowVector& logits) {
  const double m = logits.maxCoeff();
  RowVector e = (logits.array() - m).exp();
  return e / e.sum();
}

}  // namespace internal

// Cross-entropy of one instance; accumulates `weight` * gradient into `grad`.
inline double AccumulateGradient(const SequenceClassifier& model,
                                 const LabeledSequences& sample, double weight,
                                 SequenceClassifier& grad) {
  const std::size_t k = model.encoders.size();
  std::vector<EncoderCache> caches(k);
  RowVector z(static_cast<Eigen::Index>(model.head.input_dim()));
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const RowVector part =
        Encoder::Forward(model.encoders[i], sample.inputs[i], caches[i]);
    z.segment(offset, part.size()) = part;
    offset += part.size();
  }
  const RowVector logits = model.head.Apply(z);
  const RowVector probs = internal::StableSoftmax(logits);
  const auto y = static_cast<Eigen::Index>(sample.label);
  const double loss = -std::log(std::max(probs(y), 1e-300));

  RowVector d_logits = probs * weight;
  d_logits(y) -= weight;
  grad.head.weight.noalias() += z.transpose() * d_logits;
  grad.head.bias += d_logits;
  const RowVector d_z = d_logits * model.head.weight.transpose();
  offset = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto d = static_cast<Eigen::Index>(model.encoders[i].shape.dim);
    Encoder::Backward(model.encoders[i], caches[i], d_z.segment(offset, d),
                      grad.encoders[i]);
    offset += d;
  }
  return loss;
}

// Mean cross-entropy over `samples` and its full gradient.
inline double LossAndGradient(const SequenceClassifier& model,
                              const std::vector<LabeledSequences>& samples,
                              SequenceClassifier& grad) {
  grad = model.ZerosLike();
  const double w = 1.0 / static_cast<double>(samples.size());
  double loss = 0.0;
  for (const auto& s : samples) loss += AccumulateGradient(model, s, w, grad);
  return loss * w;
}

inline double MeanLoss(const SequenceClassifier& model,
                       const std::vector<LabeledSequences>& samples) {
  double loss = 0.0;
  for (const auto& s : samples) {
    const RowVector p = internal::StableSoftmax(model.Logits(s.inputs));
    loss -= std::log(std::max(p(static_cast<Eigen::Index>(s.label)), 1e-300));
  }
  return loss / static_cast<double>(samples.size());
}

struct TrainResult {
  SequenceClassifier model;
  // Mean training loss over each epoch's mini-batches.
  std::vector<double> epoch_loss;
};

// Mini-batch SGD with a fixed step size, or Adam.
inline TrainResult TrainClassifier(const std::vector<EncoderShape>& shapes,
                                   const std::vector<LabeledSequences>& samples,
                                   const BranchTrainConfig& cfg) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyTraining, "branch training");
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& s : samples) {
    if (s.label >= kNumClasses) {
      throw Error(ErrorCode::kInvalidConfig, "label index out of range");
    }
    ++counts[s.label];
  }
  std::size_t present = 0;
  for (std::size_t c : counts) present += c > 0 ? 1 : 0;
  if (present < 2) {
    throw Error(ErrorCode::kDegenerateLabels, "need at least two classes");
  }
  if (cfg.batch_size == 0) {
    throw Error(ErrorCode::kInvalidConfig, "batch_size must be positive");
  }

  Rng rng(cfg.seed);
  TrainResult result;
  result.model = SequenceClassifier::Random(shapes, rng);
  SequenceClassifier grad = result.model.ZerosLike();
  std::vector<Matrix*> params = result.model.AllTensors();
  std::vector<Matrix*> grads = grad.AllTensors();

  std::vector<Matrix> m1, m2;
  for (const Matrix* p : params) {
    m1.push_back(Matrix::Zero(p->rows(), p->cols()));
    m2.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  std::size_t step = 0;

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  LabeledSequences work;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.Shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (Matrix* g : grads) g->setZero();
      const double w = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        work = samples[order[b]];
        if (cfg.mask_prob > 0.0 && cfg.mask_id >= 0) {
          for (std::size_t k = cfg.first_masked_input; k < work.inputs.size(); ++k) {
            for (int& id : work.inputs[k].ids) {
              if (id >= cfg.min_maskable_id && rng.Bernoulli(cfg.mask_prob)) {
                id = cfg.mask_id;
              }
            }
          }
        }
        epoch_loss += AccumulateGradient(result.model, work, w, grad);
      }
      ++step;
      if (cfg.optimizer == BranchTrainConfig::Optimizer::kSgd) {
        for (std::size_t t = 0; t < params.size(); ++t) {
          *params[t] -= cfg.learning_rate * *grads[t];
        }
        continue;
      }
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t t = 0; t < params.size(); ++t) {
        m1[t] = cfg.beta1 * m1[t] + (1.0 - cfg.beta1) * *grads[t];
        m2[t] = cfg.beta2 * m2[t] + (1.0 - cfg.beta2) * grads[t]->cwiseAbs2();
        *params[t] -= (cfg.learning_rate * (m1[t] / c1).array() /
                       ((m2[t] / c2).array().sqrt() + cfg.adam_eps))
                          .matrix();
      }
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(samples.size()));
  }
  return result;
}

}  // namespace xcom

#endif  // XCOM_CLASSIFIER_HPP_
