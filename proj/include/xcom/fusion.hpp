#ifndef XCOM_FUSION_HPP_
#define XCOM_FUSION_HPP_

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <utility>

#include <json.hpp>

#include "xcom/error.hpp"
#include "xcom/preprocess.hpp"
#include "xcom/types.hpp"

namespace xcom {

using Logits = std::array<double, kNumClasses>;
// Probabilities ordered (Worse, Similar, Better).
using ClassDistribution = std::array<double, kNumClasses>;
// Sum of two class distributions; components in [0, 2], total 2.
using FusedDistribution = std::array<double, kNumClasses>;

inline Logits ToLogits(std::span<const double> values) {
  if (values.size() != kNumClasses) {
    throw Error(ErrorCode::kDimMismatch, "expected 3 logits");
  }
  return {values[0], values[1], values[2]};
}

// Max-subtracted softmax.
inline ClassDistribution Softmax(const Logits& l) {
  for (double v : l) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteLogits, "");
  }
  const double m = std::max({l[0], l[1], l[2]});
  ClassDistribution p;
  double sum = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    p[k] = std::exp(l[k] - m);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

// Index of the largest component; ties go to the lowest index.
inline std::size_t Argmax(const std::array<double, kNumClasses>& v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumClasses; ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

struct Prediction {
  ComparativeLabel label = ComparativeLabel::kNull;
  std::optional<FusedDistribution> fused;
  std::optional<std::pair<ClassDistribution, ClassDistribution>> branch_probs;

  static Prediction Null() { return {}; }
};

inline Prediction FusePredict(const Logits& rating_logits,
                              const Logits& semantic_logits) {
  const ClassDistribution pr = Softmax(rating_logits);
  const ClassDistribution ps = Softmax(semantic_logits);
  FusedDistribution q;
  for (std::size_t k = 0; k < kNumClasses; ++k) q[k] = pr[k] + ps[k];
  Prediction out;
  out.label = LabelFromClassIndex(Argmax(q));
  out.fused = q;
  out.branch_probs = std::make_pair(pr, ps);
  return out;
}

enum class GateDecision { kProceed, kNull };

inline GateDecision NullGate(const AspectPairSet& pairs, Aspect aspect) {
  const auto& p = pairs.at(aspect);
  return p.first.empty() || p.second.empty() ? GateDecision::kNull
                                             : GateDecision::kProceed;
}

inline nlohmann::ordered_json PredictionToJson(Aspect aspect,
                                               const Prediction& p) {
  nlohmann::ordered_json j;
  j["aspect"] = std::string(AspectName(aspect));
  const auto code = LabelCode(p.label);
  j["label"] = code ? nlohmann::ordered_json(*code) : nlohmann::ordered_json(nullptr);
  if (p.fused) j["q"] = *p.fused;
  if (p.branch_probs) {
    j["p_r"] = p.branch_probs->first;
    j["p_s"] = p.branch_probs->second;
  }
  return j;
}

}  // namespace xcom

#endif  // XCOM_FUSION_HPP_
