#ifndef XCOM_HARNESS_HPP_
#define XCOM_HARNESS_HPP_

#include <algorithm>
#include <array>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcom/corpus.hpp"
#include "xcom/error.hpp"
#include "xcom/explain.hpp"
#include "xcom/metrics.hpp"
#include "xcom/pipeline.hpp"

namespace xcom {

// ---------------------------------------------------------------------------
// Evaluation.

struct AspectDetectionScore {
  Prf micro;
  Prf macro;
  std::array<Prf, kNumAspects> per_aspect{};
};

struct Evaluation {
  NullPolicy policy = NullPolicy::kExcludeGoldNull;
  std::vector<PairPrediction> predictions;
  MetricReport overall;
  std::array<std::optional<MetricReport>, kNumAspects> per_aspect;
  NullStats null_stats;
  std::optional<AspectDetectionScore> aspect_detection;  // needs annotations
  std::optional<MetricReport> oracle_comparison;          // needs annotations
};

namespace internal {

inline std::optional<MetricReport> TryReport(const ConfusionMatrix& cm) {
  if (cm.Evaluated() == 0) return std::nullopt;
  return MicroMacro(cm);
}

inline bool FullyAnnotated(const Corpus& corpus) {
  for (const auto& p : corpus.pairs) {
    if (!p.first.sentence_aspects || !p.second.sentence_aspects) return false;
  }
  return true;
}

inline std::optional<AspectDetectionScore> ScoreAspectDetection(const Pipeline& pipeline,
                                                                const Corpus& corpus) {
  if (pipeline.options().routing != RoutingMode::kClassifier) return std::nullopt;
  std::array<std::size_t, kNumAspects> tp{}, fp{}, fn{};
  for (const auto& pair : corpus.pairs) {
    for (const Review* r : {&pair.first, &pair.second}) {
      const auto sentences = pipeline.Preprocess(*r);
      if (!r->sentence_aspects || r->sentence_aspects->size() != sentences.size()) {
        return std::nullopt;
      }
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        const auto& gold = (*r->sentence_aspects)[i];
        for (Aspect a : kAllAspects) {
          const bool g = std::find(gold.begin(), gold.end(), a) != gold.end();
          const bool p = pipeline.classifiers()[Index(a)].Classify(sentences[i].tokens);
          tp[Index(a)] += g && p;
          fp[Index(a)] += !g && p;
          fn[Index(a)] += g && !p;
        }
      }
    }
  }
  AspectDetectionScore s;
  std::size_t TP = 0, FP = 0, FN = 0;
  for (Aspect a : kAllAspects) {
    const std::size_t k = Index(a);
    s.per_aspect[k] = ScoreCounts(tp[k], fp[k], fn[k]);
    s.macro.precision += s.per_aspect[k].precision / kNumAspects;
    s.macro.recall += s.per_aspect[k].recall / kNumAspects;
    s.macro.f1 += s.per_aspect[k].f1 / kNumAspects;
    TP += tp[k];
    FP += fp[k];
    FN += fn[k];
  }
  s.micro = ScoreCounts(TP, FP, FN);
  return s;
}

}  // namespace internal

inline Evaluation Evaluate(const Pipeline& pipeline, const Corpus& test,
                           NullPolicy policy = NullPolicy::kExcludeGoldNull,
                           std::optional<RoutingMode> routing = {}) {
  if (test.pairs.empty()) throw Error(ErrorCode::kEmptyTestSet, "");
  Evaluation ev;
  ev.policy = policy;
  std::vector<ComparativeLabel> gold_all, pred_all;
  std::array<std::vector<ComparativeLabel>, kNumAspects> gold_a, pred_a;
  for (const auto& pair : test.pairs) {
    ev.predictions.push_back(pipeline.Predict(pair, routing));
    for (Aspect a : kAllAspects) {
      const auto g = pair.Gold(a);
      const auto p = ev.predictions.back().predictions[Index(a)].label;
      gold_all.push_back(g);
      pred_all.push_back(p);
      gold_a[Index(a)].push_back(g);
      pred_a[Index(a)].push_back(p);
    }
  }
  const ConfusionMatrix cm = Confusion(gold_all, pred_all, policy);
  ev.null_stats = cm.null_stats;
  ev.overall = MicroMacro(cm);
  for (Aspect a : kAllAspects) {
    ev.per_aspect[Index(a)] =
        internal::TryReport(Confusion(gold_a[Index(a)], pred_a[Index(a)], policy));
  }
  if (internal::FullyAnnotated(test) && !routing) {
    ev.aspect_detection = internal::ScoreAspectDetection(pipeline, test);
    std::vector<ComparativeLabel> gold_o, pred_o;
    for (const auto& pair : test.pairs) {
      const auto pp = pipeline.Predict(pair, RoutingMode::kOracle);
      for (Aspect a : kAllAspects) {
        gold_o.push_back(pair.Gold(a));
        pred_o.push_back(pp.predictions[Index(a)].label);
      }
    }
    ev.oracle_comparison = internal::TryReport(Confusion(gold_o, pred_o, policy));
  }
  return ev;
}

inline std::string NullPolicyName(NullPolicy p) {
  return p == NullPolicy::kExcludeGoldNull ? "exclude-gold-null" : "null-as-fourth-class";
}

inline nlohmann::ordered_json EvaluationToJson(const Evaluation& ev) {
  nlohmann::ordered_json j;
  j["null_policy"] = NullPolicyName(ev.policy);
  j["overall"] = ReportToJson(ev.overall);
  nlohmann::ordered_json aspects = nlohmann::ordered_json::object();
  for (Aspect a : kAllAspects) {
    const auto& r = ev.per_aspect[Index(a)];
    aspects[std::string(AspectName(a))] =
        r ? ReportToJson(*r) : nlohmann::ordered_json(nullptr);
  }
  j["aspects"] = aspects;
  j["null_stats"] = {{"gold_null", ev.null_stats.gold_null},
                     {"predicted_null", ev.null_stats.predicted_null},
                     {"agreement", ev.null_stats.agreement}};
  if (ev.aspect_detection) {
    nlohmann::ordered_json d;
    d["micro"] = PrfToJson(ev.aspect_detection->micro);
    d["macro"] = PrfToJson(ev.aspect_detection->macro);
    for (Aspect a : kAllAspects) {
      d[std::string(AspectName(a))] = PrfToJson(ev.aspect_detection->per_aspect[Index(a)]);
    }
    j["aspect_classification"] = d;
  }
  if (ev.oracle_comparison) j["comparison_opinion"] = ReportToJson(*ev.oracle_comparison);
  return j;
}

namespace internal {

inline std::string Pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%8.2f", 100.0 * v);
  return buf;
}

inline std::string TableLine(const std::string& name, const std::array<std::string, 6>& cells) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s | %8s %8s %8s | %8s %8s %8s\n", name.c_str(),
                cells[0].c_str(), cells[1].c_str(), cells[2].c_str(), cells[3].c_str(),
                cells[4].c_str(), cells[5].c_str());
  return buf;
}

inline std::string TableRow(const std::string& name, const Prf& micro, const Prf& macro) {
  return TableLine(name, {Pct(micro.precision), Pct(micro.recall), Pct(micro.f1),
                          Pct(macro.precision), Pct(macro.recall), Pct(macro.f1)});
}

}  // namespace internal

// Plain-text table: one row per aspect, then component rows and the total.
inline std::string EvaluationTable(const Evaluation& ev) {
  std::string out = internal::TableLine(
      "", {"micro-P", "micro-R", "micro-F1", "macro-P", "macro-R", "macro-F1"});
  for (Aspect a : kAllAspects) {
    const auto& r = ev.per_aspect[Index(a)];
    if (r) out += internal::TableRow(std::string(AspectName(a)), r->micro, r->macro);
  }
  if (ev.aspect_detection) {
    out += internal::TableRow("aspect classification", ev.aspect_detection->micro,
                              ev.aspect_detection->macro);
  }
  if (ev.oracle_comparison) {
    out += internal::TableRow("comparison opinion", ev.oracle_comparison->micro,
                              ev.oracle_comparison->macro);
  }
  out += internal::TableRow("overall", ev.overall.micro, ev.overall.macro);
  return out;
}

inline std::string PredictionsJsonl(const Corpus& corpus, const Evaluation& ev) {
  std::string out;
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    nlohmann::ordered_json j;
    j["user_id"] = corpus.pairs[i].user_id();
    j["first"] = corpus.pairs[i].first.review_id;
    j["second"] = corpus.pairs[i].second.review_id;
    nlohmann::ordered_json aspects = nlohmann::ordered_json::array();
    for (Aspect a : kAllAspects) {
      nlohmann::ordered_json p = PredictionToJson(a, ev.predictions[i].predictions[Index(a)]);
      p["gold"] = LabelCode(corpus.pairs[i].Gold(a)) ? nlohmann::ordered_json(*LabelCode(corpus.pairs[i].Gold(a)))
                                                     : nlohmann::ordered_json(nullptr);
      aspects.push_back(p);
    }
    j["predictions"] = aspects;
    out += j.dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Faithfulness: mask the top- or bottom-ranked adjectives and re-score.

enum class MaskStrategy { kTopK, kBottomK };

inline std::string StrategyName(MaskStrategy s) {
  return s == MaskStrategy::kTopK ? "top_k" : "bottom_k";
}

struct FaithfulnessCurve {
  MaskStrategy strategy = MaskStrategy::kTopK;
  std::vector<std::pair<std::size_t, double>> points;  // (k, macro-F1)
};

// One (pair, aspect) of the test set with its adjectives in ranked order.
struct RankedInstance {
  ComparativeLabel gold = ComparativeLabel::kNull;
  bool gated = true;
  AspectInstance instance;
  std::vector<TokenRef> tokens;
  std::vector<std::size_t> adjectives;  // token rows, most important first
};

inline std::vector<RankedInstance> RankAdjectives(const Pipeline& pipeline,
                                                  const Corpus& test,
                                                  const ExplainConfig& explain) {
  if (test.pairs.empty()) throw Error(ErrorCode::kEmptyTestSet, "");
  std::vector<RankedInstance> out;
  for (const auto& pair : test.pairs) {
    const AspectPairSet sets = pipeline.Route(pair);
    for (Aspect a : kAllAspects) {
      RankedInstance r;
      r.gold = pair.Gold(a);
      r.gated = NullGate(sets, a) == GateDecision::kNull;
      if (!r.gated) {
        r.instance = sets.at(a);
        const Attribution attr = Explain(pipeline, r.instance, explain);
        r.tokens = attr.tokens;
        for (const auto& t : attr.ranking) {
          if (pipeline.lexicon().Contains(attr.tokens[t.index].text)) {
            r.adjectives.push_back(t.index);
          }
        }
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline std::size_t MaxAdjectives(const std::vector<RankedInstance>& ranked) {
  std::size_t k = 0;
  for (const auto& r : ranked) k = std::max(k, r.adjectives.size());
  return k;
}

inline double MaskedMacroF1(const Pipeline& pipeline, const std::vector<RankedInstance>& ranked,
                            std::size_t k, MaskStrategy strategy, NullPolicy policy) {
  std::vector<ComparativeLabel> gold, pred;
  for (const auto& r : ranked) {
    gold.push_back(r.gold);
    if (r.gated) {
      pred.push_back(ComparativeLabel::kNull);
      continue;
    }
    Coalition keep(r.tokens.size(), true);
    const std::size_t n = std::min(k, r.adjectives.size());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = strategy == MaskStrategy::kTopK
                                  ? r.adjectives[i]
                                  : r.adjectives[r.adjectives.size() - 1 - i];
      keep.Set(idx, false);
    }
    pred.push_back(pipeline.PredictInstance(MaskInstance(r.instance, r.tokens, keep)).label);
  }
  return MicroMacro(Confusion(gold, pred, policy)).macro.f1;
}

// Empty `ks` means every k from 0 to the largest adjective count.
inline std::vector<FaithfulnessCurve> FaithfulnessCurves(
    const Pipeline& pipeline, const std::vector<RankedInstance>& ranked,
    std::vector<std::size_t> ks, NullPolicy policy = NullPolicy::kExcludeGoldNull) {
  if (ranked.empty()) throw Error(ErrorCode::kEmptyTestSet, "");
  if (ks.empty()) {
    for (std::size_t k = 0; k <= MaxAdjectives(ranked); ++k) ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() != 0) ks.insert(ks.begin(), 0);
  std::vector<FaithfulnessCurve> curves;
  for (MaskStrategy s : {MaskStrategy::kTopK, MaskStrategy::kBottomK}) {
    FaithfulnessCurve c;
    c.strategy = s;
    for (std::size_t k : ks) c.points.emplace_back(k, MaskedMacroF1(pipeline, ranked, k, s, policy));
    curves.push_back(std::move(c));
  }
  return curves;
}

inline std::string CurvesToCsv(const std::vector<FaithfulnessCurve>& curves) {
  std::string out = "strategy,k,macro_f1\n";
  char buf[64];
  for (const auto& c : curves) {
    for (const auto& [k, f1] : c.points) {
      std::snprintf(buf, sizeof buf, "%.10f", f1);
      out += StrategyName(c.strategy) + "," + std::to_string(k) + "," + buf + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ablation: each variant is retrained from scratch on the same split.

inline const std::vector<std::string>& KnownVariants() {
  static const std::vector<std::string> kVariants = {
      "full", "no-semantic-branch", "no-rating-branch", "no-aspect-classification",
      "concat-single-classifier"};
  return kVariants;
}

inline PipelineOptions VariantOptions(const std::string& name, PipelineOptions base) {
  if (name == "full") return base;
  if (name == "no-semantic-branch") {
    base.use_semantic = false;
  } else if (name == "no-rating-branch") {
    base.use_rating = false;
  } else if (name == "no-aspect-classification") {
    base.routing = RoutingMode::kAll;
  } else if (name == "concat-single-classifier") {
    base.fusion = FusionMode::kConcat;
  } else {
    throw Error(ErrorCode::kUnknownVariant, name);
  }
  return base;
}

struct AblationRow {
  std::string variant;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double delta_micro_f1 = 0.0;  // full minus variant
  double delta_macro_f1 = 0.0;
};

// "full" is always evaluated and listed first, since deltas refer to it.
inline std::vector<AblationRow> RunAblation(const Corpus& train, const Corpus& test,
                                            const PipelineConfig& base,
                                            std::vector<std::string> variants,
                                            NullPolicy policy = NullPolicy::kExcludeGoldNull) {
  for (const auto& v : variants) VariantOptions(v, base.options);
  variants.erase(std::remove(variants.begin(), variants.end(), "full"), variants.end());
  variants.insert(variants.begin(), "full");
  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    if (std::any_of(rows.begin(), rows.end(), [&v](const AblationRow& r) { return r.variant == v; })) {
      continue;
    }
    PipelineConfig cfg = base;
    cfg.options = VariantOptions(v, base.options);
    const Pipeline p = Pipeline::Train(train, cfg);
    const Evaluation ev = Evaluate(p, test, policy);
    rows.push_back({v, ev.overall.micro.f1, ev.overall.macro.f1, 0.0, 0.0});
  }
  for (auto& r : rows) {
    r.delta_micro_f1 = rows.front().micro_f1 - r.micro_f1;
    r.delta_macro_f1 = rows.front().macro_f1 - r.macro_f1;
  }
  return rows;
}

inline std::string AblationToCsv(const std::vector<AblationRow>& rows) {
  std::string out = "variant,micro_f1,macro_f1,delta_micro_f1,delta_macro_f1\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10f,%.10f,%.10f,%.10f\n", r.variant.c_str(),
                  r.micro_f1, r.macro_f1, r.delta_micro_f1, r.delta_macro_f1);
    out += buf;
  }
  return out;
}

}  // namespace xcom

#endif  // XCOM_HARNESS_HPP_
