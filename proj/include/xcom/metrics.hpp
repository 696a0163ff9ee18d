#ifndef XCOM_METRICS_HPP_
#define XCOM_METRICS_HPP_

#include <array>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcom/error.hpp"
#include "xcom/types.hpp"

namespace xcom {

enum class NullPolicy {
  // Gold-Null instances are only tallied in null_stats; a Null prediction on
  // a non-Null gold instance is a miss for the gold class.
  kExcludeGoldNull,
  // Null is scored as a fourth class.
  kNullAsFourthClass,
};

inline NullPolicy ParseNullPolicy(const std::string& name) {
  if (name == "exclude-gold-null") return NullPolicy::kExcludeGoldNull;
  if (name == "null-as-fourth-class") return NullPolicy::kNullAsFourthClass;
  throw Error(ErrorCode::kInvalidConfig, "unknown null policy '" + name + "'");
}

struct NullStats {
  std::size_t gold_null = 0;
  std::size_t predicted_null = 0;
  std::size_t agreement = 0;  // gold and prediction both Null
};

// Rows are gold labels, columns predictions, both indexed by the enum order
// (Worse, Similar, Better, Null). Under kExcludeGoldNull the Null row stays
// empty and the Null column acts as a rejection column.
struct ConfusionMatrix {
  NullPolicy policy = NullPolicy::kExcludeGoldNull;
  std::array<std::array<std::size_t, 4>, 4> counts{};
  NullStats null_stats;

  std::size_t num_classes() const {
    return policy == NullPolicy::kNullAsFourthClass ? 4 : 3;
  }

  std::size_t Evaluated() const {
    std::size_t n = 0;
    for (const auto& row : counts) {
      for (std::size_t c : row) n += c;
    }
    return n;
  }
};

inline ConfusionMatrix Confusion(std::span<const ComparativeLabel> gold,
                                 std::span<const ComparativeLabel> pred,
                                 NullPolicy policy = NullPolicy::kExcludeGoldNull) {
  if (gold.size() != pred.size() || gold.empty()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(gold.size()) + " gold vs " +
                    std::to_string(pred.size()) + " predicted");
  }
  ConfusionMatrix cm;
  cm.policy = policy;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool gold_null = gold[i] == ComparativeLabel::kNull;
    const bool pred_null = pred[i] == ComparativeLabel::kNull;
    cm.null_stats.gold_null += gold_null;
    cm.null_stats.predicted_null += pred_null;
    cm.null_stats.agreement += gold_null && pred_null;
    if (gold_null && policy == NullPolicy::kExcludeGoldNull) continue;
    ++cm.counts[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(pred[i])];
  }
  return cm;
}

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassScore {
  std::size_t tp = 0, fp = 0, fn = 0;
  Prf prf;
  bool skipped = false;  // no gold and no predicted instances
};

struct MetricReport {
  Prf micro;
  Prf macro;
  std::vector<ClassScore> per_class;
  std::size_t evaluated = 0;
};

namespace internal {

inline Prf ScoreCounts(std::size_t tp, std::size_t fp, std::size_t fn) {
  Prf s;
  s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

}  // namespace internal

// Micro pools TP/FP/FN over the scored classes; macro averages per-class
// P, R and F1, skipping classes that never occur in gold or predictions.
inline MetricReport MicroMacro(const ConfusionMatrix& cm) {
  MetricReport report;
  report.evaluated = cm.Evaluated();
  if (report.evaluated == 0) throw Error(ErrorCode::kEmptyEvaluation, "");
  const std::size_t k = cm.num_classes();
  std::size_t tp = 0, fp = 0, fn = 0;
  std::size_t scored = 0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassScore s;
    s.tp = cm.counts[c][c];
    for (std::size_t r = 0; r < k; ++r) {
      if (r != c) s.fp += cm.counts[r][c];
    }
    for (std::size_t col = 0; col < 4; ++col) {
      if (col != c) s.fn += cm.counts[c][col];
    }
    s.prf = internal::ScoreCounts(s.tp, s.fp, s.fn);
    s.skipped = s.tp + s.fp + s.fn == 0;
    tp += s.tp;
    fp += s.fp;
    fn += s.fn;
    if (!s.skipped) {
      report.macro.precision += s.prf.precision;
      report.macro.recall += s.prf.recall;
      report.macro.f1 += s.prf.f1;
      ++scored;
    }
    report.per_class.push_back(s);
  }
  if (scored > 0) {
    report.macro.precision /= static_cast<double>(scored);
    report.macro.recall /= static_cast<double>(scored);
    report.macro.f1 /= static_cast<double>(scored);
  }
  report.micro = internal::ScoreCounts(tp, fp, fn);
  return report;
}

inline nlohmann::ordered_json PrfToJson(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

inline nlohmann::ordered_json ReportToJson(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["evaluated"] = r.evaluated;
  j["micro"] = PrfToJson(r.micro);
  j["macro"] = PrfToJson(r.macro);
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    nlohmann::ordered_json row = PrfToJson(r.per_class[c].prf);
    row["class"] = std::string(LabelName(static_cast<ComparativeLabel>(c)));
    row["tp"] = r.per_class[c].tp;
    row["fp"] = r.per_class[c].fp;
    row["fn"] = r.per_class[c].fn;
    row["skipped"] = r.per_class[c].skipped;
    classes.push_back(row);
  }
  j["per_class"] = classes;
  return j;
}

}  // namespace xcom

#endif  // XCOM_METRICS_HPP_
