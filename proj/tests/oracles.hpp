#ifndef XCOM_TESTS_ORACLES_HPP_
#define XCOM_TESTS_ORACLES_HPP_

// Reference implementations written directly from the definitions, with no
// shared code path with the library.

#include <algorithm>
#include <array>
#include <numeric>
#include <vector>

#include "xcom/metrics.hpp"
#include "xcom/shapley.hpp"
#include "xcom/types.hpp"

namespace xcom::oracle {

struct Scores {
  double micro_p, micro_r, micro_f1, macro_p, macro_r, macro_f1;
};

inline double F1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

// Per-instance tallies. Gold Null is dropped (or is its own class); a
// predicted Null against a non-Null gold label is a miss for the gold class.
inline Scores Metrics(const std::vector<ComparativeLabel>& gold,
                      const std::vector<ComparativeLabel>& pred, NullPolicy policy) {
  std::vector<ComparativeLabel> classes = {ComparativeLabel::kWorse, ComparativeLabel::kSimilar,
                                           ComparativeLabel::kBetter};
  if (policy == NullPolicy::kNullAsFourthClass) classes.push_back(ComparativeLabel::kNull);
  auto counted = [&](std::size_t i) {
    return policy == NullPolicy::kNullAsFourthClass || gold[i] != ComparativeLabel::kNull;
  };
  double tp_all = 0, fp_all = 0, fn_all = 0;
  double sp = 0, sr = 0, sf = 0;
  int used = 0;
  for (auto c : classes) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!counted(i)) continue;
      if (gold[i] == c && pred[i] == c) tp += 1;
      if (gold[i] != c && pred[i] == c) fp += 1;
      if (gold[i] == c && pred[i] != c) fn += 1;
    }
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
    if (tp + fp + fn == 0) continue;
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    sp += p;
    sr += r;
    sf += F1(p, r);
    ++used;
  }
  Scores s;
  s.micro_p = tp_all + fp_all > 0 ? tp_all / (tp_all + fp_all) : 0.0;
  s.micro_r = tp_all + fn_all > 0 ? tp_all / (tp_all + fn_all) : 0.0;
  s.micro_f1 = F1(s.micro_p, s.micro_r);
  s.macro_p = used ? sp / used : 0.0;
  s.macro_r = used ? sr / used : 0.0;
  s.macro_f1 = used ? sf / used : 0.0;
  return s;
}

// Shapley values as the average marginal contribution over all M! orderings.
inline std::vector<ClassValues> PermutationShapley(const ValueFunction& f, std::size_t m) {
  std::vector<ClassValues> phi(m, ClassValues{});
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double count = 0;
  do {
    Coalition c(m);
    ClassValues prev = f(c);
    for (std::size_t j : order) {
      c.Set(j, true);
      const ClassValues now = f(c);
      for (std::size_t k = 0; k < kNumClasses; ++k) phi[j][k] += now[k] - prev[k];
      prev = now;
    }
    count += 1;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& row : phi) {
    for (double& v : row) v /= count;
  }
  return phi;
}

}  // namespace xcom::oracle

#endif  // XCOM_TESTS_ORACLES_HPP_
