#ifndef XCOM_EXPLAIN_HPP_
#define XCOM_EXPLAIN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcom/config.hpp"
#include "xcom/error.hpp"
#include "xcom/pipeline.hpp"
#include "xcom/shapley.hpp"

namespace xcom {

struct ExplainConfig {
  enum class Scope { kFused, kSemanticOnly } scope = Scope::kFused;
  enum class Mode { kAuto, kExact, kSampled } mode = Mode::kAuto;
  std::size_t exact_limit = kDefaultExactLimit;
  std::size_t n_permutations = 200;
  std::uint64_t seed = 1;
};

inline ExplainConfig LoadExplainConfig(const Config& cfg, std::uint64_t seed) {
  ExplainConfig e;
  e.seed = seed;
  const std::string scope = cfg.GetString("explain.scope", "fused");
  if (scope == "fused") {
    e.scope = ExplainConfig::Scope::kFused;
  } else if (scope == "semantic-only") {
    e.scope = ExplainConfig::Scope::kSemanticOnly;
  } else {
    throw Error(ErrorCode::kInvalidConfig, "explain.scope '" + scope + "'");
  }
  const std::string mode = cfg.GetString("explain.mode", "auto");
  if (mode == "auto") {
    e.mode = ExplainConfig::Mode::kAuto;
  } else if (mode == "exact") {
    e.mode = ExplainConfig::Mode::kExact;
  } else if (mode == "sampled") {
    e.mode = ExplainConfig::Mode::kSampled;
  } else {
    throw Error(ErrorCode::kInvalidConfig, "explain.mode '" + mode + "'");
  }
  e.exact_limit = cfg.Get<std::size_t>("explain.exact_limit", e.exact_limit);
  e.n_permutations = cfg.Get<std::size_t>("explain.n_permutations", e.n_permutations);
  return e;
}

struct TokenRef {
  Side side = Side::kFirst;
  std::size_t sentence = 0;  // index into the aspect set
  std::size_t offset = 0;    // token index inside the sentence
  std::size_t position = 0;  // running index within the side
  std::string text;
};

// Feature list of an instance: every token of side 1, then side 2.
inline std::vector<TokenRef> FlattenTokens(const AspectInstance& inst) {
  std::vector<TokenRef> out;
  for (const AspectSentenceSet* set : {&inst.first, &inst.second}) {
    std::size_t pos = 0;
    for (std::size_t s = 0; s < set->sentences.size(); ++s) {
      const auto& tokens = set->sentences[s].tokens;
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        out.push_back({set->side, s, t, pos++, tokens[t]});
      }
    }
  }
  return out;
}

// Copy of the instance with tokens outside the coalition replaced by [MASK].
inline AspectInstance MaskInstance(const AspectInstance& inst,
                                   const std::vector<TokenRef>& refs,
                                   const Coalition& keep) {
  if (keep.width() != refs.size()) {
    throw Error(ErrorCode::kWidthMismatch,
                std::to_string(keep.width()) + " vs " + std::to_string(refs.size()));
  }
  AspectInstance out = inst;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (keep.Has(i)) continue;
    auto& set = refs[i].side == Side::kFirst ? out.first : out.second;
    set.sentences[refs[i].sentence].tokens[refs[i].offset] = std::string(kMaskToken);
  }
  return out;
}

inline ValueFunction MakeValueFunction(const Pipeline& pipeline,
                                       const AspectInstance& inst,
                                       const std::vector<TokenRef>& refs,
                                       ExplainConfig::Scope scope) {
  const bool semantic_only = scope == ExplainConfig::Scope::kSemanticOnly;
  return [&pipeline, &inst, &refs, semantic_only](const Coalition& c) {
    return pipeline.OutputDistribution(MaskInstance(inst, refs, c), semantic_only);
  };
}

struct Attribution {
  Aspect aspect = Aspect::kAppearance;
  ComparativeLabel target = ComparativeLabel::kSimilar;
  ClassValues full{};  // f(all tokens present)
  std::vector<TokenRef> tokens;
  ShapleyValues values;
  std::vector<TokenImportance> ranking;
};

inline Attribution Explain(const Pipeline& pipeline, const AspectInstance& inst,
                           const ExplainConfig& cfg) {
  if (inst.first.empty() || inst.second.empty()) {
    throw Error(ErrorCode::kEmptySide, "cannot explain a Null-gated aspect");
  }
  Attribution a;
  a.aspect = inst.first.aspect;
  a.tokens = FlattenTokens(inst);
  const std::size_t m = a.tokens.size();
  const ValueFunction f = MakeValueFunction(pipeline, inst, a.tokens, cfg.scope);
  a.full = f(Coalition(m, true));
  a.target = LabelFromClassIndex(Argmax(a.full));

  const bool exact = cfg.mode == ExplainConfig::Mode::kExact ||
                     (cfg.mode == ExplainConfig::Mode::kAuto && m <= cfg.exact_limit);
  a.values = exact ? ExactShapley(f, m, cfg.exact_limit)
                   : SampledShapley(f, m, cfg.n_permutations, cfg.seed);
  a.ranking = RankTokens(a.values.phi);
  return a;
}

inline nlohmann::ordered_json AttributionToJson(const Attribution& a) {
  nlohmann::ordered_json j;
  j["aspect"] = std::string(AspectName(a.aspect));
  j["target"] = std::string(LabelName(a.target));
  j["method"] = a.values.method.kind == ShapleyMethod::Kind::kExact ? "exact" : "sampled";
  if (a.values.method.kind == ShapleyMethod::Kind::kSampled) {
    j["n_permutations"] = a.values.method.n_permutations;
    j["seed"] = a.values.method.seed;
  }
  j["phi0"] = a.values.phi0;
  j["full"] = a.full;
  std::vector<double> importance(a.tokens.size());
  for (const auto& r : a.ranking) importance[r.index] = r.importance;
  nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < a.tokens.size(); ++i) {
    nlohmann::ordered_json t;
    t["side"] = static_cast<int>(a.tokens[i].side);
    t["pos"] = a.tokens[i].position;
    t["text"] = a.tokens[i].text;
    t["phi"] = a.values.phi[i];
    if (a.values.std_error) t["std_error"] = (*a.values.std_error)[i];
    t["importance"] = importance[i];
    tokens.push_back(t);
  }
  j["tokens"] = tokens;
  return j;
}

namespace internal {

inline std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace internal

// Horizontal bar chart of the target-class values: red bars push toward the
// target, blue bars away from it.
inline std::string AttributionToSvg(const Attribution& a) {
  using internal::Fixed;
  const std::size_t target = ClassIndex(a.target);
  const std::size_t n = a.tokens.size();
  double scale = 1e-12;
  for (const auto& p : a.values.phi) scale = std::max(scale, std::abs(p[target]));

  const int row = 18;
  const int label_w = 160;
  const int half = 180;
  const int width = label_w + 2 * half + 80;
  const int height = 40 + row * static_cast<int>(n) + 10;
  const int axis = label_w + half;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"monospace\" font-size=\"12\">\n";
  svg << "<text x=\"4\" y=\"16\">" << internal::XmlEscape(std::string(AspectName(a.aspect)))
      << " / " << LabelName(a.target) << "</text>\n";
  svg << "<line x1=\"" << axis << "\" y1=\"28\" x2=\"" << axis << "\" y2=\""
      << height - 6 << "\" stroke=\"#444\"/>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double v = a.values.phi[i][target];
    const int y = 32 + row * static_cast<int>(i);
    const double len = std::abs(v) / scale * half;
    const double x = v >= 0 ? axis : axis - len;
    svg << "<text x=\"4\" y=\"" << y + 12 << "\">" << static_cast<int>(a.tokens[i].side)
        << ":" << internal::XmlEscape(a.tokens[i].text) << "</text>\n";
    svg << "<rect x=\"" << Fixed(x, 2) << "\" y=\"" << y << "\" width=\"" << Fixed(len, 2)
        << "\" height=\"" << row - 4 << "\" fill=\"" << (v >= 0 ? "#d62728" : "#1f77b4")
        << "\"/>\n";
    svg << "<text x=\"" << axis + half + 6 << "\" y=\"" << y + 12 << "\">" << Fixed(v, 4)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace xcom

#endif  // XCOM_EXPLAIN_HPP_
