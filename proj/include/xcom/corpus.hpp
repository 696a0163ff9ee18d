#ifndef XCOM_CORPUS_HPP_
#define XCOM_CORPUS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "xcom/config.hpp"
#include "xcom/error.hpp"
#include "xcom/lexicon.hpp"
#include "xcom/rng.hpp"
#include "xcom/text.hpp"
#include "xcom/types.hpp"

namespace xcom {

struct Review {
  std::string user_id;
  std::string review_id;
  std::string text;
  // Synthetic corpora only: the aspect ratings the text was generated from.
  std::optional<std::map<Aspect, double>> planted_scores;
  // Optional sentence-level aspect annotation, aligned with the sentence
  // split of the normalized text. Needed to train the aspect classifiers.
  std::optional<std::vector<std::vector<Aspect>>> sentence_aspects;

  bool operator==(const Review&) const = default;
};

struct ReviewPair {
  Review first;
  Review second;
  std::array<ComparativeLabel, kNumAspects> gold{
      ComparativeLabel::kNull, ComparativeLabel::kNull,
      ComparativeLabel::kNull, ComparativeLabel::kNull};

  const std::string& user_id() const { return first.user_id; }
  ComparativeLabel Gold(Aspect a) const { return gold[Index(a)]; }

  bool operator==(const ReviewPair&) const = default;
};

struct CorpusMeta {
  std::string source;  // file path, or empty for generated corpora
  std::optional<std::uint64_t> seed;
  std::string config_digest;

  bool operator==(const CorpusMeta&) const = default;
};

struct Corpus {
  std::vector<ReviewPair> pairs;
  CorpusMeta meta;

  std::size_t size() const { return pairs.size(); }
};

// ---------------------------------------------------------------------------
// JSONL encoding.

namespace internal {

inline nlohmann::ordered_json ReviewToJson(const Review& r) {
  nlohmann::ordered_json j;
  j["review_id"] = r.review_id;
  j["text"] = r.text;
  if (r.planted_scores) {
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    for (const auto& [aspect, score] : *r.planted_scores) {
      scores[std::string(AspectName(aspect))] = score;
    }
    j["planted_scores"] = scores;
  }
  if (r.sentence_aspects) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : *r.sentence_aspects) {
      nlohmann::ordered_json names = nlohmann::ordered_json::array();
      for (Aspect a : row) names.push_back(std::string(AspectName(a)));
      rows.push_back(names);
    }
    j["sentence_aspects"] = rows;
  }
  return j;
}

inline const nlohmann::json& Require(const nlohmann::json& j,
                                     const std::string& name, long line_no) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorCode::kMissingField, name, line_no);
  }
  return j.at(name);
}

inline std::string RequireString(const nlohmann::json& j,
                                 const std::string& name, long line_no) {
  const auto& v = Require(j, name, line_no);
  if (!v.is_string()) {
    throw Error(ErrorCode::kParseError, "'" + name + "' must be a string",
                line_no);
  }
  return v.get<std::string>();
}

inline Aspect RequireAspect(const nlohmann::json& v, long line_no) {
  if (!v.is_string()) {
    throw Error(ErrorCode::kParseError, "aspect name must be a string",
                line_no);
  }
  const auto a = ParseAspect(v.get<std::string>());
  if (!a) {
    throw Error(ErrorCode::kParseError,
                "unknown aspect '" + v.get<std::string>() + "'", line_no);
  }
  return *a;
}

inline Review ReviewFromJson(const nlohmann::json& j,
                             const std::string& pair_user, long line_no) {
  Review r;
  r.review_id = RequireString(j, "review_id", line_no);
  r.text = RequireString(j, "text", line_no);
  r.user_id = pair_user;
  if (j.contains("user_id")) {
    const std::string own = RequireString(j, "user_id", line_no);
    if (own != pair_user) {
      throw Error(ErrorCode::kUserMismatch,
                  "review '" + r.review_id + "' belongs to '" + own + "'",
                  line_no);
    }
  }
  if (text::Normalize(r.text).empty()) {
    throw Error(ErrorCode::kParseError,
                "empty text in review '" + r.review_id + "'", line_no);
  }
  if (j.contains("planted_scores") && !j["planted_scores"].is_null()) {
    std::map<Aspect, double> scores;
    for (const auto& [name, value] : j["planted_scores"].items()) {
      const Aspect a = RequireAspect(nlohmann::json(name), line_no);
      if (!value.is_number()) {
        throw Error(ErrorCode::kParseError, "planted score must be numeric",
                    line_no);
      }
      scores[a] = value.get<double>();
    }
    r.planted_scores = std::move(scores);
  }
  if (j.contains("sentence_aspects") && !j["sentence_aspects"].is_null()) {
    std::vector<std::vector<Aspect>> rows;
    for (const auto& row : j["sentence_aspects"]) {
      std::vector<Aspect> aspects;
      for (const auto& name : row) aspects.push_back(RequireAspect(name, line_no));
      rows.push_back(std::move(aspects));
    }
    r.sentence_aspects = std::move(rows);
  }
  return r;
}

}  // namespace internal

inline std::string PairToJsonLine(const ReviewPair& pair) {
  nlohmann::ordered_json j;
  j["user_id"] = pair.user_id();
  j["first"] = internal::ReviewToJson(pair.first);
  j["second"] = internal::ReviewToJson(pair.second);
  nlohmann::ordered_json gold = nlohmann::ordered_json::object();
  for (Aspect a : kAllAspects) {
    const auto code = LabelCode(pair.Gold(a));
    gold[std::string(AspectName(a))] =
        code ? nlohmann::ordered_json(*code) : nlohmann::ordered_json(nullptr);
  }
  j["gold"] = gold;
  return j.dump();
}

inline ReviewPair PairFromJsonLine(const std::string& line, long line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what(), line_no);
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::kParseError, "record must be a JSON object",
                line_no);
  }
  ReviewPair pair;
  const std::string user = internal::RequireString(j, "user_id", line_no);
  pair.first =
      internal::ReviewFromJson(internal::Require(j, "first", line_no), user,
                               line_no);
  pair.second =
      internal::ReviewFromJson(internal::Require(j, "second", line_no), user,
                               line_no);
  const auto& gold = internal::Require(j, "gold", line_no);
  for (Aspect a : kAllAspects) {
    const auto& v = internal::Require(gold, std::string(AspectName(a)), line_no);
    if (v.is_null()) {
      pair.gold[Index(a)] = ComparativeLabel::kNull;
    } else if (v.is_number_integer()) {
      pair.gold[Index(a)] = LabelFromCode(v.get<int>());
    } else {
      throw Error(ErrorCode::kParseError, "gold label must be -1|0|1|null",
                  line_no);
    }
  }
  return pair;
}

inline Corpus LoadCorpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  Corpus corpus;
  corpus.meta.source = path.string();
  std::map<std::string, std::string> review_text;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ReviewPair pair = PairFromJsonLine(line, line_no);
    // A review may appear in several pairs; an id reused for different
    // text is an error.
    for (const Review* r : {&pair.first, &pair.second}) {
      const auto [it, inserted] = review_text.emplace(r->review_id, r->text);
      if (!inserted && it->second != r->text) {
        throw Error(ErrorCode::kParseError,
                    "duplicate review_id '" + r->review_id + "'", line_no);
      }
    }
    corpus.pairs.push_back(std::move(pair));
  }
  if (corpus.pairs.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, path.string());
  }
  return corpus;
}

inline void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& pair : corpus.pairs) out << PairToJsonLine(pair) << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic generation.

struct Template {
  std::optional<Aspect> aspect;  // nullopt: filler sentence, no aspect
  std::string text;              // aspect templates contain one "{adj}"
};

struct GeneratorConfig {
  std::size_t n_pairs = 500;
  std::size_t n_users = 100;
  double epsilon = 0.25;
  double omit_prob = 0.15;
  double similar_prob = 0.3;
  double multi_sentence_prob = 0.3;
  double filler_prob = 0.5;
  Lexicon lexicon;
  std::vector<Template> templates;

  // FNV-1a over a canonical rendering of every field.
  std::string Digest() const {
    std::ostringstream s;
    s.precision(17);
    s << n_pairs << '|' << n_users << '|' << epsilon << '|' << omit_prob
      << '|' << similar_prob << '|' << multi_sentence_prob << '|'
      << filler_prob;
    for (const auto& [w, v] : lexicon.entries()) s << '|' << w << '=' << v;
    for (const auto& t : templates) {
      s << '|' << (t.aspect ? AspectName(*t.aspect) : "none") << ':' << t.text;
    }
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s.str()) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    std::ostringstream hex;
    hex << std::hex;
    hex.width(16);
    hex.fill('0');
    hex << h;
    return hex.str();
  }
};

inline constexpr std::string_view kAdjectiveSlot = "{adj}";

// TSV "aspect<TAB>template", aspect one of the four names or "none".
inline std::vector<Template> LoadTemplates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open templates " + path.string());
  std::vector<Template> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kParseError, "expected aspect<TAB>template",
                  line_no);
    }
    Template t;
    const std::string name = line.substr(0, tab);
    if (name != "none") {
      t.aspect = ParseAspect(name);
      if (!t.aspect) {
        throw Error(ErrorCode::kParseError, "unknown aspect '" + name + "'",
                    line_no);
      }
    }
    t.text = line.substr(tab + 1);
    out.push_back(std::move(t));
  }
  return out;
}

inline void ValidateGeneratorConfig(const GeneratorConfig& cfg) {
  auto fail = [](const std::string& why) {
    throw Error(ErrorCode::kInvalidConfig, why);
  };
  if (cfg.n_pairs == 0) fail("n_pairs must be positive");
  if (cfg.n_users == 0) fail("n_users must be positive");
  if (!(cfg.epsilon > 0.0)) fail("epsilon must be > 0");
  for (double p : {cfg.omit_prob, cfg.similar_prob, cfg.multi_sentence_prob,
                   cfg.filler_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0, 1]");
  }
  if (cfg.lexicon.empty()) fail("empty lexicon");
  std::array<bool, kNumAspects> covered{};
  for (const auto& t : cfg.templates) {
    if (t.text != text::Normalize(t.text)) {
      fail("template is not normalized: " + t.text);
    }
    if (text::SplitSentences(t.text).size() != 1) {
      fail("template must be a single sentence: " + t.text);
    }
    const auto slot = t.text.find(kAdjectiveSlot);
    const bool one_slot =
        slot != std::string::npos &&
        t.text.find(kAdjectiveSlot, slot + 1) == std::string::npos;
    if (t.aspect) {
      if (!one_slot) fail("aspect template needs exactly one {adj}: " + t.text);
      covered[Index(*t.aspect)] = true;
    } else if (slot != std::string::npos) {
      fail("filler template must not contain {adj}: " + t.text);
    }
  }
  for (Aspect a : kAllAspects) {
    if (!covered[Index(a)]) {
      fail("no templates for aspect " + std::string(AspectName(a)));
    }
  }
}

// Reads the [gen] section. Template and lexicon paths resolve against the
// config file location.
inline GeneratorConfig LoadGeneratorConfig(const Config& cfg) {
  GeneratorConfig g;
  g.n_pairs = cfg.Get<std::size_t>("gen.n_pairs", g.n_pairs);
  g.n_users = cfg.Get<std::size_t>("gen.n_users", g.n_users);
  g.epsilon = cfg.Get<double>("gen.epsilon", g.epsilon);
  g.omit_prob = cfg.Get<double>("gen.omit_prob", g.omit_prob);
  g.similar_prob = cfg.Get<double>("gen.similar_prob", g.similar_prob);
  g.multi_sentence_prob =
      cfg.Get<double>("gen.multi_sentence_prob", g.multi_sentence_prob);
  g.filler_prob = cfg.Get<double>("gen.filler_prob", g.filler_prob);
  if (!cfg.Has("gen.templates") || !cfg.Has("gen.lexicon")) {
    throw Error(ErrorCode::kInvalidConfig,
                "gen.templates and gen.lexicon are required");
  }
  g.templates = LoadTemplates(cfg.GetPath("gen.templates", {}));
  g.lexicon = LoadLexicon(cfg.GetPath("gen.lexicon", {}));
  return g;
}

// Gold rule for planted scores: Better if s1 - s2 > eps, Worse if
// s2 - s1 > eps, Similar otherwise; Null when either side lacks the aspect.
inline ComparativeLabel LabelFromScores(std::optional<double> first,
                                        std::optional<double> second,
                                        double epsilon) {
  if (!first || !second) return ComparativeLabel::kNull;
  if (*first - *second > epsilon) return ComparativeLabel::kBetter;
  if (*second - *first > epsilon) return ComparativeLabel::kWorse;
  return ComparativeLabel::kSimilar;
}

namespace internal {

struct PlannedSentence {
  std::string text;
  std::optional<Aspect> aspect;
};

inline std::string FillSlot(const std::string& tmpl, const std::string& adj) {
  std::string out = tmpl;
  out.replace(out.find(kAdjectiveSlot), kAdjectiveSlot.size(), adj);
  return out;
}

class ReviewBuilder {
 public:
  ReviewBuilder(const GeneratorConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {
    for (const auto& [word, score] : cfg.lexicon.entries()) {
      by_score_[score].push_back(word);
    }
    for (const auto& [score, words] : by_score_) levels_.push_back(score);
    for (const auto& t : cfg.templates) {
      if (t.aspect) {
        aspect_templates_[Index(*t.aspect)].push_back(&t);
      } else {
        filler_templates_.push_back(&t);
      }
    }
  }

  // Draws one score level and writes every sentence with an adjective of
  // that level. Returns the adjective scores used, one per sentence.
  std::vector<double> AddAspect(Aspect a, std::size_t n_sentences) {
    const double level = levels_[rng_.Index(levels_.size())];
    const std::vector<double> scores(n_sentences, level);
    AddAspectMatching(a, scores);
    return scores;
  }

  // Same adjective scores as a reference realization, fresh words/templates.
  void AddAspectMatching(Aspect a, const std::vector<double>& scores) {
    for (double s : scores) {
      const auto& pool = by_score_.at(s);
      AddSentence(a, pool[rng_.Index(pool.size())]);
    }
  }

  void MaybeAddFiller() {
    if (filler_templates_.empty() || !rng_.Bernoulli(cfg_.filler_prob)) return;
    planned_.push_back(
        {filler_templates_[rng_.Index(filler_templates_.size())]->text,
         std::nullopt});
  }

  Review Finish(std::string user_id, std::string review_id,
                std::map<Aspect, double> planted) {
    if (planned_.empty()) {
      const std::string filler = filler_templates_.empty()
                                     ? std::string("no comment.")
                                     : filler_templates_.front()->text;
      planned_.push_back({filler, std::nullopt});
    }
    rng_.Shuffle(std::span(planned_));
    Review r;
    r.user_id = std::move(user_id);
    r.review_id = std::move(review_id);
    std::vector<std::vector<Aspect>> labels;
    for (std::size_t i = 0; i < planned_.size(); ++i) {
      if (i > 0) r.text += ' ';
      r.text += planned_[i].text;
      labels.push_back(planned_[i].aspect
                           ? std::vector<Aspect>{*planned_[i].aspect}
                           : std::vector<Aspect>{});
    }
    r.planted_scores = std::move(planted);
    r.sentence_aspects = std::move(labels);
    planned_.clear();
    return r;
  }

 private:
  void AddSentence(Aspect a, const std::string& adjective) {
    const auto& pool = aspect_templates_[Index(a)];
    planned_.push_back(
        {FillSlot(pool[rng_.Index(pool.size())]->text, adjective), a});
  }

  const GeneratorConfig& cfg_;
  Rng& rng_;
  std::map<double, std::vector<std::string>> by_score_;
  std::vector<double> levels_;
  std::array<std::vector<const Template*>, kNumAspects> aspect_templates_;
  std::vector<const Template*> filler_templates_;
  std::vector<PlannedSentence> planned_;
};

inline double Mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace internal

// Each pair: a uniformly drawn user writes two fresh reviews. Every aspect is
// independently omitted per review with omit_prob; when both reviews cover
// it, with similar_prob the second reuses the first one's score level. All
// sentences of one aspect in one review share a level, which is the planted
// score.
inline Corpus GenerateSynthetic(const GeneratorConfig& cfg, std::uint64_t seed) {
  ValidateGeneratorConfig(cfg);
  Rng rng(seed);
  internal::ReviewBuilder first(cfg, rng);
  internal::ReviewBuilder second(cfg, rng);
  Corpus corpus;
  corpus.meta.seed = seed;
  corpus.meta.config_digest = cfg.Digest();
  corpus.pairs.reserve(cfg.n_pairs);
  for (std::size_t p = 0; p < cfg.n_pairs; ++p) {
    const std::string user = "u" + std::to_string(rng.Index(cfg.n_users));
    std::map<Aspect, double> planted1;
    std::map<Aspect, double> planted2;
    for (Aspect a : kAllAspects) {
      const bool has1 = !rng.Bernoulli(cfg.omit_prob);
      const bool has2 = !rng.Bernoulli(cfg.omit_prob);
      const bool similar = has1 && has2 && rng.Bernoulli(cfg.similar_prob);
      std::vector<double> scores1;
      if (has1) {
        scores1 = first.AddAspect(
            a, 1 + static_cast<std::size_t>(
                       rng.Bernoulli(cfg.multi_sentence_prob)));
        planted1[a] = internal::Mean(scores1);
      }
      if (has2) {
        if (similar) {
          second.AddAspectMatching(a, scores1);
          planted2[a] = internal::Mean(scores1);
        } else {
          const auto scores2 = second.AddAspect(
              a, 1 + static_cast<std::size_t>(
                         rng.Bernoulli(cfg.multi_sentence_prob)));
          planted2[a] = internal::Mean(scores2);
        }
      }
    }
    first.MaybeAddFiller();
    second.MaybeAddFiller();

    ReviewPair pair;
    for (Aspect a : kAllAspects) {
      const auto s1 = planted1.contains(a) ? std::optional(planted1[a])
                                           : std::nullopt;
      const auto s2 = planted2.contains(a) ? std::optional(planted2[a])
                                           : std::nullopt;
      pair.gold[Index(a)] = LabelFromScores(s1, s2, cfg.epsilon);
    }
    const std::string id = "r" + std::to_string(p);
    pair.first = first.Finish(user, id + "a", std::move(planted1));
    pair.second = second.Finish(user, id + "b", std::move(planted2));
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Splitting.

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// Dev and test sizes are floor(n * ratio); the remainder goes to train.
inline CorpusSplit Split(const Corpus& corpus, const SplitRatios& ratios,
                         std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.dev > 0.0 && ratios.test > 0.0) ||
      std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::kBadRatios,
                "ratios must be positive and sum to 1");
  }
  const std::size_t n = corpus.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(std::span(order));

  auto count = [n](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
  };
  const std::size_t n_dev = count(ratios.dev);
  const std::size_t n_test = count(ratios.test);
  const std::size_t n_train = n - n_dev - n_test;

  CorpusSplit out;
  for (Corpus* part : {&out.train, &out.dev, &out.test}) {
    part->meta = corpus.meta;
  }
  for (std::size_t i = 0; i < n; ++i) {
    Corpus& part = i < n_train ? out.train
                   : i < n_train + n_dev ? out.dev
                                         : out.test;
    part.pairs.push_back(corpus.pairs[order[i]]);
  }
  return out;
}

}  // namespace xcom

#endif  // XCOM_CORPUS_HPP_
