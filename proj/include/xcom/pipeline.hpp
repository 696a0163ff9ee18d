#ifndef XCOM_PIPELINE_HPP_
#define XCOM_PIPELINE_HPP_

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcom/classifier.hpp"
#include "xcom/config.hpp"
#include "xcom/corpus.hpp"
#include "xcom/error.hpp"
#include "xcom/fusion.hpp"
#include "xcom/lexicon.hpp"
#include "xcom/preprocess.hpp"
#include "xcom/scoring.hpp"
#include "xcom/semantic.hpp"
#include "xcom/shapley.hpp"
#include "xcom/text.hpp"
#include "xcom/types.hpp"

namespace xcom {

inline constexpr int kCheckpointVersion = 1;

enum class RoutingMode {
  kClassifier,  // trained per-aspect classifiers
  kAll,         // every sentence to every aspect (ablation)
  kOracle,      // sentence annotations (gold routing)
};

enum class FusionMode {
  kSum,     // softmax of each branch, summed
  kConcat,  // one head over concatenated branch embeddings (ablation)
};

struct PipelineOptions {
  RoutingMode routing = RoutingMode::kClassifier;
  bool use_rating = true;
  bool use_semantic = true;
  FusionMode fusion = FusionMode::kSum;

  std::size_t branch_count() const {
    return fusion == FusionMode::kConcat ? 1 : (use_rating ? 1 : 0) + (use_semantic ? 1 : 0);
  }
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  PipelineOptions options;
  std::filesystem::path lexicon_path;
  std::optional<std::filesystem::path> abbreviations_path;
  AspectTrainConfig aspect;
  GbtConfig gbt;
  std::size_t rating_dim = 64;
  std::size_t rating_heads = 4;
  BranchTrainConfig rating_train;
  SemanticTrainConfig semantic;
  // Also train on every instance with its sides exchanged and Worse/Better
  // swapped; the label is antisymmetric in the two reviews.
  bool swap_augment = false;
};

inline ComparativeLabel MirrorLabel(ComparativeLabel l) {
  if (l == ComparativeLabel::kWorse) return ComparativeLabel::kBetter;
  if (l == ComparativeLabel::kBetter) return ComparativeLabel::kWorse;
  return l;
}

inline RoutingMode ParseRoutingMode(const std::string& s) {
  if (s == "classifier") return RoutingMode::kClassifier;
  if (s == "all") return RoutingMode::kAll;
  if (s == "oracle") return RoutingMode::kOracle;
  throw Error(ErrorCode::kInvalidConfig, "unknown routing '" + s + "'");
}

inline std::string RoutingName(RoutingMode m) {
  switch (m) {
    case RoutingMode::kClassifier: return "classifier";
    case RoutingMode::kAll: return "all";
    case RoutingMode::kOracle: return "oracle";
  }
  return "classifier";
}

namespace internal {

inline BranchTrainConfig LoadBranchConfig(const Config& cfg, const std::string& section,
                                          BranchTrainConfig b) {
  b.epochs = cfg.Get<std::size_t>(section + ".epochs", b.epochs);
  b.batch_size = cfg.Get<std::size_t>(section + ".batch_size", b.batch_size);
  b.learning_rate = cfg.Get<double>(section + ".learning_rate", b.learning_rate);
  b.mask_prob = cfg.Get<double>(section + ".mask_prob", b.mask_prob);
  b.optimizer = ParseOptimizer(cfg.GetString(section + ".optimizer", "sgd"));
  return b;
}

}  // namespace internal

// Reads [model], [aspect], [gbt], [rating] and [semantic]. Seeds of the
// individual components are derived from `seed`.
inline PipelineConfig LoadPipelineConfig(const Config& cfg, std::uint64_t seed) {
  PipelineConfig p;
  p.seed = seed;
  if (!cfg.Has("model.lexicon")) {
    throw Error(ErrorCode::kInvalidConfig, "model.lexicon is required");
  }
  p.lexicon_path = cfg.GetPath("model.lexicon", {});
  if (cfg.Has("model.abbreviations")) {
    p.abbreviations_path = cfg.GetPath("model.abbreviations", {});
  }
  p.options.routing = ParseRoutingMode(cfg.GetString("model.routing", "classifier"));
  p.swap_augment = cfg.Get<bool>("model.swap_augment", p.swap_augment);

  p.aspect.epochs = cfg.Get<std::size_t>("aspect.epochs", p.aspect.epochs);
  p.aspect.learning_rate = cfg.Get<double>("aspect.learning_rate", p.aspect.learning_rate);
  p.aspect.l2 = cfg.Get<double>("aspect.l2", p.aspect.l2);
  p.aspect.threshold = cfg.Get<double>("aspect.threshold", p.aspect.threshold);

  p.gbt.rounds = cfg.Get<std::size_t>("gbt.rounds", p.gbt.rounds);
  p.gbt.max_depth = cfg.Get<std::size_t>("gbt.max_depth", p.gbt.max_depth);
  p.gbt.learning_rate = cfg.Get<double>("gbt.learning_rate", p.gbt.learning_rate);

  p.rating_dim = cfg.Get<std::size_t>("rating.dim", p.rating_dim);
  p.rating_heads = cfg.Get<std::size_t>("rating.heads", p.rating_heads);
  p.rating_train = internal::LoadBranchConfig(cfg, "rating", p.rating_train);

  p.semantic.dim = cfg.Get<std::size_t>("semantic.dim", p.semantic.dim);
  p.semantic.max_len = cfg.Get<std::size_t>("semantic.max_len", p.semantic.max_len);
  p.semantic.heads = cfg.Get<std::size_t>("semantic.heads", p.semantic.heads);
  p.semantic.train = internal::LoadBranchConfig(cfg, "semantic", p.semantic.train);
  return p;
}

// Both routed sentence sets of one (pair, aspect).
using AspectInstance = AspectPair;

struct PairPrediction {
  AspectPairSet sets;
  std::array<Prediction, kNumAspects> predictions;
};

struct TrainLog {
  std::array<std::vector<double>, kNumAspects> aspect_loss;
  std::array<std::vector<double>, kNumAspects> fallback_mse;
  std::vector<double> rating_loss;
  std::vector<double> semantic_loss;
  std::vector<double> concat_loss;
  std::size_t rating_samples = 0;
  std::size_t semantic_samples = 0;

  nlohmann::ordered_json ToJson() const {
    nlohmann::ordered_json j;
    nlohmann::ordered_json aspects = nlohmann::ordered_json::object();
    for (Aspect a : kAllAspects) {
      aspects[std::string(AspectName(a))] = {
          {"classifier_loss", aspect_loss[Index(a)]},
          {"fallback_mse", fallback_mse[Index(a)]}};
    }
    j["aspects"] = aspects;
    j["rating_samples"] = rating_samples;
    j["semantic_samples"] = semantic_samples;
    j["rating_loss"] = rating_loss;
    j["semantic_loss"] = semantic_loss;
    j["concat_loss"] = concat_loss;
    return j;
  }
};

class Pipeline {
 public:
  Pipeline() = default;

  const PipelineOptions& options() const { return options_; }
  const Lexicon& lexicon() const { return lexicon_; }
  const AspectClassifiers& classifiers() const { return classifiers_; }
  const RatingFallback& fallback(Aspect a) const { return fallbacks_[Index(a)]; }
  const std::optional<RatingHead>& rating() const { return rating_; }
  const std::optional<SemanticModel>& semantic() const { return semantic_; }

  std::vector<Sentence> Preprocess(const Review& r) const {
    return PreprocessReview(r, abbreviations_);
  }

  AspectPairSet Route(const ReviewPair& pair, std::optional<RoutingMode> mode = {}) const {
    const auto first = Preprocess(pair.first);
    const auto second = Preprocess(pair.second);
    switch (mode.value_or(options_.routing)) {
      case RoutingMode::kClassifier:
        return AssembleAspectPairs(first, second, ClassifierRouter(classifiers_));
      case RoutingMode::kAll:
        return AssembleAspectPairs(first, second, RouteEverywhere());
      case RoutingMode::kOracle:
        return AssembleAspectPairs(first, second,
                                   AnnotationRouter(pair.first, pair.second));
    }
    return {};
  }

  // Branch outputs for a non-empty instance. Returns the final prediction
  // and the class distribution used for explanations (sums to 1).
  Prediction PredictInstance(const AspectInstance& inst) const {
    if (inst.first.empty() || inst.second.empty()) return Prediction::Null();
    const Aspect aspect = inst.first.aspect;
    if (options_.fusion == FusionMode::kConcat) {
      const double r1 = AspectRating(inst.first, lexicon_, fallback(aspect));
      const double r2 = AspectRating(inst.second, lexicon_, fallback(aspect));
      const auto& sem = *semantic_;
      const RowVector logits = concat_->Logits(
          {RatingSequence(r1, r2),
           sem.Input(ConcatTokens(inst.first), ConcatTokens(inst.second)).Prefix()});
      const ClassDistribution p = Softmax(ToLogits({logits.data(), 3}));
      Prediction out;
      out.label = LabelFromClassIndex(Argmax(p));
      out.fused = p;
      return out;
    }
    std::optional<Logits> lr, ls;
    if (options_.use_rating) lr = RatingBranchLogits(inst);
    if (options_.use_semantic) ls = SemanticBranchLogits(inst);
    if (lr && ls) return FusePredict(*lr, *ls);
    const ClassDistribution p = Softmax(lr ? *lr : *ls);
    Prediction out;
    out.label = LabelFromClassIndex(Argmax(p));
    out.fused = p;
    return out;
  }

  Logits RatingBranchLogits(const AspectInstance& inst) const {
    const Aspect aspect = inst.first.aspect;
    const double r1 = AspectRating(inst.first, lexicon_, fallback(aspect));
    const double r2 = AspectRating(inst.second, lexicon_, fallback(aspect));
    const RowVector l = RatingLogits(r1, r2, *rating_);
    return ToLogits({l.data(), 3});
  }

  Logits SemanticBranchLogits(const AspectInstance& inst) const {
    const RowVector z = EncodePair(inst.first, inst.second, *semantic_);
    const RowVector l = SemanticLogits(z, semantic_->head());
    return ToLogits({l.data(), 3});
  }

  // Normalized output distribution: the fused vector divided by the number
  // of summed branches, or the semantic branch alone.
  ClassValues OutputDistribution(const AspectInstance& inst,
                                 bool semantic_only = false) const {
    if (semantic_only) {
      if (!semantic_ || options_.fusion == FusionMode::kConcat) {
        throw Error(ErrorCode::kInvalidConfig, "model has no semantic branch");
      }
      return Softmax(SemanticBranchLogits(inst));
    }
    const Prediction p = PredictInstance(inst);
    ClassValues out = *p.fused;
    const double n = static_cast<double>(options_.branch_count());
    for (double& v : out) v /= n;
    return out;
  }

  PairPrediction Predict(const ReviewPair& pair,
                         std::optional<RoutingMode> mode = {}) const {
    PairPrediction out;
    out.sets = Route(pair, mode);
    for (Aspect a : kAllAspects) {
      out.predictions[Index(a)] = NullGate(out.sets, a) == GateDecision::kNull
                                      ? Prediction::Null()
                                      : PredictInstance(out.sets.at(a));
    }
    return out;
  }

  // -------------------------------------------------------------------------
  // Training.

  static Pipeline Train(const Corpus& train, const PipelineConfig& cfg,
                        TrainLog* log = nullptr) {
    TrainLog local;
    TrainLog& tl = log ? *log : local;
    Pipeline p;
    p.options_ = cfg.options;
    p.lexicon_ = LoadLexicon(cfg.lexicon_path);
    p.abbreviations_ = text::DefaultAbbreviations();
    if (cfg.abbreviations_path) {
      const auto extra = text::LoadAbbreviations(*cfg.abbreviations_path);
      p.abbreviations_.insert(extra.begin(), extra.end());
    }
    if (train.pairs.empty()) throw Error(ErrorCode::kEmptyTraining, "training corpus");

    // Sentence-level annotation drives classifier and fallback training.
    struct Annotated {
      const Review* review;
      std::vector<Sentence> sentences;
    };
    std::vector<Annotated> reviews;
    for (const auto& pair : train.pairs) {
      for (const Review* r : {&pair.first, &pair.second}) {
        reviews.push_back({r, p.Preprocess(*r)});
      }
    }
    auto sentence_labels = [](const Annotated& a) {
      const auto& ann = a.review->sentence_aspects;
      if (!ann || ann->size() != a.sentences.size()) {
        throw Error(ErrorCode::kMissingField,
                    "sentence_aspects missing or misaligned for review '" +
                        a.review->review_id + "'");
      }
      return *ann;
    };

    if (cfg.options.routing == RoutingMode::kClassifier) {
      for (Aspect a : kAllAspects) {
        std::vector<Sentence> xs;
        std::vector<int> ys;
        for (const auto& r : reviews) {
          const auto labels = sentence_labels(r);
          for (std::size_t i = 0; i < r.sentences.size(); ++i) {
            xs.push_back(r.sentences[i]);
            ys.push_back(std::find(labels[i].begin(), labels[i].end(), a) !=
                         labels[i].end());
          }
        }
        AspectTrainConfig ac = cfg.aspect;
        ac.seed = Rng::Mix(cfg.seed, 100 + Index(a));
        p.classifiers_[Index(a)] = AspectClassifier::Train(xs, ys, a, ac);
        tl.aspect_loss[Index(a)] = p.classifiers_[Index(a)].loss_history();
      }
    }

    for (Aspect a : kAllAspects) {
      std::vector<Sentence> xs;
      std::vector<double> ys;
      for (const auto& r : reviews) {
        if (!r.review->planted_scores || !r.review->planted_scores->contains(a)) continue;
        const double target = r.review->planted_scores->at(a);
        if (cfg.options.routing == RoutingMode::kAll) {
          for (const auto& s : r.sentences) {
            xs.push_back(s);
            ys.push_back(target);
          }
          continue;
        }
        const auto labels = sentence_labels(r);
        for (std::size_t i = 0; i < r.sentences.size(); ++i) {
          if (std::find(labels[i].begin(), labels[i].end(), a) != labels[i].end()) {
            xs.push_back(r.sentences[i]);
            ys.push_back(target);
          }
        }
      }
      if (xs.empty()) {
        throw Error(ErrorCode::kEmptyTraining,
                    "no rated sentences for aspect " + std::string(AspectName(a)));
      }
      p.fallbacks_[Index(a)] = FitFallback(xs, ys, cfg.gbt);
      tl.fallback_mse[Index(a)] = p.fallbacks_[Index(a)].gbt.mse_history();
    }

    std::vector<RatingSample> rating_samples;
    std::vector<SemanticSample> semantic_samples;
    for (const auto& pair : train.pairs) {
      const AspectPairSet sets = p.Route(pair);
      for (Aspect a : kAllAspects) {
        const ComparativeLabel gold = pair.Gold(a);
        if (gold == ComparativeLabel::kNull || NullGate(sets, a) == GateDecision::kNull) {
          continue;
        }
        const auto& inst = sets.at(a);
        rating_samples.push_back(
            {AspectRating(inst.first, p.lexicon_, p.fallback(a)),
             AspectRating(inst.second, p.lexicon_, p.fallback(a)), gold});
        semantic_samples.push_back(
            {ConcatTokens(inst.first), ConcatTokens(inst.second), gold});
      }
    }
    if (cfg.swap_augment) {
      const std::size_t n = rating_samples.size();
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = rating_samples[i];
        rating_samples.push_back({r.second, r.first, MirrorLabel(r.label)});
        const auto s = semantic_samples[i];
        semantic_samples.push_back({s.second, s.first, MirrorLabel(s.label)});
      }
    }
    tl.rating_samples = rating_samples.size();
    tl.semantic_samples = semantic_samples.size();

    if (cfg.options.fusion == FusionMode::kConcat) {
      SemanticModel sem;
      sem.vocab = BuildSemanticVocabulary(semantic_samples);
      sem.max_len = cfg.semantic.max_len;
      std::vector<LabeledSequences> data;
      for (std::size_t i = 0; i < rating_samples.size(); ++i) {
        const auto& r = rating_samples[i];
        const auto& s = semantic_samples[i];
        data.push_back({{RatingSequence(r.first, r.second),
                         sem.Input(s.first, s.second).Prefix()},
                        ClassIndex(s.label)});
      }
      BranchTrainConfig bc = cfg.semantic.train;
      bc.seed = Rng::Mix(cfg.seed, 300);
      bc.mask_id = kMaskId;
      bc.min_maskable_id = kNumSpecialTokens;
      bc.first_masked_input = 1;
      auto result = TrainClassifier(
          {RatingEncoderShape(cfg.rating_dim, cfg.rating_heads),
           EncoderShape{sem.vocab.size(), cfg.semantic.dim, cfg.semantic.max_len, 2,
                        cfg.semantic.heads}},
          data, bc);
      tl.concat_loss = result.epoch_loss;
      p.concat_ = std::move(result.model);
      p.semantic_ = std::move(sem);
      return p;
    }

    if (cfg.options.use_rating) {
      BranchTrainConfig bc = cfg.rating_train;
      bc.seed = Rng::Mix(cfg.seed, 200);
      p.rating_ = TrainRatingHead(rating_samples, cfg.rating_dim, bc, &tl.rating_loss,
                                  cfg.rating_heads);
    }
    if (cfg.options.use_semantic) {
      SemanticTrainConfig sc = cfg.semantic;
      sc.train.seed = Rng::Mix(cfg.seed, 201);
      p.semantic_ = TrainSemanticBranch(semantic_samples, sc, &tl.semantic_loss);
    }
    return p;
  }

  // -------------------------------------------------------------------------
  // Persistence: one JSON file per component inside `dir`.

  void Save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    auto write = [&dir](const std::string& name, const nlohmann::json& j) {
      std::ofstream out(dir / name, std::ios::binary);
      if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / name).string());
      out << j.dump() << '\n';
    };
    nlohmann::json lex = nlohmann::json::object();
    for (const auto& [w, s] : lexicon_.entries()) lex[w] = s;
    nlohmann::json manifest = {
        {"version", kCheckpointVersion},
        {"routing", RoutingName(options_.routing)},
        {"use_rating", options_.use_rating},
        {"use_semantic", options_.use_semantic},
        {"fusion", options_.fusion == FusionMode::kConcat ? "concat" : "sum"},
        {"lexicon", lex},
        {"abbreviations", abbreviations_}};
    write("pipeline.json", manifest);
    for (Aspect a : kAllAspects) {
      const std::string name(AspectName(a));
      if (options_.routing == RoutingMode::kClassifier) {
        write("aspect_" + name + ".json", classifiers_[Index(a)].ToJson());
      }
      write("fallback_" + name + ".json", fallbacks_[Index(a)].ToJson());
    }
    if (rating_) {
      write("rating.json", {{"version", kCheckpointVersion},
                            {"model", rating_->model.ToJson()}});
    }
    if (semantic_) {
      nlohmann::json j = semantic_->ToJson();
      j["version"] = kCheckpointVersion;
      write("semantic.json", j);
    }
    if (concat_) {
      write("concat.json", {{"version", kCheckpointVersion}, {"model", concat_->ToJson()}});
    }
  }

  static Pipeline Load(const std::filesystem::path& dir) {
    auto read = [&dir](const std::string& name) {
      std::ifstream in(dir / name);
      if (!in) throw Error(ErrorCode::kIo, "cannot open " + (dir / name).string());
      try {
        nlohmann::json j = nlohmann::json::parse(in);
        if (j.contains("version") && j["version"].get<int>() != kCheckpointVersion) {
          throw Error(ErrorCode::kParseError, name + ": unsupported version");
        }
        return j;
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kParseError, name + ": " + e.what());
      }
    };
    Pipeline p;
    const auto manifest = read("pipeline.json");
    if (!manifest.contains("version")) {
      throw Error(ErrorCode::kMissingField, "pipeline.json: version");
    }
    p.options_.routing = ParseRoutingMode(manifest.at("routing").get<std::string>());
    p.options_.use_rating = manifest.at("use_rating").get<bool>();
    p.options_.use_semantic = manifest.at("use_semantic").get<bool>();
    p.options_.fusion = manifest.at("fusion").get<std::string>() == "concat"
                            ? FusionMode::kConcat
                            : FusionMode::kSum;
    for (const auto& [w, s] : manifest.at("lexicon").items()) {
      p.lexicon_.Add(w, s.get<double>());
    }
    for (const auto& a : manifest.at("abbreviations")) {
      p.abbreviations_.insert(a.get<std::string>());
    }
    for (Aspect a : kAllAspects) {
      const std::string name(AspectName(a));
      if (p.options_.routing == RoutingMode::kClassifier) {
        p.classifiers_[Index(a)] = AspectClassifier::FromJson(read("aspect_" + name + ".json"));
      }
      p.fallbacks_[Index(a)] = RatingFallback::FromJson(read("fallback_" + name + ".json"));
    }
    if (p.options_.fusion == FusionMode::kConcat) {
      p.concat_ = SequenceClassifier::FromJson(read("concat.json").at("model"));
      p.semantic_ = SemanticModel::FromJson(read("semantic.json"));
      return p;
    }
    if (p.options_.use_rating) {
      p.rating_ = RatingHead{SequenceClassifier::FromJson(read("rating.json").at("model"))};
    }
    if (p.options_.use_semantic) p.semantic_ = SemanticModel::FromJson(read("semantic.json"));
    return p;
  }

 private:
  PipelineOptions options_;
  Lexicon lexicon_;
  std::set<std::string> abbreviations_ = text::DefaultAbbreviations();
  AspectClassifiers classifiers_;
  std::array<RatingFallback, kNumAspects> fallbacks_;
  std::optional<RatingHead> rating_;
  std::optional<SemanticModel> semantic_;
  std::optional<SequenceClassifier> concat_;
};

}  // namespace xcom

#endif  // XCOM_PIPELINE_HPP_
