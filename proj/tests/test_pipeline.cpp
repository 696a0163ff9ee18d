#include <gtest/gtest.h>

#include "test_util.hpp"
#include "xcom/xcom.hpp"

namespace xcom {
namespace {

PipelineConfig SmallConfig() {
  PipelineConfig cfg;
  cfg.seed = 3;
  cfg.lexicon_path = testing::DataDir() / "lexicon.tsv";
  cfg.abbreviations_path = testing::DataDir() / "abbreviations.txt";
  cfg.aspect.epochs = 100;
  cfg.gbt.rounds = 10;
  cfg.rating_dim = 8;
  cfg.rating_train.epochs = 4;
  cfg.semantic.dim = 8;
  cfg.semantic.max_len = 32;
  cfg.semantic.train.epochs = 2;
  return cfg;
}

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const Corpus corpus = GenerateSynthetic(testing::SmallGeneratorConfig(60), 5);
    split_ = new CorpusSplit(Split(corpus, {0.6, 0.2, 0.2}, 5));
    pipeline_ = new Pipeline(Pipeline::Train(split_->train, SmallConfig()));
  }
  static void TearDownTestSuite() {
    delete pipeline_;
    delete split_;
  }

  static const AspectInstance* FirstInstance(std::size_t max_tokens = 1000) {
    static std::vector<AspectPairSet> sets;
    for (const auto& pair : split_->test.pairs) {
      sets.push_back(pipeline_->Route(pair));
      for (Aspect a : kAllAspects) {
        const auto& inst = sets.back().at(a);
        if (inst.first.empty() || inst.second.empty()) continue;
        if (FlattenTokens(inst).size() <= max_tokens) return &inst;
      }
    }
    return nullptr;
  }

  static CorpusSplit* split_;
  static Pipeline* pipeline_;
};

CorpusSplit* PipelineTest::split_ = nullptr;
Pipeline* PipelineTest::pipeline_ = nullptr;

TEST_F(PipelineTest, TrainingIsDeterministic) {
  const Pipeline again = Pipeline::Train(split_->train, SmallConfig());
  for (const auto& pair : split_->test.pairs) {
    const auto a = pipeline_->Predict(pair);
    const auto b = again.Predict(pair);
    for (std::size_t i = 0; i < kNumAspects; ++i) {
      EXPECT_EQ(a.predictions[i].label, b.predictions[i].label);
      EXPECT_EQ(a.predictions[i].fused, b.predictions[i].fused);
    }
  }
}

TEST_F(PipelineTest, SaveLoadRoundTrip) {
  const auto dir = testing::TempPath("pipeline_roundtrip");
  std::filesystem::remove_all(dir);
  pipeline_->Save(dir);
  const Pipeline loaded = Pipeline::Load(dir);
  for (const auto& pair : split_->test.pairs) {
    const auto a = pipeline_->Predict(pair);
    const auto b = loaded.Predict(pair);
    for (std::size_t i = 0; i < kNumAspects; ++i) {
      EXPECT_EQ(a.predictions[i].label, b.predictions[i].label);
      EXPECT_EQ(a.predictions[i].fused, b.predictions[i].fused);
    }
  }
}

TEST_F(PipelineTest, FusedIsSumOfBranches) {
  const AspectInstance* inst = FirstInstance();
  ASSERT_NE(inst, nullptr);
  const auto pred = pipeline_->PredictInstance(*inst);
  const auto pr = Softmax(pipeline_->RatingBranchLogits(*inst));
  const auto ps = Softmax(pipeline_->SemanticBranchLogits(*inst));
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    EXPECT_NEAR((*pred.fused)[k], pr[k] + ps[k], 1e-12);
  }
  const auto f = pipeline_->OutputDistribution(*inst, false);
  EXPECT_NEAR(f[0] + f[1] + f[2], 1.0, 1e-12);
}

TEST_F(PipelineTest, ExplainEfficiency) {
  const AspectInstance* inst = FirstInstance(10);
  ASSERT_NE(inst, nullptr);
  ExplainConfig cfg;
  const Attribution a = Explain(*pipeline_, *inst, cfg);
  EXPECT_EQ(a.values.method.kind, ShapleyMethod::Kind::kExact);
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    double total = a.values.phi0[k];
    for (const auto& row : a.values.phi) total += row[k];
    EXPECT_NEAR(total, a.full[k], 1e-9);
  }
  cfg.mode = ExplainConfig::Mode::kSampled;
  cfg.n_permutations = 20;
  const Attribution s = Explain(*pipeline_, *inst, cfg);
  EXPECT_EQ(s.values.method.kind, ShapleyMethod::Kind::kSampled);
  EXPECT_EQ(AttributionToJson(s).dump(), AttributionToJson(Explain(*pipeline_, *inst, cfg)).dump());

  const auto j = AttributionToJson(a);
  EXPECT_EQ(j["tokens"].size(), a.tokens.size());
  EXPECT_EQ(j["phi0"].size(), 3u);
  EXPECT_NE(AttributionToSvg(a).find("<svg"), std::string::npos);
}

TEST_F(PipelineTest, MaskedTokensBecomeMaskPlaceholders) {
  const AspectInstance* inst = FirstInstance();
  ASSERT_NE(inst, nullptr);
  const auto refs = FlattenTokens(*inst);
  const auto masked = MaskInstance(*inst, refs, Coalition(refs.size()));
  for (const auto* set : {&masked.first, &masked.second}) {
    for (const auto& s : set->sentences) {
      for (const auto& t : s.tokens) EXPECT_EQ(t, kMaskToken);
    }
  }
  EXPECT_EQ(FlattenTokens(masked).size(), refs.size());
  testing::ExpectError(ErrorCode::kWidthMismatch,
                       [&] { MaskInstance(*inst, refs, Coalition(refs.size() + 1)); });
}

TEST_F(PipelineTest, ExplainRejectsGatedInstance) {
  AspectInstance empty;
  testing::ExpectError(ErrorCode::kEmptySide, [&] { Explain(*pipeline_, empty, {}); });
}

TEST_F(PipelineTest, FaithfulnessStartsAtBaseline) {
  ExplainConfig cfg;
  cfg.mode = ExplainConfig::Mode::kSampled;
  cfg.n_permutations = 5;
  const auto ranked = RankAdjectives(*pipeline_, split_->test, cfg);
  const auto curves = FaithfulnessCurves(*pipeline_, ranked, {2, 1});
  const double baseline = Evaluate(*pipeline_, split_->test).overall.macro.f1;
  ASSERT_EQ(curves.size(), 2u);
  for (const auto& c : curves) {
    ASSERT_EQ(c.points.size(), 3u);
    EXPECT_EQ(c.points[0].first, 0u);
    EXPECT_EQ(c.points[0].second, baseline);
  }
  const std::string csv = CurvesToCsv(curves);
  EXPECT_EQ(csv.rfind("strategy,k,macro_f1\n", 0), 0u);
}

TEST_F(PipelineTest, EmptyTestSet) {
  testing::ExpectError(ErrorCode::kEmptyTestSet, [&] { Evaluate(*pipeline_, Corpus{}); });
  testing::ExpectError(ErrorCode::kEmptyTestSet,
                       [&] { RankAdjectives(*pipeline_, Corpus{}, {}); });
}

TEST_F(PipelineTest, EvaluationOutputs) {
  const Evaluation ev = Evaluate(*pipeline_, split_->test);
  EXPECT_EQ(ev.predictions.size(), split_->test.size());
  const auto j = EvaluationToJson(ev);
  EXPECT_TRUE(j.contains("overall"));
  const std::string jsonl = PredictionsJsonl(split_->test, ev);
  EXPECT_EQ(static_cast<std::size_t>(std::count(jsonl.begin(), jsonl.end(), '\n')),
            split_->test.size());
}

TEST(Ablation, Rows) {
  const Corpus corpus = GenerateSynthetic(testing::SmallGeneratorConfig(40), 8);
  const auto split = Split(corpus, {0.6, 0.2, 0.2}, 8);
  auto cfg = SmallConfig();
  cfg.rating_train.epochs = 1;
  cfg.semantic.train.epochs = 1;
  const auto one = RunAblation(split.train, split.test, cfg, {"full"});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].variant, "full");
  EXPECT_EQ(one[0].delta_macro_f1, 0.0);

  const auto three = RunAblation(split.train, split.test, cfg,
                                 {"no-semantic-branch", "full", "no-rating-branch"});
  ASSERT_EQ(three.size(), 3u);
  EXPECT_EQ(three[0].variant, "full");
  EXPECT_EQ(three[0].macro_f1, one[0].macro_f1);
  EXPECT_NEAR(three[1].delta_macro_f1, three[0].macro_f1 - three[1].macro_f1, 1e-15);
  EXPECT_EQ(AblationToCsv(three).substr(0, 7), "variant");

  testing::ExpectError(ErrorCode::kUnknownVariant,
                       [&] { RunAblation(split.train, split.test, cfg, {"no-lexicon"}); });
}

TEST(VariantOptions, Mapping) {
  const PipelineOptions base;
  EXPECT_FALSE(VariantOptions("no-semantic-branch", base).use_semantic);
  EXPECT_FALSE(VariantOptions("no-rating-branch", base).use_rating);
  EXPECT_EQ(VariantOptions("no-aspect-classification", base).routing, RoutingMode::kAll);
  EXPECT_EQ(VariantOptions("concat-single-classifier", base).branch_count(), 1u);
  EXPECT_EQ(VariantOptions("full", base).branch_count(), 2u);
}

TEST(PipelineConfig, LoadsShippedConfig) {
  const auto cfg = Config::Load(testing::DataDir() / "xcom.ini");
  const auto p = LoadPipelineConfig(cfg, 9);
  EXPECT_EQ(p.seed, 9u);
  EXPECT_TRUE(std::filesystem::exists(p.lexicon_path));
  testing::ExpectError(ErrorCode::kInvalidConfig,
                       [] { LoadPipelineConfig(Config::FromString("[model]\n"), 1); });
  testing::ExpectError(ErrorCode::kInvalidConfig, [] {
    LoadPipelineConfig(Config::FromString("[model]\nlexicon=x\nrouting=random\n"), 1);
  });
}

TEST(MirrorLabel, Swaps) {
  EXPECT_EQ(MirrorLabel(ComparativeLabel::kWorse), ComparativeLabel::kBetter);
  EXPECT_EQ(MirrorLabel(ComparativeLabel::kSimilar), ComparativeLabel::kSimilar);
  EXPECT_EQ(MirrorLabel(ComparativeLabel::kNull), ComparativeLabel::kNull);
}

}  // namespace
}  // namespace xcom
