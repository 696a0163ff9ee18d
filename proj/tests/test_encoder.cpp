#include <gtest/gtest.h>

#include "grad_checks.hpp"
#include "test_util.hpp"
#include "xcom/classifier.hpp"
#include "xcom/scoring.hpp"
#include "xcom/semantic.hpp"

namespace xcom {
namespace {

using testing::GradientCheck;
using testing::PerturbedModel;
using testing::RandomSequence;

TEST(GradientCheck, SemanticEncoderAndHead) {
  const EncoderShape shape{12, 8, 10, 2};
  EXPECT_LE(GradientCheck({shape}, {{7}, {5}}, 1), 1e-4);
}

TEST(GradientCheck, HeadCounts) {
  for (std::size_t heads : {1u, 2u, 8u}) {
    const EncoderShape shape{12, 8, 10, 2, heads};
    EXPECT_LE(GradientCheck({shape}, {{7}, {5}, {4}}, 10 + heads), 1e-4) << heads << " heads";
  }
}

TEST(Encoder, HeadsMustDivideDim) {
  Rng rng(1);
  testing::ExpectError(ErrorCode::kInvalidConfig,
                       [&] { EncoderParams::Random(EncoderShape{12, 8, 10, 2, 3}, rng); });
}

TEST(GradientCheck, RatingEncoderAndHead) {
  Rng rng(2);
  SequenceClassifier model = PerturbedModel({RatingEncoderShape(8)}, rng);
  const std::vector<LabeledSequences> samples = {
      {{RatingSequence(1.2, 3.4)}, 0}, {{RatingSequence(4.0, 4.1)}, 1}};
  SequenceClassifier grad;
  LossAndGradient(model, samples, grad);
  EXPECT_LE(testing::MaxRelativeError(model.AllTensors(), grad.AllTensors(),
                                      [&] { return MeanLoss(model, samples); }),
            1e-4);
}

TEST(GradientCheck, TwoEncodersOneHead) {
  const EncoderShape a{9, 8, 8, 2};
  const EncoderShape b{11, 8, 10, 2};
  EXPECT_LE(GradientCheck({a, b}, {{5, 7}, {3, 9}}, 3), 1e-4);
}

TEST(GradientCheck, SingleTokenSequence) {
  const EncoderShape shape{6, 8, 8, 2};
  EXPECT_LE(GradientCheck({shape}, {{1}, {2}}, 4), 1e-4);
}

TEST(Encoder, OutputShapeAndDeterminism) {
  Rng rng(5);
  const EncoderShape shape{20, 16, 32, 2};
  const auto p = EncoderParams::Random(shape, rng);
  for (std::size_t n : {1u, 4u, 32u}) {
    const auto s = RandomSequence(shape, n, rng);
    const RowVector z = Encoder::Encode(p, s);
    EXPECT_EQ(z.size(), 16);
    EXPECT_EQ(z, Encoder::Encode(p, s));
    EXPECT_TRUE(z.allFinite());
  }
  testing::ExpectError(ErrorCode::kDimMismatch,
                       [&] { Encoder::Encode(p, RandomSequence(shape, 33, rng)); });
}

TEST(Encoder, JsonRoundTrip) {
  Rng rng(6);
  const EncoderShape shape{10, 8, 16, 2};
  const auto p = EncoderParams::Random(shape, rng);
  const auto q = EncoderFromJson(nlohmann::json::parse(EncoderToJson(p).dump()));
  const auto s = RandomSequence(shape, 9, rng);
  EXPECT_EQ(Encoder::Encode(p, s), Encoder::Encode(q, s));
}

TEST(LinearHead, ZeroInputAndZeroHead) {
  Rng rng(7);
  const auto h = LinearHead::Random(8, rng);
  const RowVector z0 = RowVector::Zero(8);
  EXPECT_EQ(SemanticLogits(z0, h), RowVector(h.bias.row(0)));
  const auto zero = LinearHead::Zeros(8);
  RowVector z(8);
  for (Eigen::Index i = 0; i < 8; ++i) z(i) = rng.Normal();
  EXPECT_EQ(SemanticLogits(z, zero).cwiseAbs().maxCoeff(), 0.0);
  testing::ExpectError(ErrorCode::kDimMismatch, [&] { SemanticLogits(RowVector::Zero(7), h); });
}

std::vector<std::string> Words(const std::string& s) { return text::Tokenize(s); }

TEST(PairInput, LayoutAndPadding) {
  const auto vocab = Vocabulary::Build({Words("a b c"), Words("d e")});
  const auto in = BuildPairInput(Words("a b c"), Words("d e"), vocab, 12);
  ASSERT_EQ(in.ids.size(), 12u);
  EXPECT_FALSE(in.truncated);
  EXPECT_EQ(in.ids[0], kClsId);
  EXPECT_EQ(in.ids[4], kSepId);
  EXPECT_EQ(in.ids[7], kSepId);
  EXPECT_EQ(in.segments[5], 1);
  EXPECT_EQ(in.attention_mask[8], 0);
  EXPECT_EQ(in.Prefix().size(), 8u);
  EXPECT_EQ(vocab.Id("zzz"), kUnkId);
}

TEST(PairInput, TruncationKeepsHeadOfEachSide) {
  const std::vector<std::string> long_side(20, "a");
  const std::vector<std::string> short_side = {"b", "c"};
  const auto vocab = Vocabulary::Build({long_side, short_side});
  auto in = BuildPairInput(long_side, short_side, vocab, 10);
  EXPECT_TRUE(in.truncated);
  EXPECT_EQ(in.Prefix().size(), 10u);
  // 7 content slots: the short side keeps both tokens, the long side the rest.
  EXPECT_EQ(in.ids[6], kSepId);
  in = BuildPairInput(long_side, long_side, vocab, 11);
  EXPECT_EQ(in.ids[5], kSepId);  // 8 slots split 4 / 4
  EXPECT_EQ(in.Prefix().size(), 11u);
}

TEST(EncodePair, EmptySide) {
  Rng rng(8);
  SemanticModel m;
  m.vocab = Vocabulary::Build({Words("x y")});
  m.max_len = 16;
  m.model = SequenceClassifier::Random({{m.vocab.size(), 8, 16, 2}}, rng);
  AspectSentenceSet a{Aspect::kTaste, Side::kFirst, {}};
  AspectSentenceSet b{Aspect::kTaste, Side::kSecond, {Sentence{"x.", Words("x."), "r", 0}}};
  testing::ExpectError(ErrorCode::kEmptySide, [&] { EncodePair(a, b, m); });
  a.sentences = b.sentences;
  EXPECT_EQ(EncodePair(a, b, m).size(), 8);
}

// Label = which side holds the "hi" token; other tokens are noise.
std::vector<SemanticSample> SeparablePairs(std::size_t n, Rng& rng) {
  const std::vector<std::string> noise = {"the", "beer", "is", "a", "glass", "of"};
  std::vector<SemanticSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    SemanticSample s;
    for (int k = 0; k < 3; ++k) {
      s.first.push_back(noise[rng.Index(noise.size())]);
      s.second.push_back(noise[rng.Index(noise.size())]);
    }
    const std::size_t c = rng.Index(3);
    if (c == 0) s.second.push_back("hi");
    if (c == 2) s.first.push_back("hi");
    if (c == 1) {
      s.first.push_back("lo");
      s.second.push_back("lo");
    }
    s.label = LabelFromClassIndex(c);
    out.push_back(s);
  }
  return out;
}

TEST(TrainSemanticBranch, FitsSeparablePairs) {
  Rng rng(9);
  const auto samples = SeparablePairs(120, rng);
  SemanticTrainConfig cfg;
  cfg.dim = 16;
  cfg.max_len = 16;
  cfg.train.epochs = 60;
  std::vector<double> loss;
  const auto m = TrainSemanticBranch(samples, cfg, &loss);
  std::size_t correct = 0;
  for (const auto& s : samples) {
    const RowVector z = m.EmbedTokens(s.first, s.second);
    const RowVector l = SemanticLogits(z, m.head());
    Eigen::Index k;
    l.maxCoeff(&k);
    correct += static_cast<std::size_t>(k) == ClassIndex(s.label);
  }
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(samples.size()), 0.95);
  EXPECT_LT(loss.back(), loss.front());

  std::vector<double> again;
  TrainSemanticBranch(samples, cfg, &again);
  EXPECT_EQ(loss, again);
}

TEST(TrainClassifier, AdamAlsoFits) {
  Rng rng(10);
  const auto samples = SeparablePairs(120, rng);
  SemanticTrainConfig cfg;
  cfg.dim = 16;
  cfg.max_len = 16;
  cfg.train.epochs = 30;
  cfg.train.optimizer = BranchTrainConfig::Optimizer::kAdam;
  cfg.train.learning_rate = 0.01;
  std::vector<double> loss;
  TrainSemanticBranch(samples, cfg, &loss);
  EXPECT_LT(loss.back(), 0.2 * loss.front());
}

TEST(TrainClassifier, DegenerateLabels) {
  Rng rng(11);
  auto samples = SeparablePairs(10, rng);
  for (auto& s : samples) s.label = ComparativeLabel::kBetter;
  testing::ExpectError(ErrorCode::kDegenerateLabels,
                       [&] { TrainSemanticBranch(samples, SemanticTrainConfig{}); });
}

TEST(TrainRatingHead, LearnsScoreComparison) {
  // Scores on the half-point grid of the shipped lexicon.
  Rng rng(12);
  std::vector<RatingSample> samples;
  for (int i = 0; i < 400; ++i) {
    const double a = 0.5 * static_cast<double>(1 + rng.Index(10));
    const double b = 0.5 * static_cast<double>(1 + rng.Index(10));
    samples.push_back({a, b, LabelFromScores(a, b, 0.25)});
  }
  BranchTrainConfig cfg;
  cfg.epochs = 60;
  cfg.optimizer = BranchTrainConfig::Optimizer::kAdam;
  cfg.learning_rate = 0.01;
  std::vector<double> loss;
  const auto head = TrainRatingHead(samples, 16, cfg, &loss);
  std::size_t correct = 0;
  for (const auto& s : samples) {
    Eigen::Index k;
    RatingLogits(s.first, s.second, head).maxCoeff(&k);
    correct += static_cast<std::size_t>(k) == ClassIndex(s.label);
  }
  EXPECT_GE(static_cast<double>(correct) / 400.0, 0.95);
  EXPECT_LT(loss.back(), loss.front());
}

}  // namespace
}  // namespace xcom
