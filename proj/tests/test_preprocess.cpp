#include <gtest/gtest.h>

#include "test_util.hpp"
#include "xcom/preprocess.hpp"
#include "xcom/tfidf.hpp"

namespace xcom {
namespace {

Sentence MakeSentence(const std::string& text) {
  Sentence s;
  s.text = text;
  s.tokens = text::Tokenize(text);
  return s;
}

TEST(TfIdf, IdfAndNormalization) {
  const auto m = TfIdfModel::Fit({{"a", "b"}, {"a"}, {"c"}});
  ASSERT_EQ(m.dim(), 3u);
  // idf(a) = ln(4/3) + 1, idf(b) = ln(4/2) + 1.
  const auto v = m.Transform({"a", "b", "b", "zzz"});
  const double ia = std::log(4.0 / 3.0) + 1.0;
  const double ib = std::log(2.0) + 1.0;
  const double norm = std::sqrt(ia * ia + 4.0 * ib * ib);
  EXPECT_NEAR(v[0], ia / norm, 1e-12);
  EXPECT_NEAR(v[1], 2.0 * ib / norm, 1e-12);
  EXPECT_EQ(v[2], 0.0);
  const auto empty = m.Transform({"zzz"});
  for (double x : empty) EXPECT_EQ(x, 0.0);
}

TEST(TfIdf, JsonRoundTrip) {
  const auto m = TfIdfModel::Fit({{"x", "y"}, {"y", "z"}});
  const auto n = TfIdfModel::FromJson(m.ToJson());
  EXPECT_EQ(m.Transform({"y", "z"}), n.Transform({"y", "z"}));
}

TEST(LogisticObjective, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  std::vector<std::vector<double>> rows(6, std::vector<double>(8));
  std::vector<int> labels;
  for (auto& r : rows) {
    for (double& x : r) x = rng.Normal();
    labels.push_back(rng.Bernoulli(0.5));
  }
  labels[0] = 1;
  labels[1] = 0;
  const LogisticObjective obj{rows, labels, 0.01};
  Matrix w(1, 8), b(1, 1), gw(1, 8), gb(1, 1);
  for (Eigen::Index i = 0; i < 8; ++i) w(0, i) = rng.Normal();
  b(0, 0) = 0.3;
  auto as_vec = [&w] { return std::vector<double>(w.data(), w.data() + w.size()); };
  std::vector<double> grad;
  double grad_b = 0;
  obj.Gradient(as_vec(), b(0, 0), grad, grad_b);
  for (int i = 0; i < 8; ++i) gw(0, i) = grad[i];
  gb(0, 0) = grad_b;
  const double err = testing::MaxRelativeError(
      {&w, &b}, {&gw, &gb}, [&] { return obj.Loss(as_vec(), b(0, 0)); });
  EXPECT_LE(err, 1e-4);
}

struct AspectData {
  std::vector<Sentence> sentences;
  std::vector<int> labels;
};

AspectData SeparableData(std::size_t n, std::uint64_t seed) {
  const std::vector<std::string> on = {"the taste is", "flavor feels", "it tastes"};
  const std::vector<std::string> off = {"the color is", "the aroma is", "it smells"};
  const std::vector<std::string> adj = {"good", "bad", "fine", "great"};
  Rng rng(seed);
  AspectData d;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = rng.Bernoulli(0.5);
    const auto& pool = pos ? on : off;
    d.sentences.push_back(
        MakeSentence(pool[rng.Index(pool.size())] + " " + adj[rng.Index(adj.size())] + "."));
    d.labels.push_back(pos);
  }
  return d;
}

TEST(AspectClassifier, LearnsSeparableData) {
  const auto train = SeparableData(80, 1);
  const auto test = SeparableData(200, 2);
  const auto c = AspectClassifier::Train(train.sentences, train.labels, Aspect::kTaste, {});
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.sentences.size(); ++i) {
    correct += c.Classify(test.sentences[i].tokens) == static_cast<bool>(test.labels[i]);
  }
  EXPECT_GE(static_cast<double>(correct) / 200.0, 0.95);
  // Full-batch descent on a convex objective: the loss never goes up.
  const auto& h = c.loss_history();
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1] + 1e-12);
}

TEST(AspectClassifier, DegenerateLabels) {
  const auto d = SeparableData(10, 1);
  const std::vector<int> ones(d.sentences.size(), 1);
  testing::ExpectError(ErrorCode::kDegenerateLabels, [&] {
    AspectClassifier::Train(d.sentences, ones, Aspect::kTaste, {});
  });
}

TEST(AspectClassifier, DeterministicAndSerializable) {
  const auto d = SeparableData(40, 4);
  AspectTrainConfig cfg;
  cfg.seed = 9;
  const auto a = AspectClassifier::Train(d.sentences, d.labels, Aspect::kAroma, cfg);
  const auto b = AspectClassifier::Train(d.sentences, d.labels, Aspect::kAroma, cfg);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(a.bias(), b.bias());
  const auto c = AspectClassifier::FromJson(a.ToJson());
  EXPECT_EQ(c.weights(), a.weights());
  EXPECT_EQ(c.Probability(d.sentences[0].tokens), a.Probability(d.sentences[0].tokens));
}

TEST(AspectClassifier, ThresholdTieIsNegative) {
  const auto d = SeparableData(20, 5);
  auto j = AspectClassifier::Train(d.sentences, d.labels, Aspect::kTaste, {}).ToJson();
  for (auto& w : j["weights"]) w = 0.0;
  j["bias"] = 0.0;
  const auto c = AspectClassifier::FromJson(j);
  EXPECT_DOUBLE_EQ(c.Probability(d.sentences[0].tokens), 0.5);
  EXPECT_FALSE(c.Classify(d.sentences[0].tokens));
}

TEST(BuildAspectPairs, RoutesAndLeavesMissingAspectsEmpty) {
  Review first{"u", "a", "The taste is great. The color is dark.", std::nullopt, std::nullopt};
  Review second{"u", "b", "It tastes bad.", std::nullopt, std::nullopt};
  const auto d = SeparableData(80, 1);
  AspectClassifiers cls;
  for (Aspect a : kAllAspects) {
    std::vector<int> labels = d.labels;
    if (a != Aspect::kTaste) {
      for (int& y : labels) y = 1 - y;
    }
    cls[Index(a)] = AspectClassifier::Train(d.sentences, labels, a, {});
  }
  const auto set = BuildAspectPairs(first, second, cls);
  EXPECT_EQ(set.at(Aspect::kTaste).first.sentences.size(), 1u);
  EXPECT_EQ(set.at(Aspect::kTaste).second.sentences.size(), 1u);
  EXPECT_EQ(set.at(Aspect::kTaste).first.side, Side::kFirst);
  EXPECT_EQ(set.at(Aspect::kTaste).second.side, Side::kSecond);
  EXPECT_EQ(set.at(Aspect::kAppearance).first.sentences.size(), 1u);
  EXPECT_TRUE(set.at(Aspect::kAppearance).second.empty());
}

TEST(AnnotationRouter, FollowsSentenceAspects) {
  Review first{"u", "a", "The taste is great. Nice day.", std::nullopt,
               std::vector<std::vector<Aspect>>{{Aspect::kTaste}, {}}};
  Review second{"u", "b", "Smells good.", std::nullopt,
                std::vector<std::vector<Aspect>>{{Aspect::kAroma}}};
  const auto set = AssembleAspectPairs(PreprocessReview(first), PreprocessReview(second),
                                       AnnotationRouter(first, second));
  EXPECT_EQ(set.at(Aspect::kTaste).first.sentences.size(), 1u);
  EXPECT_TRUE(set.at(Aspect::kTaste).second.empty());
  EXPECT_EQ(set.at(Aspect::kAroma).second.sentences.size(), 1u);
  Review bare{"u", "c", "x.", std::nullopt, std::nullopt};
  testing::ExpectError(ErrorCode::kMissingField, [&] {
    AssembleAspectPairs(PreprocessReview(bare), PreprocessReview(second),
                        AnnotationRouter(bare, second));
  });
}

}  // namespace
}  // namespace xcom
