#include <gtest/gtest.h>

#include "xcom/text.hpp"

namespace xcom::text {
namespace {

TEST(Normalize, LowercasesAndCollapsesWhitespace) {
  EXPECT_EQ(Normalize("Great  TASTE!"), "great taste!");
  EXPECT_EQ(Normalize("  a\t\nb  "), "a b");
  EXPECT_EQ(Normalize(""), "");
}

TEST(Normalize, ComposesDecomposedInput) {
  // "Cafe" + combining acute accent, upper case.
  const std::string decomposed = "CAFE\xCC\x81";
  const std::string composed = "caf\xC3\xA9";
  EXPECT_EQ(Normalize(decomposed), composed);
  EXPECT_EQ(Normalize(composed), composed);
}

TEST(Normalize, IsIdempotent) {
  for (const char* s : {"Hello   World.", "  x  ", "ÀÉÎ  õü", "Dr. Who VS. me"}) {
    const auto once = Normalize(s);
    EXPECT_EQ(Normalize(once), once);
  }
}

TEST(SplitSentences, SplitsOnTerminators) {
  const auto s = SplitSentences("it pours dark. smells great.");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], "it pours dark.");
  EXPECT_EQ(s[1], "smells great.");
}

TEST(SplitSentences, RespectsAbbreviations) {
  EXPECT_EQ(SplitSentences("i drink it vs. the lager.").size(), 1u);
}

TEST(SplitSentences, WholeTextWithoutTerminator) {
  const auto s = SplitSentences("no terminator here");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], "no terminator here");
  EXPECT_TRUE(SplitSentences("").empty());
}

TEST(SplitSentences, MixedTerminators) {
  const auto s = SplitSentences("wow! is it good? yes.");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[1], "is it good?");
}

TEST(Tokenize, SeparatesPunctuation) {
  EXPECT_EQ(Tokenize("rich, smooth taste"),
            (std::vector<std::string>{"rich", ",", "smooth", "taste"}));
  EXPECT_EQ(Tokenize("good!"), (std::vector<std::string>{"good", "!"}));
  EXPECT_TRUE(Tokenize("").empty());
}

TEST(Tokenize, KeepsNonAsciiLetters) {
  EXPECT_EQ(Tokenize("caf\xC3\xA9 au lait."),
            (std::vector<std::string>{"caf\xC3\xA9", "au", "lait", "."}));
}

}  // namespace
}  // namespace xcom::text
