#ifndef XCOM_VOCAB_HPP_
#define XCOM_VOCAB_HPP_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xcom/error.hpp"

namespace xcom {

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kMaskToken = "[MASK]";

// Special tokens occupy the first ids in this order.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;
inline constexpr int kMaskId = 4;
inline constexpr int kNumSpecialTokens = 5;

class Vocabulary {
 public:
  Vocabulary() {
    for (auto t : {kPadToken, kUnkToken, kClsToken, kSepToken, kMaskToken}) {
      Add(std::string(t));
    }
  }

  // Adds the tokens in lexicographic order so ids do not depend on corpus
  // order.
  static Vocabulary Build(const std::vector<std::vector<std::string>>& docs) {
    std::map<std::string, int> seen;
    for (const auto& d : docs) {
      for (const auto& t : d) seen.emplace(t, 0);
    }
    Vocabulary v;
    for (const auto& [t, unused] : seen) v.Add(t);
    return v;
  }

  int Add(const std::string& token) {
    const auto [it, inserted] =
        ids_.emplace(token, static_cast<int>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  int Id(std::string_view token) const {
    const auto it = ids_.find(std::string(token));
    return it == ids_.end() ? kUnkId : it->second;
  }

  const std::string& Token(int id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }

  nlohmann::json ToJson() const { return tokens_; }

  static Vocabulary FromJson(const nlohmann::json& j) {
    Vocabulary v;
    const auto tokens = j.get<std::vector<std::string>>();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i < static_cast<std::size_t>(kNumSpecialTokens)) {
        if (tokens[i] != v.tokens_[i]) {
          throw Error(ErrorCode::kParseError, "vocabulary specials out of order");
        }
        continue;
      }
      v.Add(tokens[i]);
    }
    return v;
  }

 private:
  std::map<std::string, int> ids_;
  std::vector<std::string> tokens_;
};

}  // namespace xcom

#endif  // XCOM_VOCAB_HPP_
