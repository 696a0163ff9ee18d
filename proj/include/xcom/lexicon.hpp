#ifndef XCOM_LEXICON_HPP_
#define XCOM_LEXICON_HPP_

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "xcom/error.hpp"
#include "xcom/text.hpp"
#include "xcom/types.hpp"

namespace xcom {

// Adjective -> rating in [0, 5]. Keys are stored normalized.
class Lexicon {
 public:
  Lexicon() = default;

  void Add(std::string_view word, double score) {
    if (!(score >= kMinRating && score <= kMaxRating)) {
      throw Error(ErrorCode::kScoreOutOfRange,
                  "lexicon score out of [0, 5] for '" + std::string(word) +
                      "'");
    }
    std::string key = text::Normalize(word);
    if (key.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "empty lexicon entry");
    }
    entries_[std::move(key)] = score;
  }

  std::optional<double> Find(std::string_view token) const {
    const auto it = entries_.find(std::string(token));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  bool Contains(std::string_view token) const {
    return entries_.contains(std::string(token));
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, double>& entries() const { return entries_; }

 private:
  std::map<std::string, double> entries_;
};

// TSV "adjective<TAB>score"; blank lines and '#' comments ignored.
inline Lexicon LoadLexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open lexicon " + path.string());
  Lexicon lexicon;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kParseError, "expected adjective<TAB>score",
                  line_no);
    }
    double score = 0.0;
    try {
      std::size_t used = 0;
      score = std::stod(line.substr(tab + 1), &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, "bad score", line_no);
    }
    lexicon.Add(line.substr(0, tab), score);
  }
  return lexicon;
}

}  // namespace xcom

#endif  // XCOM_LEXICON_HPP_
