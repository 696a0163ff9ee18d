#ifndef XCOM_TEXT_HPP_
#define XCOM_TEXT_HPP_

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "xcom/error.hpp"

namespace xcom::text {

// NFC, lowercase, whitespace runs collapsed to one space, trimmed.
inline std::string Normalize(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC unavailable");

  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  s = nfc->normalize(s, status);
  s.toLower(icu::Locale::getRoot());
  s = nfc->normalize(s, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");

  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar>(u' '));
    pending_space = false;
    out.append(c);
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

inline const std::set<std::string>& DefaultAbbreviations() {
  static const std::set<std::string> kAbbreviations = {
      "mr.", "mrs.", "ms.", "dr.", "st.", "vs.", "etc.", "e.g.",
      "i.e.", "approx.", "no.", "oz.", "ml.", "abv.", "jr.", "sr."};
  return kAbbreviations;
}

// One abbreviation per line; blank lines and '#' comments ignored. Entries
// are normalized so they match normalized text.
inline std::set<std::string> LoadAbbreviations(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string entry = Normalize(line);
    if (entry.empty() || entry.front() == '#') continue;
    out.insert(std::move(entry));
  }
  return out;
}

namespace internal {

inline bool IsTerminator(char c) { return c == '.' || c == '!' || c == '?'; }

inline bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsAsciiSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsAsciiSpace(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace internal

// Splits after '.', '!' or '?' when followed by whitespace, unless the word
// ending at the terminator is a known abbreviation. Terminators stay attached.
inline std::vector<std::string> SplitSentences(
    std::string_view normalized,
    const std::set<std::string>& abbreviations = DefaultAbbreviations()) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    const std::string_view piece =
        internal::Trim(normalized.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i + 1 < normalized.size(); ++i) {
    if (!internal::IsTerminator(normalized[i]) ||
        !internal::IsAsciiSpace(normalized[i + 1])) {
      continue;
    }
    std::size_t word_begin = i;
    while (word_begin > start &&
           !internal::IsAsciiSpace(normalized[word_begin - 1])) {
      --word_begin;
    }
    const std::string word(normalized.substr(word_begin, i + 1 - word_begin));
    if (abbreviations.contains(word)) continue;
    emit(i + 1);
  }
  emit(normalized.size());
  return out;
}

// Whitespace split; every punctuation code point becomes its own token.
inline std::vector<std::string> Tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  const auto* bytes = reinterpret_cast<const uint8_t*>(sentence.data());
  const int32_t length = static_cast<int32_t>(sentence.size());
  for (int32_t i = 0; i < length;) {
    const int32_t begin = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    const std::string_view unit = sentence.substr(begin, i - begin);
    if (c < 0) {
      current.append(unit);
    } else if (u_isUWhiteSpace(c)) {
      flush();
    } else if (u_ispunct(c)) {
      flush();
      tokens.emplace_back(unit);
    } else {
      current.append(unit);
    }
  }
  flush();
  return tokens;
}

}  // namespace xcom::text

#endif  // XCOM_TEXT_HPP_
