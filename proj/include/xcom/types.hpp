#ifndef XCOM_TYPES_HPP_
#define XCOM_TYPES_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "xcom/error.hpp"

namespace xcom {

enum class Aspect { kAppearance = 0, kAroma = 1, kPalate = 2, kTaste = 3 };

inline constexpr std::size_t kNumAspects = 4;
inline constexpr std::array<Aspect, kNumAspects> kAllAspects = {
    Aspect::kAppearance, Aspect::kAroma, Aspect::kPalate, Aspect::kTaste};

inline constexpr std::size_t Index(Aspect a) {
  return static_cast<std::size_t>(a);
}

inline std::string_view AspectName(Aspect a) {
  static constexpr std::array<std::string_view, kNumAspects> kNames = {
      "appearance", "aroma", "palate", "taste"};
  return kNames[Index(a)];
}

inline std::optional<Aspect> ParseAspect(std::string_view name) {
  for (Aspect a : kAllAspects) {
    if (AspectName(a) == name) return a;
  }
  return std::nullopt;
}

// Worse/Similar/Better carry the integer codes -1/0/1; Null has none.
enum class ComparativeLabel { kWorse, kSimilar, kBetter, kNull };

inline constexpr std::size_t kNumClasses = 3;

inline std::optional<int> LabelCode(ComparativeLabel label) {
  switch (label) {
    case ComparativeLabel::kWorse: return -1;
    case ComparativeLabel::kSimilar: return 0;
    case ComparativeLabel::kBetter: return 1;
    case ComparativeLabel::kNull: return std::nullopt;
  }
  return std::nullopt;
}

inline ComparativeLabel LabelFromCode(std::optional<int> code) {
  if (!code) return ComparativeLabel::kNull;
  switch (*code) {
    case -1: return ComparativeLabel::kWorse;
    case 0: return ComparativeLabel::kSimilar;
    case 1: return ComparativeLabel::kBetter;
    default:
      throw Error(ErrorCode::kParseError,
                  "label code must be -1, 0, 1 or null, got " +
                      std::to_string(*code));
  }
}

// Class index in probability vectors: Worse=0, Similar=1, Better=2.
inline std::size_t ClassIndex(ComparativeLabel label) {
  return static_cast<std::size_t>(label);
}

inline ComparativeLabel LabelFromClassIndex(std::size_t k) {
  return static_cast<ComparativeLabel>(k);
}

inline std::string_view LabelName(ComparativeLabel label) {
  static constexpr std::array<std::string_view, 4> kNames = {
      "worse", "similar", "better", "null"};
  return kNames[static_cast<std::size_t>(label)];
}

inline constexpr double kMinRating = 0.0;
inline constexpr double kMaxRating = 5.0;

}  // namespace xcom

#endif  // XCOM_TYPES_HPP_
