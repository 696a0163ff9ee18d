#ifndef XCOM_SHAPLEY_HPP_
#define XCOM_SHAPLEY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xcom/error.hpp"
#include "xcom/rng.hpp"
#include "xcom/types.hpp"
#include "xcom/vocab.hpp"

namespace xcom {

// Presence mask over the M features of one instance (true = kept).
class Coalition {
 public:
  explicit Coalition(std::size_t width, bool full = false)
      : width_(width), words_((width + 63) / 64, 0) {
    if (full) {
      for (std::size_t i = 0; i < width; ++i) Set(i, true);
    }
  }

  static Coalition FromBits(std::size_t width, std::uint64_t bits) {
    Coalition c(width);
    for (std::size_t i = 0; i < width; ++i) c.Set(i, (bits >> i) & 1U);
    return c;
  }

  std::size_t width() const { return width_; }
  bool Has(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void Set(std::size_t i, bool on) {
    const std::uint64_t bit = std::uint64_t{1} << (i % 64);
    if (on) {
      words_[i / 64] |= bit;
    } else {
      words_[i / 64] &= ~bit;
    }
  }
  std::size_t Count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(__builtin_popcountll(w));
    return n;
  }

  bool operator==(const Coalition&) const = default;

  struct Hash {
    std::size_t operator()(const Coalition& c) const {
      std::uint64_t h = c.width_;
      for (auto w : c.words_) h = Rng::Mix(h, w);
      return static_cast<std::size_t>(h);
    }
  };

 private:
  std::size_t width_;
  std::vector<std::uint64_t> words_;
};

// Absent positions become [MASK]; length is preserved.
inline std::vector<std::string> MaskApply(std::span<const std::string> tokens,
                                          const Coalition& coalition) {
  if (coalition.width() != tokens.size()) {
    throw Error(ErrorCode::kWidthMismatch,
                std::to_string(coalition.width()) + " vs " +
                    std::to_string(tokens.size()));
  }
  std::vector<std::string> out(tokens.begin(), tokens.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!coalition.Has(i)) out[i] = std::string(kMaskToken);
  }
  return out;
}

using ClassValues = std::array<double, kNumClasses>;
// Model output per class for the instance restricted to a coalition.
using ValueFunction = std::function<ClassValues(const Coalition&)>;

struct ShapleyMethod {
  enum class Kind { kExact, kSampled } kind = Kind::kExact;
  std::size_t n_permutations = 0;
  std::uint64_t seed = 0;
};

struct ShapleyValues {
  std::vector<ClassValues> phi;  // M rows
  ClassValues phi0{};            // value of the empty coalition
  std::optional<std::vector<ClassValues>> std_error;  // sampled only
  ShapleyMethod method;

  // phi0 + sum_j phi_j z_j for an arbitrary presence vector.
  ClassValues Surrogate(const Coalition& z) const {
    ClassValues g = phi0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
      if (!z.Has(j)) continue;
      for (std::size_t c = 0; c < kNumClasses; ++c) g[c] += phi[j][c];
    }
    return g;
  }
};

inline constexpr std::size_t kDefaultExactLimit = 16;

// Enumerates all 2^M coalitions once and applies the Shapley weights
// |S|! (M - |S| - 1)! / M! to every marginal contribution.
inline ShapleyValues ExactShapley(const ValueFunction& f, std::size_t m,
                                  std::size_t exact_limit = kDefaultExactLimit) {
  if (m > exact_limit || m > 30) {
    throw Error(ErrorCode::kTooManyTokens,
                std::to_string(m) + " > " + std::to_string(exact_limit));
  }
  const std::uint64_t n_coalitions = std::uint64_t{1} << m;
  std::vector<ClassValues> value(n_coalitions);
  for (std::uint64_t bits = 0; bits < n_coalitions; ++bits) {
    value[bits] = f(Coalition::FromBits(m, bits));
  }

  std::vector<double> factorial(m + 1, 1.0);
  for (std::size_t k = 1; k <= m; ++k) factorial[k] = factorial[k - 1] * k;
  std::vector<double> weight(m, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    weight[s] = factorial[s] * factorial[m - s - 1] / factorial[m];
  }

  ShapleyValues out;
  out.method = {ShapleyMethod::Kind::kExact, 0, 0};
  out.phi0 = value[0];
  out.phi.assign(m, ClassValues{});
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    for (std::uint64_t bits = 0; bits < n_coalitions; ++bits) {
      if (bits & bit) continue;
      const double w =
          weight[static_cast<std::size_t>(__builtin_popcountll(bits))];
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        out.phi[i][c] += w * (value[bits | bit][c] - value[bits][c]);
      }
    }
  }
  return out;
}

// Permutation-sampling estimator: the mean marginal contribution of each
// feature when features are inserted in uniformly random order. Coalition
// values are memoized, and each permutation telescopes to f(full) - f(empty),
// so the estimate satisfies efficiency exactly.
inline ShapleyValues SampledShapley(const ValueFunction& f, std::size_t m,
                                    std::size_t n_permutations,
                                    std::uint64_t seed) {
  if (n_permutations == 0) throw Error(ErrorCode::kZeroPermutations, "");
  std::unordered_map<Coalition, ClassValues, Coalition::Hash> cache;
  auto eval = [&](const Coalition& c) -> const ClassValues& {
    auto it = cache.find(c);
    if (it == cache.end()) it = cache.emplace(c, f(c)).first;
    return it->second;
  };

  ShapleyValues out;
  out.method = {ShapleyMethod::Kind::kSampled, n_permutations, seed};
  out.phi0 = eval(Coalition(m));
  std::vector<ClassValues> sum(m, ClassValues{});
  std::vector<ClassValues> sum_sq(m, ClassValues{});
  std::vector<std::size_t> order(m);
  Rng rng(seed);
  for (std::size_t p = 0; p < n_permutations; ++p) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.Shuffle(std::span(order));
    Coalition current(m);
    ClassValues previous = out.phi0;
    for (std::size_t j : order) {
      current.Set(j, true);
      const ClassValues& now = eval(current);
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double delta = now[c] - previous[c];
        sum[j][c] += delta;
        sum_sq[j][c] += delta * delta;
      }
      previous = now;
    }
  }
  const double n = static_cast<double>(n_permutations);
  out.phi.assign(m, ClassValues{});
  std::vector<ClassValues> se(m, ClassValues{});
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double mean = sum[j][c] / n;
      out.phi[j][c] = mean;
      if (n_permutations > 1) {
        const double var =
            std::max(0.0, (sum_sq[j][c] - n * mean * mean) / (n - 1.0));
        se[j][c] = std::sqrt(var / n);
      }
    }
  }
  out.std_error = std::move(se);
  return out;
}

struct TokenImportance {
  std::size_t index = 0;  // row in the attribution
  double importance = 0.0;
};

// Mean absolute Shapley value over the three classes, sorted descending;
// ties keep the earlier position first.
inline std::vector<TokenImportance> RankTokens(
    std::span<const ClassValues> phi) {
  std::vector<TokenImportance> out;
  out.reserve(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out.push_back({i, (std::abs(phi[i][0]) + std::abs(phi[i][1]) +
                       std::abs(phi[i][2])) /
                          3.0});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TokenImportance& a, const TokenImportance& b) {
                     return a.importance > b.importance;
                   });
  return out;
}

}  // namespace xcom

#endif  // XCOM_SHAPLEY_HPP_
