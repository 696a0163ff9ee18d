#ifndef XCOM_TESTS_GAMES_HPP_
#define XCOM_TESTS_GAMES_HPP_

// Value functions with known structure for exercising the Shapley code.

#include <cmath>
#include <memory>
#include <vector>

#include "xcom/rng.hpp"
#include "xcom/shapley.hpp"

namespace xcom::testing {

// Model-like game: per-class logits from random unary and pairwise token
// weights, pushed through a softmax.
inline ValueFunction RandomSoftmaxGame(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  auto unary = std::make_shared<std::vector<ClassValues>>(m);
  auto pair = std::make_shared<std::vector<std::vector<ClassValues>>>(
      m, std::vector<ClassValues>(m, ClassValues{}));
  ClassValues bias;
  for (double& b : bias) b = rng.Normal();
  for (auto& row : *unary) {
    for (double& v : row) v = rng.Normal();
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      for (double& v : (*pair)[i][j]) v = 0.5 * rng.Normal();
    }
  }
  return [=](const Coalition& c) {
    ClassValues l = bias;
    for (std::size_t i = 0; i < m; ++i) {
      if (!c.Has(i)) continue;
      for (std::size_t k = 0; k < kNumClasses; ++k) l[k] += (*unary)[i][k];
      for (std::size_t j = i + 1; j < m; ++j) {
        if (!c.Has(j)) continue;
        for (std::size_t k = 0; k < kNumClasses; ++k) l[k] += (*pair)[i][j][k];
      }
    }
    const double mx = std::max({l[0], l[1], l[2]});
    double s = 0;
    for (double& v : l) s += (v = std::exp(v - mx));
    for (double& v : l) v /= s;
    return l;
  };
}

// Arbitrary game: an independent uniform value for every coalition.
inline ValueFunction RandomTableGame(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  auto table = std::make_shared<std::vector<ClassValues>>(std::size_t{1} << m);
  for (auto& row : *table) {
    for (double& v : row) v = rng.Uniform();
  }
  return [=](const Coalition& c) {
    std::size_t bits = 0;
    for (std::size_t i = 0; i < m; ++i) bits |= std::size_t{c.Has(i)} << i;
    return (*table)[bits];
  };
}

}  // namespace xcom::testing

#endif  // XCOM_TESTS_GAMES_HPP_
