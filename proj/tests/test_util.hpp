#ifndef XCOM_TESTS_TEST_UTIL_HPP_
#define XCOM_TESTS_TEST_UTIL_HPP_

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "xcom/corpus.hpp"
#include "xcom/encoder.hpp"
#include "xcom/error.hpp"

namespace xcom::testing {

inline std::filesystem::path TempPath(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "xcom_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline std::filesystem::path WriteTemp(const std::string& name, const std::string& content) {
  const auto path = TempPath(name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

inline void ExpectError(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << ErrorCodeName(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

inline std::filesystem::path DataDir() { return XCOM_DATA_DIR; }

inline GeneratorConfig SmallGeneratorConfig(std::size_t n_pairs) {
  GeneratorConfig cfg;
  cfg.n_pairs = n_pairs;
  cfg.n_users = 10;
  cfg.lexicon = LoadLexicon(DataDir() / "lexicon.tsv");
  cfg.templates = LoadTemplates(DataDir() / "templates.tsv");
  return cfg;
}

// Central differences over every entry of every tensor; returns the largest
// relative error |a - n| / max(|a| + |n|, floor).
template <typename Loss>
double MaxRelativeError(std::vector<Matrix*> params, const std::vector<Matrix*>& grads,
                        Loss loss, double h = 1e-5, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix& p = *params[t];
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + h;
      const double up = loss();
      p.data()[i] = saved - h;
      const double down = loss();
      p.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grads[t]->data()[i];
      const double rel =
          std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), floor);
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace xcom::testing

#endif  // XCOM_TESTS_TEST_UTIL_HPP_
