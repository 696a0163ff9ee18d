#ifndef XCOM_TFIDF_HPP_
#define XCOM_TFIDF_HPP_

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcom/error.hpp"

namespace xcom {

// Raw term counts, smoothed idf = ln((1 + N) / (1 + df)) + 1, L2-normalized
// rows. Columns follow lexicographic token order.
class TfIdfModel {
 public:
  using Document = std::vector<std::string>;

  TfIdfModel() = default;

  static TfIdfModel Fit(const std::vector<Document>& docs) {
    if (docs.empty()) throw Error(ErrorCode::kEmptyTraining, "tf-idf fit");
    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
      const std::set<std::string> unique(doc.begin(), doc.end());
      for (const auto& t : unique) ++df[t];
    }
    TfIdfModel m;
    const double n = static_cast<double>(docs.size());
    for (const auto& [token, count] : df) {
      m.vocabulary_.emplace(token, m.idf_.size());
      m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) +
                       1.0);
    }
    return m;
  }

  std::size_t dim() const { return idf_.size(); }

  // Out-of-vocabulary tokens are ignored; an all-OOV document maps to zero.
  std::vector<double> Transform(const Document& doc) const {
    std::vector<double> row(idf_.size(), 0.0);
    for (const auto& t : doc) {
      const auto it = vocabulary_.find(t);
      if (it != vocabulary_.end()) row[it->second] += 1.0;
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      row[i] *= idf_[i];
      norm += row[i] * row[i];
    }
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& v : row) v /= norm;
    }
    return row;
  }

  const std::map<std::string, std::size_t>& vocabulary() const {
    return vocabulary_;
  }
  const std::vector<double>& idf() const { return idf_; }

  nlohmann::json ToJson() const {
    nlohmann::json vocab = nlohmann::json::array();
    std::vector<std::string> by_index(idf_.size());
    for (const auto& [t, i] : vocabulary_) by_index[i] = t;
    for (auto& t : by_index) vocab.push_back(t);
    return {{"vocabulary", vocab}, {"idf", idf_}};
  }

  static TfIdfModel FromJson(const nlohmann::json& j) {
    TfIdfModel m;
    const auto vocab = j.at("vocabulary").get<std::vector<std::string>>();
    m.idf_ = j.at("idf").get<std::vector<double>>();
    if (vocab.size() != m.idf_.size()) {
      throw Error(ErrorCode::kParseError, "tf-idf vocabulary/idf mismatch");
    }
    for (std::size_t i = 0; i < vocab.size(); ++i) m.vocabulary_[vocab[i]] = i;
    return m;
  }

 private:
  std::map<std::string, std::size_t> vocabulary_;
  std::vector<double> idf_;
};

}  // namespace xcom

#endif  // XCOM_TFIDF_HPP_
