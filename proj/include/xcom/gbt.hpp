#ifndef XCOM_GBT_HPP_
#define XCOM_GBT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "xcom/error.hpp"

namespace xcom {

struct GbtConfig {
  std::size_t rounds = 50;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  std::size_t min_samples_leaf = 1;
};

// Axis-aligned regression tree stored as a flat node array; node 0 is the
// root. A sample goes left when x[feature] <= threshold.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
  };

  double Predict(const std::vector<double>& x) const {
    int i = 0;
    while (nodes_[i].feature >= 0) {
      const auto& n = nodes_[i];
      i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i].value;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const { return Depth(0); }

  nlohmann::json ToJson() const { return NodeToJson(0); }

  static RegressionTree FromJson(const nlohmann::json& j) {
    RegressionTree t;
    t.AddFromJson(j);
    return t;
  }

  // Fits squared loss on `residuals` over the rows listed in `samples`.
  // `columns[f]` lists the rows with a nonzero value for feature f.
  static RegressionTree Fit(
      const std::vector<std::vector<double>>& rows,
      const std::vector<std::vector<std::size_t>>& columns,
      const std::vector<double>& residuals, const GbtConfig& cfg) {
    RegressionTree t;
    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<int> node_of(rows.size(), 0);
    t.Grow(rows, columns, residuals, cfg, all, 0, node_of);
    return t;
  }

 private:
  struct Group {
    double value;
    double sum;
    std::size_t count;
  };

  int Grow(const std::vector<std::vector<double>>& rows,
           const std::vector<std::vector<std::size_t>>& columns,
           const std::vector<double>& residuals, const GbtConfig& cfg,
           const std::vector<std::size_t>& samples, std::size_t depth,
           std::vector<int>& node_of) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double total = 0.0;
    for (std::size_t s : samples) {
      total += residuals[s];
      node_of[s] = id;
    }
    const double n = static_cast<double>(samples.size());
    nodes_[id].value = samples.empty() ? 0.0 : total / n;
    if (depth >= cfg.max_depth || samples.size() < 2 * cfg.min_samples_leaf) {
      return id;
    }

    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    const double parent_score = total * total / n;
    std::vector<Group> groups;
    for (std::size_t f = 0; f < columns.size(); ++f) {
      groups.clear();
      double nz_sum = 0.0;
      std::size_t nz_count = 0;
      for (std::size_t s : columns[f]) {
        if (node_of[s] != id) continue;
        groups.push_back({rows[s][f], residuals[s], 1});
        nz_sum += residuals[s];
        ++nz_count;
      }
      if (nz_count == 0) continue;
      if (nz_count < samples.size()) {
        groups.push_back({0.0, total - nz_sum, samples.size() - nz_count});
      }
      std::sort(groups.begin(), groups.end(),
                [](const Group& a, const Group& b) { return a.value < b.value; });
      double left_sum = 0.0;
      std::size_t left_count = 0;
      for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
        left_sum += groups[g].sum;
        left_count += groups[g].count;
        if (groups[g].value == groups[g + 1].value) continue;
        const std::size_t right_count = samples.size() - left_count;
        if (left_count < cfg.min_samples_leaf ||
            right_count < cfg.min_samples_leaf) {
          continue;
        }
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / left_count +
                            right_sum * right_sum / right_count - parent_score;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (groups[g].value + groups[g + 1].value);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t s : samples) {
      (rows[s][best_feature] <= best_threshold ? left : right).push_back(s);
    }
    nodes_[id].feature = best_feature;
    nodes_[id].threshold = best_threshold;
    const int l = Grow(rows, columns, residuals, cfg, left, depth + 1, node_of);
    const int r = Grow(rows, columns, residuals, cfg, right, depth + 1, node_of);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::size_t Depth(int i) const {
    if (nodes_[i].feature < 0) return 0;
    return 1 + std::max(Depth(nodes_[i].left), Depth(nodes_[i].right));
  }

  nlohmann::json NodeToJson(int i) const {
    const auto& n = nodes_[i];
    if (n.feature < 0) return {{"leaf", n.value}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"left", NodeToJson(n.left)},
            {"right", NodeToJson(n.right)}};
  }

  int AddFromJson(const nlohmann::json& j) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (j.contains("leaf")) {
      nodes_[id].value = j.at("leaf").get<double>();
      return id;
    }
    nodes_[id].feature = j.at("feature").get<int>();
    nodes_[id].threshold = j.at("threshold").get<double>();
    const int l = AddFromJson(j.at("left"));
    const int r = AddFromJson(j.at("right"));
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<Node> nodes_;
};

// Squared-loss gradient boosting: prediction = base + lr * sum of trees,
// base = training-target mean, each tree fitted to current residuals.
class GbtRegressor {
 public:
  GbtRegressor() = default;

  static GbtRegressor Fit(const std::vector<std::vector<double>>& rows,
                          const std::vector<double>& targets,
                          const GbtConfig& cfg) {
    if (rows.empty() || rows.size() != targets.size()) {
      throw Error(ErrorCode::kEmptyTraining, "gbt fit");
    }
    if (!(cfg.learning_rate >= 0.0 && cfg.learning_rate <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "learning_rate must lie in [0, 1]");
    }
    GbtRegressor m;
    m.learning_rate_ = cfg.learning_rate;
    double sum = 0.0;
    for (double t : targets) sum += t;
    m.base_ = sum / static_cast<double>(targets.size());

    const std::size_t dim = rows.front().size();
    std::vector<std::vector<std::size_t>> columns(dim);
    for (std::size_t s = 0; s < rows.size(); ++s) {
      for (std::size_t f = 0; f < dim; ++f) {
        if (rows[s][f] != 0.0) columns[f].push_back(s);
      }
    }

    std::vector<double> pred(rows.size(), m.base_);
    std::vector<double> residuals(rows.size());
    m.mse_history_.push_back(Mse(pred, targets));
    for (std::size_t round = 0; round < cfg.rounds; ++round) {
      for (std::size_t s = 0; s < rows.size(); ++s) {
        residuals[s] = targets[s] - pred[s];
      }
      m.trees_.push_back(RegressionTree::Fit(rows, columns, residuals, cfg));
      for (std::size_t s = 0; s < rows.size(); ++s) {
        pred[s] += m.learning_rate_ * m.trees_.back().Predict(rows[s]);
      }
      m.mse_history_.push_back(Mse(pred, targets));
    }
    return m;
  }

  double Predict(const std::vector<double>& x) const {
    double out = base_;
    for (const auto& t : trees_) out += learning_rate_ * t.Predict(x);
    return out;
  }

  double base() const { return base_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  // Training MSE before boosting (index 0) and after each round.
  const std::vector<double>& mse_history() const { return mse_history_; }

  nlohmann::json ToJson() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.ToJson());
    return {{"base", base_}, {"learning_rate", learning_rate_}, {"trees", trees}};
  }

  static GbtRegressor FromJson(const nlohmann::json& j) {
    GbtRegressor m;
    m.base_ = j.at("base").get<double>();
    m.learning_rate_ = j.at("learning_rate").get<double>();
    for (const auto& t : j.at("trees")) {
      m.trees_.push_back(RegressionTree::FromJson(t));
    }
    return m;
  }

 private:
  static double Mse(const std::vector<double>& pred,
                    const std::vector<double>& targets) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double d = pred[i] - targets[i];
      s += d * d;
    }
    return s / static_cast<double>(pred.size());
  }

  double base_ = 0.0;
  double learning_rate_ = 0.1;
  std::vector<RegressionTree> trees_;
  std::vector<double> mse_history_;
};

}  // namespace xcom

#endif  // XCOM_GBT_HPP_
