#ifndef XCOM_ENCODER_HPP_
#define XCOM_ENCODER_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "xcom/error.hpp"
#include "xcom/rng.hpp"

namespace xcom {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// Non-padding prefix of an encoder input: token ids and segment ids (0 for
// [CLS] and the first side, 1 for the second side).
struct TokenSequence {
  std::vector<int> ids;
  std::vector<int> segments;

  std::size_t size() const { return ids.size(); }
};

struct EncoderShape {
  std::size_t vocab_size = 0;
  std::size_t dim = 64;
  std::size_t max_len = 64;
  std::size_t n_segments = 2;
  std::size_t n_heads = 4;  // must divide dim

  bool operator==(const EncoderShape&) const = default;
};

// One post-norm transformer layer over summed token, position and segment
// embeddings, with multi-head attention from the [CLS] position. Row-vector convention throughout: y = x * W + b.
struct EncoderParams {
  EncoderShape shape;
  Matrix token_embeddings;     // vocab x d
  Matrix position_embeddings;  // max_len x d
  Matrix segment_embeddings;   // n_segments x d
  Matrix ln0_gain, ln0_bias;   // 1 x d
  Matrix wq, bq, wk, bk, wv, bv, wo, bo;
  Matrix ln1_gain, ln1_bias;
  Matrix w1, b1;  // d x 4d, 1 x 4d
  Matrix w2, b2;  // 4d x d, 1 x d
  Matrix ln2_gain, ln2_bias;

  static EncoderParams Zeros(const EncoderShape& shape) {
    EncoderParams p;
    p.shape = shape;
    const auto d = static_cast<Eigen::Index>(shape.dim);
    const auto ff = 4 * d;
    p.token_embeddings = Matrix::Zero(static_cast<Eigen::Index>(shape.vocab_size), d);
    p.position_embeddings = Matrix::Zero(static_cast<Eigen::Index>(shape.max_len), d);
    p.segment_embeddings = Matrix::Zero(static_cast<Eigen::Index>(shape.n_segments), d);
    for (Matrix* m : {&p.ln0_gain, &p.ln0_bias, &p.bq, &p.bk, &p.bv, &p.bo,
                      &p.ln1_gain, &p.ln1_bias, &p.b2, &p.ln2_gain, &p.ln2_bias}) {
      *m = Matrix::Zero(1, d);
    }
    for (Matrix* m : {&p.wq, &p.wk, &p.wv, &p.wo}) *m = Matrix::Zero(d, d);
    p.w1 = Matrix::Zero(d, ff);
    p.b1 = Matrix::Zero(1, ff);
    p.w2 = Matrix::Zero(ff, d);
    return p;
  }

  static EncoderParams Random(const EncoderShape& shape, Rng& rng) {
    if (shape.max_len < 8) {
      throw Error(ErrorCode::kInvalidConfig, "max_len must be at least 8");
    }
    if (shape.dim == 0 || shape.vocab_size == 0) {
      throw Error(ErrorCode::kInvalidConfig, "empty encoder shape");
    }
    if (shape.n_heads == 0 || shape.dim % shape.n_heads != 0) {
      throw Error(ErrorCode::kInvalidConfig, "encoder heads must divide dim");
    }
    EncoderParams p = Zeros(shape);
    const double d = static_cast<double>(shape.dim);
    auto fill = [&rng](Matrix& m, double scale) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = scale * rng.Normal();
      }
    };
    fill(p.token_embeddings, 1.0);
    fill(p.position_embeddings, 0.1);
    fill(p.segment_embeddings, 1.0);
    for (Matrix* m : {&p.wq, &p.wk, &p.wv, &p.wo}) fill(*m, 1.0 / std::sqrt(d));
    fill(p.w1, 1.0 / std::sqrt(d));
    fill(p.w2, 1.0 / std::sqrt(4.0 * d));
    for (Matrix* m : {&p.ln0_gain, &p.ln1_gain, &p.ln2_gain}) m->setOnes();
    return p;
  }

  // Every trainable tensor, in a fixed order used for updates and
  // serialization.
  template <typename Self>
  static auto TensorsOf(Self& self) {
    using Ptr = std::conditional_t<std::is_const_v<Self>, const Matrix*, Matrix*>;
    return std::vector<std::pair<std::string, Ptr>>{
        {"token_embeddings", &self.token_embeddings},
        {"position_embeddings", &self.position_embeddings},
        {"segment_embeddings", &self.segment_embeddings},
        {"ln0_gain", &self.ln0_gain}, {"ln0_bias", &self.ln0_bias},
        {"wq", &self.wq}, {"bq", &self.bq},
        {"wk", &self.wk}, {"bk", &self.bk},
        {"wv", &self.wv}, {"bv", &self.bv},
        {"wo", &self.wo}, {"bo", &self.bo},
        {"ln1_gain", &self.ln1_gain}, {"ln1_bias", &self.ln1_bias},
        {"w1", &self.w1}, {"b1", &self.b1},
        {"w2", &self.w2}, {"b2", &self.b2},
        {"ln2_gain", &self.ln2_gain}, {"ln2_bias", &self.ln2_bias}};
  }
  auto Tensors() { return TensorsOf(*this); }
  auto Tensors() const { return TensorsOf(*this); }

  bool AllFinite() const {
    for (const auto& [name, m] : Tensors()) {
      if (!m->allFinite()) return false;
    }
    return true;
  }
};

// Affine classifier head: logits = z * W + b with W of shape d x 3.
struct LinearHead {
  Matrix weight;  // d x 3
  Matrix bias;    // 1 x 3

  static LinearHead Zeros(std::size_t dim, std::size_t classes = 3) {
    return {Matrix::Zero(static_cast<Eigen::Index>(dim),
                         static_cast<Eigen::Index>(classes)),
            Matrix::Zero(1, static_cast<Eigen::Index>(classes))};
  }

  static LinearHead Random(std::size_t dim, Rng& rng, std::size_t classes = 3) {
    LinearHead h = Zeros(dim, classes);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (Eigen::Index i = 0; i < h.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < h.weight.cols(); ++j) {
        h.weight(i, j) = scale * rng.Normal();
      }
    }
    return h;
  }

  std::size_t input_dim() const { return static_cast<std::size_t>(weight.rows()); }

  RowVector Apply(const RowVector& z) const {
    if (z.size() != weight.rows()) {
      throw Error(ErrorCode::kDimMismatch,
                  "head expects " + std::to_string(weight.rows()) +
                      " inputs, got " + std::to_string(z.size()));
    }
    return z * weight + bias;
  }

  auto Tensors() {
    return std::vector<std::pair<std::string, Matrix*>>{{"weight", &weight},
                                                        {"bias", &bias}};
  }
  auto Tensors() const {
    return std::vector<std::pair<std::string, const Matrix*>>{
        {"weight", &weight}, {"bias", &bias}};
  }
};

namespace internal {

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
  Matrix xhat;
  Eigen::VectorXd rstd;
};

inline Matrix LayerNormForward(const Matrix& x, const Matrix& gain,
                               const Matrix& bias, LayerNormCache& cache) {
  const auto n = x.rows();
  const auto d = static_cast<double>(x.cols());
  cache.xhat.resize(n, x.cols());
  cache.rstd.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = x.row(i).sum() / d;
    const RowVector centered = x.row(i).array() - mean;
    const double var = centered.squaredNorm() / d;
    cache.rstd(i) = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.xhat.row(i) = centered * cache.rstd(i);
  }
  Matrix y = cache.xhat.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  return y;
}

inline Matrix LayerNormBackward(const Matrix& dy, const Matrix& gain,
                                const LayerNormCache& cache, Matrix& dgain,
                                Matrix& dbias) {
  const auto d = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const RowVector dxhat = dy.row(i).array() * gain.row(0).array();
    dgain.row(0).array() += dy.row(i).array() * cache.xhat.row(i).array();
    dbias.row(0) += dy.row(i);
    const double mean_dxhat = dxhat.sum() / d;
    const double mean_dot = dxhat.dot(cache.xhat.row(i)) / d;
    dx.row(i) = cache.rstd(i) *
                (dxhat.array() - mean_dxhat -
                 cache.xhat.row(i).array() * mean_dot);
  }
  return dx;
}

inline constexpr double kGeluC = 0.044715;

inline double Gelu(double u) {
  const double k = std::sqrt(2.0 / std::numbers::pi);
  return 0.5 * u * (1.0 + std::tanh(k * (u + kGeluC * u * u * u)));
}

inline double GeluGrad(double u) {
  const double k = std::sqrt(2.0 / std::numbers::pi);
  const double t = std::tanh(k * (u + kGeluC * u * u * u));
  return 0.5 * (1.0 + t) +
         0.5 * u * (1.0 - t * t) * k * (1.0 + 3.0 * kGeluC * u * u);
}

}  // namespace internal

// Intermediate values kept by Forward for Backward.
struct EncoderCache {
  TokenSequence input;
  internal::LayerNormCache ln0, ln1, ln2;
  Matrix embedded;  // n x d, after ln0
  Matrix keys, values;
  RowVector query;
  Matrix attention;  // heads x n
  RowVector context;  // per-head contexts side by side
  RowVector hidden;  // after ln1
  RowVector ff_pre, ff_act;
  RowVector output;  // [CLS] state after ln2
};

class Encoder {
 public:
  // [CLS] hidden state of the sequence; only the non-padding prefix is
  // attended, so trailing padding never affects the result.
  static RowVector Encode(const EncoderParams& p, const TokenSequence& seq) {
    EncoderCache cache;
    return Forward(p, seq, cache);
  }

  static RowVector Forward(const EncoderParams& p, const TokenSequence& seq,
                           EncoderCache& cache) {
    const auto n = static_cast<Eigen::Index>(seq.size());
    if (n == 0 || seq.size() > p.shape.max_len ||
        seq.segments.size() != seq.ids.size()) {
      throw Error(ErrorCode::kDimMismatch, "bad encoder input length");
    }
    const auto d = static_cast<Eigen::Index>(p.shape.dim);
    cache.input = seq;
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int id = seq.ids[i];
      const int seg = seq.segments[i];
      if (id < 0 || id >= p.token_embeddings.rows() || seg < 0 ||
          seg >= p.segment_embeddings.rows()) {
        throw Error(ErrorCode::kDimMismatch, "token or segment id out of range");
      }
      x.row(i) = p.token_embeddings.row(id) + p.position_embeddings.row(i) +
                 p.segment_embeddings.row(seg);
    }
    cache.embedded = internal::LayerNormForward(x, p.ln0_gain, p.ln0_bias, cache.ln0);
    const Matrix& e = cache.embedded;

    cache.keys = e * p.wk;
    cache.keys.rowwise() += p.bk.row(0);
    cache.values = e * p.wv;
    cache.values.rowwise() += p.bv.row(0);
    cache.query = e.row(0) * p.wq + p.bq.row(0);

    const auto heads = static_cast<Eigen::Index>(p.shape.n_heads);
    const Eigen::Index dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    cache.attention.resize(heads, n);
    cache.context.resize(d);
    for (Eigen::Index h = 0; h < heads; ++h) {
      const RowVector q = cache.query.segment(h * dh, dh);
      RowVector scores = (cache.keys.middleCols(h * dh, dh) * q.transpose()).transpose() * scale;
      const double max_score = scores.maxCoeff();
      RowVector a = (scores.array() - max_score).exp();
      a /= a.sum();
      cache.attention.row(h) = a;
      cache.context.segment(h * dh, dh) = a * cache.values.middleCols(h * dh, dh);
    }

    const RowVector attended = cache.context * p.wo + p.bo.row(0);
    const RowVector r1 = e.row(0) + attended;
    cache.hidden = internal::LayerNormForward(r1, p.ln1_gain, p.ln1_bias, cache.ln1);

    cache.ff_pre = cache.hidden * p.w1 + p.b1.row(0);
    cache.ff_act = cache.ff_pre.unaryExpr(&internal::Gelu);
    const RowVector ff_out = cache.ff_act * p.w2 + p.b2.row(0);
    const RowVector r2 = cache.hidden + ff_out;
    cache.output = internal::LayerNormForward(r2, p.ln2_gain, p.ln2_bias, cache.ln2);
    return cache.output;
  }

  // Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
  static void Backward(const EncoderParams& p, const EncoderCache& cache,
                       const RowVector& d_output, EncoderParams& grad) {
    const auto n = static_cast<Eigen::Index>(cache.input.size());
    const auto heads = static_cast<Eigen::Index>(p.shape.n_heads);
    const Eigen::Index dh = static_cast<Eigen::Index>(p.shape.dim) / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const Matrix& e = cache.embedded;

    const Matrix d_r2 = internal::LayerNormBackward(
        d_output, p.ln2_gain, cache.ln2, grad.ln2_gain, grad.ln2_bias);
    RowVector d_hidden = d_r2;
    grad.w2.noalias() += cache.ff_act.transpose() * d_r2;
    grad.b2 += d_r2;
    const RowVector d_act = d_r2 * p.w2.transpose();
    const RowVector d_pre =
        d_act.array() * cache.ff_pre.unaryExpr(&internal::GeluGrad).array();
    grad.w1.noalias() += cache.hidden.transpose() * d_pre;
    grad.b1 += d_pre;
    d_hidden += d_pre * p.w1.transpose();

    const Matrix d_r1 = internal::LayerNormBackward(
        d_hidden, p.ln1_gain, cache.ln1, grad.ln1_gain, grad.ln1_bias);
    RowVector d_e0 = d_r1;
    grad.wo.noalias() += cache.context.transpose() * d_r1;
    grad.bo += d_r1;
    const RowVector d_context = d_r1 * p.wo.transpose();

    Matrix d_values(n, cache.values.cols());
    Matrix d_keys(n, cache.keys.cols());
    RowVector d_query(cache.query.size());
    for (Eigen::Index h = 0; h < heads; ++h) {
      const RowVector a = cache.attention.row(h);
      const RowVector dc = d_context.segment(h * dh, dh);
      d_values.middleCols(h * dh, dh) = a.transpose() * dc;
      const RowVector d_attn = (cache.values.middleCols(h * dh, dh) * dc.transpose()).transpose();
      const double mean = a.dot(d_attn);
      const RowVector d_scores = (a.array() * (d_attn.array() - mean)).matrix() * scale;
      d_query.segment(h * dh, dh) = d_scores * cache.keys.middleCols(h * dh, dh);
      d_keys.middleCols(h * dh, dh) = d_scores.transpose() * cache.query.segment(h * dh, dh);
    }

    grad.wq.noalias() += e.row(0).transpose() * d_query;
    grad.bq += d_query;
    d_e0 += d_query * p.wq.transpose();

    Matrix d_e = d_keys * p.wk.transpose();
    d_e.noalias() += d_values * p.wv.transpose();
    grad.wk.noalias() += e.transpose() * d_keys;
    grad.bk += d_keys.colwise().sum();
    grad.wv.noalias() += e.transpose() * d_values;
    grad.bv += d_values.colwise().sum();
    d_e.row(0) += d_e0;

    const Matrix d_x = internal::LayerNormBackward(d_e, p.ln0_gain, cache.ln0,
                                                   grad.ln0_gain, grad.ln0_bias);
    for (Eigen::Index i = 0; i < n; ++i) {
      grad.token_embeddings.row(cache.input.ids[i]) += d_x.row(i);
      grad.position_embeddings.row(i) += d_x.row(i);
      grad.segment_embeddings.row(cache.input.segments[i]) += d_x.row(i);
    }
  }
};

// ---------------------------------------------------------------------------
// Serialization helpers shared by the branch checkpoints.

inline nlohmann::json MatrixToJson(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Matrix MatrixFromJson(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw Error(ErrorCode::kParseError, "matrix data size mismatch");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[i * cols + j2];
  }
  return m;
}

inline nlohmann::json EncoderToJson(const EncoderParams& p) {
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, m] : p.Tensors()) tensors[name] = MatrixToJson(*m);
  return {{"vocab_size", p.shape.vocab_size},
          {"dim", p.shape.dim},
          {"max_len", p.shape.max_len},
          {"n_segments", p.shape.n_segments},
          {"n_heads", p.shape.n_heads},
          {"tensors", tensors}};
}

inline EncoderParams EncoderFromJson(const nlohmann::json& j) {
  EncoderShape shape;
  shape.vocab_size = j.at("vocab_size").get<std::size_t>();
  shape.dim = j.at("dim").get<std::size_t>();
  shape.max_len = j.at("max_len").get<std::size_t>();
  shape.n_segments = j.at("n_segments").get<std::size_t>();
  shape.n_heads = j.at("n_heads").get<std::size_t>();
  if (shape.n_heads == 0 || shape.dim % shape.n_heads != 0) {
    throw Error(ErrorCode::kDimMismatch, "encoder heads must divide dim");
  }
  EncoderParams p = EncoderParams::Zeros(shape);
  for (auto& [name, m] : p.Tensors()) {
    Matrix loaded = MatrixFromJson(j.at("tensors").at(name));
    if (loaded.rows() != m->rows() || loaded.cols() != m->cols()) {
      throw Error(ErrorCode::kDimMismatch, "tensor " + name);
    }
    *m = std::move(loaded);
  }
  if (!p.AllFinite()) throw Error(ErrorCode::kParseError, "non-finite tensor");
  return p;
}

inline nlohmann::json HeadToJson(const LinearHead& h) {
  return {{"weight", MatrixToJson(h.weight)}, {"bias", MatrixToJson(h.bias)}};
}

inline LinearHead HeadFromJson(const nlohmann::json& j) {
  LinearHead h{MatrixFromJson(j.at("weight")), MatrixFromJson(j.at("bias"))};
  if (h.bias.rows() != 1 || h.bias.cols() != h.weight.cols()) {
    throw Error(ErrorCode::kDimMismatch, "head bias shape");
  }
  return h;
}

}  // namespace xcom

#endif  // XCOM_ENCODER_HPP_
