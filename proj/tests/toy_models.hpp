#ifndef XCOM_TESTS_TOY_MODELS_HPP_
#define XCOM_TESTS_TOY_MODELS_HPP_

#include "xcom/encoder.hpp"
#include "xcom/rng.hpp"
#include "xcom/scoring.hpp"

namespace xcom::testing {

// Matrix M with M[swap(i), swap(j)] = M[i, j], where swap exchanges the two
// halves of the row and column index ranges.
inline Matrix HalfSwapSymmetric(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale) {
  Matrix m(rows, cols);
  const Eigen::Index r = rows / 2, c = cols / 2;
  Matrix a(r, c), b(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      a(i, j) = scale * rng.Normal();
      b(i, j) = scale * rng.Normal();
    }
  }
  m << a, b, b, a;
  return m;
}

inline Matrix SymmetricRow(Eigen::Index n, Rng& rng, double scale, double offset = 0.0) {
  Matrix v(1, n);
  for (Eigen::Index j = 0; j < n / 2; ++j) {
    v(0, j) = v(0, j + n / 2) = offset + scale * rng.Normal();
  }
  return v;
}

inline Matrix SwapHalves(const Matrix& row) {
  const Eigen::Index h = row.cols() / 2;
  Matrix out(row.rows(), row.cols());
  out << row.rightCols(h), row.leftCols(h);
  return out;
}

// Rating head for which swapping the two scores exchanges the Worse and
// Better logits exactly: every layer commutes with the half swap, the
// swapped sequence is the half swap of a token permutation, and the head
// maps swapped embeddings onto swapped class columns.
inline RatingHead AntisymmetricRatingHead(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(dim);
  RatingHead head;
  EncoderParams p = EncoderParams::Zeros(RatingEncoderShape(dim));
  for (Eigen::Index t = 0; t < p.token_embeddings.rows(); ++t) {
    p.token_embeddings.row(t) = SymmetricRow(d, rng, 1.0);
  }
  p.position_embeddings.row(0) = SymmetricRow(d, rng, 0.5);
  for (Eigen::Index i : {1, 2}) {
    for (Eigen::Index j = 0; j < d; ++j) p.position_embeddings(i, j) = 0.5 * rng.Normal();
    p.position_embeddings.row(i + 2) = SwapHalves(p.position_embeddings.row(i));
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Matrix* m : {&p.wq, &p.wk, &p.wv, &p.wo}) *m = HalfSwapSymmetric(d, d, rng, s);
  p.w1 = HalfSwapSymmetric(d, 4 * d, rng, s);
  p.w2 = HalfSwapSymmetric(4 * d, d, rng, s / 2.0);
  for (Matrix* b : {&p.bq, &p.bk, &p.bv, &p.bo, &p.b2, &p.ln0_bias, &p.ln1_bias, &p.ln2_bias}) {
    *b = SymmetricRow(d, rng, 0.1);
  }
  p.b1 = SymmetricRow(4 * d, rng, 0.1);
  for (Matrix* g : {&p.ln0_gain, &p.ln1_gain, &p.ln2_gain}) *g = SymmetricRow(d, rng, 0.1, 1.0);

  LinearHead h = LinearHead::Zeros(dim);
  for (Eigen::Index j = 0; j < d; ++j) h.weight(j, 2) = rng.Normal();
  h.weight.col(0) = SwapHalves(h.weight.col(2).transpose()).transpose();
  h.weight.col(1) = SymmetricRow(d, rng, 1.0).transpose();
  h.bias << 0.2, -0.1, 0.2;
  head.model.encoders.push_back(std::move(p));
  head.model.head = std::move(h);
  return head;
}

}  // namespace xcom::testing

#endif  // XCOM_TESTS_TOY_MODELS_HPP_
