#pragma once

// Incremental unconstrained least squares over a growing/shrinking set of
// basis rows: solves U(E,:)^T w ~= b while keeping (U(E,:) U(E,:)^T)^{-1}
// up to date with bordering (add) and Schur-complement (remove) updates.

#include <sawcub/types.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <span>

namespace sawcub {

template <typename Scalar>
struct LsState {
  std::vector<Index> selected_rows;  // row indices into the basis, selection order
  Matrix<Scalar> rows;               // card(E) x m copy of U(E,:)
  Matrix<Scalar> inverse_gram;       // (rows * rows^T)^{-1}
  Vector<Scalar> weights;            // card(E)

  Index size() const { return static_cast<Index>(selected_rows.size()); }
  bool empty() const { return selected_rows.empty(); }
};

namespace detail {
// Gram pivots smaller than this fraction of the row energy are singular
// (condition growth beyond 1e12).
template <typename Scalar>
constexpr Scalar singular_ratio() {
  return Scalar(1e-12);
}

// w = H R b, then two refinement steps on the normal equations: the updated
// H carries round-off of order cond(G) eps, which the correction
// w += H R (b - R^T w) damps geometrically.
template <typename Scalar>
void resolve_weights(LsState<Scalar>& s, const Vector<Scalar>& b) {
  s.weights = s.inverse_gram * (s.rows * b);
  for (int step = 0; step < 2; ++step) {
    const Vector<Scalar> r = b - s.rows.transpose() * s.weights;
    s.weights += s.inverse_gram * (s.rows * r);
  }
}

// Copies a row or column vector expression into a column vector.
template <typename Derived>
Vector<typename Derived::Scalar> as_column(const Eigen::MatrixBase<Derived>& x) {
  Vector<typename Derived::Scalar> out(x.size());
  for (Index i = 0; i < x.size(); ++i) out(i) = x(i);
  return out;
}
}  // namespace detail

template <typename Scalar, typename RowDerived>
LsState<Scalar> ls_init(Index row_index, const Eigen::MatrixBase<RowDerived>& u_row,
                        const Vector<Scalar>& b) {
  const Vector<Scalar> u = detail::as_column(u_row);
  const Scalar uu = u.squaredNorm();
  if (uu == Scalar(0)) throw ZeroRow();
  LsState<Scalar> s;
  s.selected_rows = {row_index};
  s.rows = u.transpose();
  s.inverse_gram = Matrix<Scalar>::Constant(1, 1, Scalar(1) / uu);
  detail::resolve_weights(s, b);
  return s;
}

/// Adds one row by bordering the inverse Gram matrix.
template <typename Scalar, typename RowDerived>
LsState<Scalar> ls_add_row(const LsState<Scalar>& state, Index row_index,
                           const Eigen::MatrixBase<RowDerived>& new_row, const Vector<Scalar>& b) {
  if (state.empty()) return ls_init<Scalar>(row_index, new_row, b);
  const Index n = state.size();
  const Vector<Scalar> u = detail::as_column(new_row);
  const Scalar uu = u.squaredNorm();
  if (uu == Scalar(0)) throw ZeroRow();

  const Vector<Scalar> v = state.rows * u;         // cross products with E
  const Vector<Scalar> hv = state.inverse_gram * v;
  const Scalar schur = uu - v.dot(hv);
  if (!(schur > detail::singular_ratio<Scalar>() * uu)) throw SingularGram();

  LsState<Scalar> s;
  s.selected_rows = state.selected_rows;
  s.selected_rows.push_back(row_index);
  s.rows.resize(n + 1, state.rows.cols());
  s.rows.topRows(n) = state.rows;
  s.rows.row(n) = u.transpose();

  s.inverse_gram.resize(n + 1, n + 1);
  s.inverse_gram.topLeftCorner(n, n) = state.inverse_gram + hv * hv.transpose() / schur;
  s.inverse_gram.topRightCorner(n, 1) = -hv / schur;
  s.inverse_gram.bottomLeftCorner(1, n) = -hv.transpose() / schur;
  s.inverse_gram(n, n) = Scalar(1) / schur;
  detail::resolve_weights(s, b);
  return s;
}

/// Removes the given row indices (must be selected) via the Schur-complement
/// downdate H_KK - H_KD H_DD^{-1} H_DK.
template <typename Scalar>
LsState<Scalar> ls_remove_rows(const LsState<Scalar>& state, std::span<const Index> drop,
                               const Vector<Scalar>& b) {
  std::vector<Index> keep_pos, drop_pos;
  for (Index p = 0; p < state.size(); ++p) {
    const bool dropped = std::find(drop.begin(), drop.end(), state.selected_rows[p]) != drop.end();
    (dropped ? drop_pos : keep_pos).push_back(p);
  }
  if (static_cast<std::size_t>(drop_pos.size()) != drop.size())
    throw std::invalid_argument("ls_remove_rows: dropped index is not selected");

  LsState<Scalar> s;
  if (keep_pos.empty()) {
    s.rows.resize(0, state.rows.cols());
    return s;
  }
  const Index nk = static_cast<Index>(keep_pos.size());
  const Index nd = static_cast<Index>(drop_pos.size());
  const Matrix<Scalar>& h = state.inverse_gram;
  Matrix<Scalar> hkk(nk, nk), hkd(nk, nd), hdd(nd, nd);
  for (Index i = 0; i < nk; ++i) {
    for (Index j = 0; j < nk; ++j) hkk(i, j) = h(keep_pos[i], keep_pos[j]);
    for (Index j = 0; j < nd; ++j) hkd(i, j) = h(keep_pos[i], drop_pos[j]);
  }
  for (Index i = 0; i < nd; ++i)
    for (Index j = 0; j < nd; ++j) hdd(i, j) = h(drop_pos[i], drop_pos[j]);

  Eigen::LDLT<Matrix<Scalar>> ldlt(hdd);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw SingularGram();
  s.inverse_gram = hkk - hkd * ldlt.solve(hkd.transpose());

  s.rows.resize(nk, state.rows.cols());
  for (Index i = 0; i < nk; ++i) {
    s.selected_rows.push_back(state.selected_rows[keep_pos[i]]);
    s.rows.row(i) = state.rows.row(keep_pos[i]);
  }
  detail::resolve_weights(s, b);
  return s;
}

/// Recomputes the inverse Gram from scratch and re-solves the weights with
/// a QR of U(E,:)^T; flushes round-off accumulated by the updates.
template <typename Scalar>
LsState<Scalar> ls_refactor(const LsState<Scalar>& state, const Vector<Scalar>& b) {
  LsState<Scalar> s = state;
  if (s.empty()) return s;
  const Matrix<Scalar> gram = s.rows * s.rows.transpose();
  Eigen::LDLT<Matrix<Scalar>> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw SingularGram();
  s.inverse_gram = ldlt.solve(Matrix<Scalar>::Identity(gram.rows(), gram.cols()));
  // weights from a QR of R^T rather than the Gram inverse, which squares
  // the condition number of nearly dependent selections
  const Matrix<Scalar> rt = s.rows.transpose();
  s.weights = Eigen::ColPivHouseholderQR<Matrix<Scalar>>(rt).solve(b);
  return s;
}

}  // namespace sawcub
