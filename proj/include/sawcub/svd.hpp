#pragma once

// Truncated and weighted SVD, plus the constant-function augmentation used to
// keep empirical cubature problems well posed.

#include <sawcub/types.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace sawcub {

template <typename Scalar>
struct TruncatedSvd {
  Matrix<Scalar> left;             // M x m, orthonormal columns
  Vector<Scalar> singular_values;  // m, positive and nonincreasing
  Matrix<Scalar> right;            // nP x m; empty when not requested
  Scalar tolerance_used = 0;

  Index rank() const { return singular_values.size(); }
};

/// Relative floor below which singular values are treated as round-off.
template <typename Scalar>
Scalar svd_noise_floor(Scalar sigma_max, Index rows, Index cols) {
  return Scalar(1e-14) * sigma_max * Scalar(std::max(rows, cols));
}

/// Smallest rank m whose Frobenius tail satisfies
/// sqrt(sum_{j>m} s_j^2) <= tolerance * sqrt(sum_j s_j^2), capped by the
/// noise floor.
template <typename Scalar>
Index truncation_rank(const Vector<Scalar>& sv, Scalar tolerance, Index rows, Index cols) {
  const Index n = sv.size();
  if (n == 0 || sv(0) <= 0) return 0;
  const Scalar floor = svd_noise_floor(sv(0), rows, cols);
  Index numeric_rank = 0;
  while (numeric_rank < n && sv(numeric_rank) > floor) ++numeric_rank;

  // tail(j) = sum_{i>=j} s_i^2, accumulated from the small end.
  Vector<Scalar> tail(n + 1);
  tail(n) = 0;
  for (Index j = n - 1; j >= 0; --j) tail(j) = tail(j + 1) + sv(j) * sv(j);
  const Scalar bound = tolerance * std::sqrt(tail(0));
  Index m = n;
  for (Index j = 0; j <= n; ++j) {
    if (std::sqrt(tail(j)) <= bound) {
      m = j;
      break;
    }
  }
  return std::min(m, numeric_rank);
}

namespace detail {

// BDCSVD occasionally returns NaN factors for finite input (with info()
// still Success); one-sided Jacobi is slower but does not.
template <typename Scalar>
struct DenseSvd {
  Vector<Scalar> sv;
  Matrix<Scalar> u, v;
};

template <typename Scalar>
DenseSvd<Scalar> dense_svd(const Matrix<Scalar>& a, bool vectors) {
  const unsigned flags = vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
  DenseSvd<Scalar> out;
  {
    Eigen::BDCSVD<Matrix<Scalar>> svd(a, flags);
    out.sv = svd.singularValues();
    if (vectors) {
      out.u = svd.matrixU();
      out.v = svd.matrixV();
    }
  }
  if (out.sv.allFinite() && out.u.allFinite() && out.v.allFinite()) return out;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(a, flags);
  out.sv = svd.singularValues();
  if (vectors) {
    out.u = svd.matrixU();
    out.v = svd.matrixV();
  }
  return out;
}

// Left singular vectors as A V S^-1 followed by two Gram-Schmidt passes.
// Both steps act on columns only, so every row of U stays accurate relative
// to its own magnitude; the orthogonal-transform U from the SVD routine is
// accurate only relative to |U|, which loses tiny rows (x^5 near x = 0)
// that can carry very large cubature weights. Falls back to `fallback` if
// a recovered column collapses.
template <typename Scalar>
Matrix<Scalar> rowwise_accurate_left(const Matrix<Scalar>& a, const Matrix<Scalar>& v, const Vector<Scalar>& sv,
                                     const Matrix<Scalar>& fallback) {
  Matrix<Scalar> u = a * v;
  for (Index j = 0; j < u.cols(); ++j) {
    u.col(j) /= sv(j);
    for (int pass = 0; pass < 2; ++pass)
      if (j > 0) u.col(j) -= u.leftCols(j) * (u.leftCols(j).transpose() * u.col(j));
    const Scalar n = u.col(j).norm();
    if (!(n > Scalar(0.5))) return fallback;
    u.col(j) /= n;
  }
  return u;
}

}  // namespace detail

/// Truncated SVD of `a`. The rank is the minimal count meeting the Frobenius
/// tail bound; tolerance 0 keeps every singular value above the noise floor.
/// Singular vectors are sign-normalised so each left column has a
/// nonnegative sum (largest entry positive when the sum vanishes).
template <typename Derived>
TruncatedSvd<typename Derived::Scalar> truncated_svd(const Eigen::MatrixBase<Derived>& a,
                                                     typename Derived::Scalar tolerance,
                                                     bool with_right = true) {
  using Scalar = typename Derived::Scalar;
  if (!(tolerance >= 0 && tolerance <= 1))
    throw std::invalid_argument("SVD tolerance must lie in [0,1]");
  require_finite(a);
  if (a.norm() == Scalar(0)) throw ZeroMatrix();

  const Matrix<Scalar> dense = a;
  const auto svd = detail::dense_svd<Scalar>(dense, true);
  const Vector<Scalar>& sv = svd.sv;
  const Index m = truncation_rank<Scalar>(sv, tolerance, dense.rows(), dense.cols());

  TruncatedSvd<Scalar> out;
  out.tolerance_used = tolerance;
  out.singular_values = sv.head(m);
  out.left = detail::rowwise_accurate_left<Scalar>(dense, svd.v.leftCols(m), out.singular_values,
                                                   svd.u.leftCols(m));
  if (with_right) out.right = svd.v.leftCols(m);

  for (Index j = 0; j < m; ++j) {
    auto col = out.left.col(j);
    Scalar s = col.sum();
    if (std::abs(s) <= Scalar(1e-10) * std::sqrt(Scalar(col.size()))) {
      Index at;
      col.cwiseAbs().maxCoeff(&at);
      s = col(at);
    }
    if (s < 0) {
      col = -col;
      if (with_right) out.right.col(j) = -out.right.col(j);
    }
  }
  return out;
}

/// SVD of diag(sqrt(w)) * a. The left factor Ubar is Euclidean-orthonormal;
/// unweight_basis(Ubar, w) recovers the diag(w)-orthonormal Utilde.
template <typename Derived, typename WDerived>
TruncatedSvd<typename Derived::Scalar> weighted_svd(const Eigen::MatrixBase<Derived>& a,
                                                    const Eigen::MatrixBase<WDerived>& w,
                                                    typename Derived::Scalar tolerance,
                                                    bool with_right = true) {
  if (w.size() != a.rows()) throw ShapeMismatch("weight vector length differs from row count");
  require_positive(w);
  return truncated_svd(w.cwiseSqrt().asDiagonal() * a, tolerance, with_right);
}

template <typename Derived, typename WDerived>
Matrix<typename Derived::Scalar> unweight_basis(const Eigen::MatrixBase<Derived>& ubar,
                                                const Eigen::MatrixBase<WDerived>& w) {
  return w.cwiseSqrt().cwiseInverse().asDiagonal() * ubar;
}

/// Appends the normalised component of `c` orthogonal to span(u).
/// Throws AlreadyContained when that component is below 1e-10 * |c|.
template <typename Derived, typename CDerived>
Matrix<typename Derived::Scalar> augment_with_vector(const Eigen::MatrixBase<Derived>& u,
                                                     const Eigen::MatrixBase<CDerived>& c) {
  using Scalar = typename Derived::Scalar;
  if (c.size() != u.rows()) throw ShapeMismatch("augmentation vector length differs from row count");
  Vector<Scalar> lambda = c;
  // two passes of classical Gram-Schmidt
  for (int pass = 0; pass < 2; ++pass) lambda -= u * (u.transpose() * lambda);
  const Scalar norm = lambda.norm();
  if (norm < Scalar(1e-10) * c.norm()) throw AlreadyContained();
  Matrix<Scalar> out(u.rows(), u.cols() + 1);
  out.leftCols(u.cols()) = u;
  out.col(u.cols()) = lambda / norm;
  return out;
}

/// [u | lambda] with lambda the normalised projection of the all-ones vector
/// onto the orthogonal complement of span(u).
template <typename Derived>
Matrix<typename Derived::Scalar> augment_with_constant(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  return augment_with_vector(u, Vector<Scalar>::Ones(u.rows()));
}

/// Numerical rank of the column concatenation, via untruncated SVD.
template <typename Scalar>
Index numerical_rank(const Matrix<Scalar>& a) {
  if (a.size() == 0 || a.norm() == Scalar(0)) return 0;
  const Vector<Scalar> sv = detail::dense_svd<Scalar>(a, false).sv;
  return truncation_rank<Scalar>(sv, Scalar(0), a.rows(), a.cols());
}

}  // namespace sawcub
