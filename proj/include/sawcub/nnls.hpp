#pragma once

// Lawson-Hanson active-set nonnegative least squares:
//   min |C x - d|_2  subject to  x >= 0.

#include <sawcub/types.hpp>

#include <algorithm>
#include <limits>

namespace sawcub {

template <typename Scalar>
struct NnlsResult {
  Vector<Scalar> x;
  Scalar residual_norm = 0;
  Index iterations = 0;
  bool converged = false;
};

template <typename CDerived, typename DDerived>
NnlsResult<typename CDerived::Scalar> nnls(const Eigen::MatrixBase<CDerived>& c,
                                           const Eigen::MatrixBase<DDerived>& d,
                                           Index max_iterations = -1) {
  using Scalar = typename CDerived::Scalar;
  const Index n = c.cols();
  if (d.size() != c.rows()) throw ShapeMismatch("nnls: right-hand side length differs from row count");
  if (max_iterations < 0) max_iterations = 3 * n + 30;

  const Matrix<Scalar> a = c;
  const Vector<Scalar> rhs = d;
  NnlsResult<Scalar> out;
  out.x = Vector<Scalar>::Zero(n);
  std::vector<bool> passive(n, false);
  const Scalar tol = Scalar(10) * std::numeric_limits<Scalar>::epsilon() * a.norm() *
                     Scalar(std::max(a.rows(), a.cols()));

  auto solve_passive = [&](const std::vector<Index>& p) {
    Matrix<Scalar> ap(a.rows(), static_cast<Index>(p.size()));
    for (Index j = 0; j < ap.cols(); ++j) ap.col(j) = a.col(p[j]);
    Vector<Scalar> z = ap.colPivHouseholderQr().solve(rhs);
    return z;
  };

  Vector<Scalar> grad = a.transpose() * (rhs - a * out.x);
  while (out.iterations < max_iterations) {
    Index t = -1;
    Scalar best = tol;
    for (Index j = 0; j < n; ++j)
      if (!passive[j] && grad(j) > best) {
        best = grad(j);
        t = j;
      }
    if (t < 0) {
      out.converged = true;
      break;
    }
    passive[t] = true;
    ++out.iterations;

    for (;;) {
      std::vector<Index> p;
      for (Index j = 0; j < n; ++j)
        if (passive[j]) p.push_back(j);
      const Vector<Scalar> z = solve_passive(p);
      bool feasible = true;
      for (Index k = 0; k < z.size(); ++k)
        if (z(k) <= 0) feasible = false;
      if (feasible) {
        out.x.setZero();
        for (Index k = 0; k < z.size(); ++k) out.x(p[k]) = z(k);
        break;
      }
      // step back toward the feasible region
      Scalar alpha = std::numeric_limits<Scalar>::max();
      for (Index k = 0; k < z.size(); ++k) {
        if (z(k) <= 0) {
          const Scalar xk = out.x(p[k]);
          alpha = std::min(alpha, xk / (xk - z(k)));
        }
      }
      for (Index k = 0; k < z.size(); ++k) out.x(p[k]) += alpha * (z(k) - out.x(p[k]));
      for (Index k = 0; k < z.size(); ++k)
        if (out.x(p[k]) <= tol) {
          out.x(p[k]) = 0;
          passive[p[k]] = false;
        }
      if (std::none_of(passive.begin(), passive.end(), [](bool v) { return v; })) break;
    }
    grad = a.transpose() * (rhs - a * out.x);
  }
  out.residual_norm = (a * out.x - rhs).norm();
  return out;
}

}  // namespace sawcub
