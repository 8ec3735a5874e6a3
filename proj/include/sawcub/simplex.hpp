#pragma once

// Dense two-phase revised simplex for
//   min c^T x   s.t.  A x = b,  x >= 0.
//
// The basis inverse is kept explicitly and updated by the product-form
// (eta) rank-one update, with a fresh LU refactorisation every
// `refactor_period` pivots.

#include <sawcub/types.hpp>

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace sawcub {

enum class PivotRule { Bland, Dantzig };
enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

template <typename Scalar>
struct LpSolution {
  Vector<Scalar> values;
  Scalar objective = 0;
  LpStatus status = LpStatus::IterationLimit;
  Index pivot_count = 0;
};

template <typename Scalar>
struct SimplexOptions {
  PivotRule pivot_rule = PivotRule::Bland;
  Index max_pivots = -1;            // -1: 50 * number of variables
  Scalar optimality_tol = 1e-11;    // reduced-cost threshold
  Scalar pivot_tol = 1e-11;         // smallest usable pivot element
  Scalar infeasibility_tol = 1e-9;  // phase-1 optimum above this is infeasible
  Index refactor_period = 50;
};

namespace detail {

template <typename Scalar>
class RevisedSimplex {
 public:
  RevisedSimplex(const Matrix<Scalar>& a, const Vector<Scalar>& b, const Vector<Scalar>& c,
                 const SimplexOptions<Scalar>& opts)
      : opts_(opts), rows_(a.rows()), n_(a.cols()) {
    // rows flipped so that the right-hand side is nonnegative; one
    // artificial column per row
    a_.resize(rows_, n_ + rows_);
    a_.leftCols(n_) = a;
    a_.rightCols(rows_).setIdentity();
    b_ = b;
    for (Index r = 0; r < rows_; ++r)
      if (b_(r) < 0) {
        b_(r) = -b_(r);
        a_.row(r).head(n_) *= Scalar(-1);
      }
    cost_ = c;
    basis_.resize(rows_);
    for (Index r = 0; r < rows_; ++r) basis_[r] = n_ + r;
    in_basis_.assign(static_cast<std::size_t>(n_ + rows_), -1);
    for (Index r = 0; r < rows_; ++r) in_basis_[n_ + r] = r;
    binv_ = Matrix<Scalar>::Identity(rows_, rows_);
    xb_ = b_;
    max_pivots_ = opts.max_pivots >= 0 ? opts.max_pivots : 50 * std::max<Index>(n_, 1);
  }

  LpSolution<Scalar> solve() {
    LpSolution<Scalar> sol;
    // phase 1: minimise the sum of artificials
    Vector<Scalar> c1 = Vector<Scalar>::Zero(n_ + rows_);
    c1.tail(rows_).setOnes();
    const LpStatus s1 = iterate(c1, n_ + rows_);
    sol.pivot_count = pivots_;
    if (s1 == LpStatus::IterationLimit) {
      sol.status = s1;
      return sol;
    }
    Scalar infeas = 0;
    for (Index r = 0; r < rows_; ++r)
      if (basis_[r] >= n_) infeas += xb_(r);
    const Scalar scale = Scalar(1) + (b_.size() ? b_.cwiseAbs().maxCoeff() : Scalar(0));
    if (infeas > opts_.infeasibility_tol * scale) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    drive_out_artificials();

    // phase 2 on the structural columns only
    Vector<Scalar> c2 = Vector<Scalar>::Zero(n_ + rows_);
    c2.head(n_) = cost_;
    const LpStatus s2 = iterate(c2, n_);
    sol.pivot_count = pivots_;
    sol.status = s2;
    if (s2 != LpStatus::Optimal) return sol;

    refactor();
    sol.values = Vector<Scalar>::Zero(n_);
    for (Index r = 0; r < rows_; ++r)
      if (basis_[r] < n_) sol.values(basis_[r]) = std::max(xb_(r), Scalar(0));
    for (Index j = 0; j < n_; ++j)
      if (sol.values(j) <= Scalar(1e-12) * scale) sol.values(j) = 0;
    sol.objective = cost_.dot(sol.values);
    return sol;
  }

 private:
  // Runs simplex iterations with cost `c`, pricing columns [0, priced).
  LpStatus iterate(const Vector<Scalar>& c, Index priced) {
    for (;;) {
      if (pivots_ >= max_pivots_) return LpStatus::IterationLimit;
      Vector<Scalar> cb(rows_);
      for (Index r = 0; r < rows_; ++r) cb(r) = c(basis_[r]);
      const RowVector<Scalar> y = cb.transpose() * binv_;

      Index entering = -1;
      Scalar best = -opts_.optimality_tol;
      for (Index j = 0; j < priced; ++j) {
        if (in_basis_[j] >= 0) continue;
        const Scalar d = c(j) - y.dot(a_.col(j));
        if (d < best) {
          entering = j;
          if (opts_.pivot_rule == PivotRule::Bland) break;
          best = d;
        }
      }
      if (entering < 0) return LpStatus::Optimal;

      const Vector<Scalar> dir = binv_ * a_.col(entering);
      Index leave = -1;
      Scalar ratio = std::numeric_limits<Scalar>::infinity();
      for (Index r = 0; r < rows_; ++r) {
        if (dir(r) <= opts_.pivot_tol) continue;
        const Scalar t = xb_(r) / dir(r);
        const Scalar tie = Scalar(1e-12) * std::max(Scalar(1), std::abs(ratio));
        if (leave < 0 || t < ratio - tie) {
          leave = r;
          ratio = t;
        } else if (t <= ratio + tie) {
          // Bland: lowest variable index leaves; Dantzig: largest pivot
          const bool take = opts_.pivot_rule == PivotRule::Bland ? basis_[r] < basis_[leave]
                                                                 : dir(r) > dir(leave);
          if (take) {
            leave = r;
            ratio = std::min(ratio, t);
          }
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(entering, leave, dir);
    }
  }

  void pivot(Index entering, Index leave, const Vector<Scalar>& dir) {
    const Scalar piv = dir(leave);
    const Scalar step = std::max(xb_(leave), Scalar(0)) / piv;
    xb_ -= step * dir;
    xb_(leave) = step;
    // eta update of the basis inverse
    const RowVector<Scalar> prow = binv_.row(leave) / piv;
    for (Index r = 0; r < rows_; ++r)
      if (r != leave && dir(r) != Scalar(0)) binv_.row(r) -= dir(r) * prow;
    binv_.row(leave) = prow;
    in_basis_[basis_[leave]] = -1;
    basis_[leave] = entering;
    in_basis_[entering] = leave;
    ++pivots_;
    if (pivots_ % opts_.refactor_period == 0) refactor();
  }

  void refactor() {
    Matrix<Scalar> bmat(rows_, rows_);
    for (Index r = 0; r < rows_; ++r) bmat.col(r) = a_.col(basis_[r]);
    Eigen::PartialPivLU<Matrix<Scalar>> lu(bmat);
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
    for (Index r = 0; r < rows_; ++r)
      if (std::abs(xb_(r)) < Scalar(1e-14) * (Scalar(1) + b_.cwiseAbs().maxCoeff())) xb_(r) = 0;
  }

  // Replaces zero-level artificials by structural columns where possible;
  // artificials left in the basis sit on redundant rows and stay at zero.
  void drive_out_artificials() {
    for (Index r = 0; r < rows_; ++r) {
      if (basis_[r] < n_) continue;
      const RowVector<Scalar> brow = binv_.row(r);
      Index best = -1;
      Scalar best_abs = Scalar(1e-9);
      for (Index j = 0; j < n_; ++j) {
        if (in_basis_[j] >= 0) continue;
        const Scalar v = std::abs(brow.dot(a_.col(j)));
        if (v > best_abs) {
          best_abs = v;
          best = j;
        }
      }
      if (best >= 0) {
        const Vector<Scalar> dir = binv_ * a_.col(best);
        // degenerate pivot: the artificial is at zero, so x stays unchanged
        const Scalar piv = dir(r);
        const RowVector<Scalar> prow = binv_.row(r) / piv;
        for (Index q = 0; q < rows_; ++q)
          if (q != r && dir(q) != Scalar(0)) binv_.row(q) -= dir(q) * prow;
        binv_.row(r) = prow;
        in_basis_[basis_[r]] = -1;
        basis_[r] = best;
        in_basis_[best] = r;
        xb_(r) = 0;
      }
    }
    refactor();
  }

  SimplexOptions<Scalar> opts_;
  Index rows_, n_;
  Matrix<Scalar> a_;
  Vector<Scalar> b_, cost_, xb_;
  Matrix<Scalar> binv_;
  std::vector<Index> basis_;
  std::vector<Index> in_basis_;
  Index pivots_ = 0;
  Index max_pivots_ = 0;
};

}  // namespace detail

template <typename Scalar>
LpSolution<Scalar> solve_simplex(const Matrix<Scalar>& a, const Vector<Scalar>& b, const Vector<Scalar>& c,
                                 const SimplexOptions<Scalar>& opts = {}) {
  if (b.size() != a.rows() || c.size() != a.cols()) throw ShapeMismatch("simplex: inconsistent LP dimensions");
  require_finite(a);
  require_finite(b);
  require_finite(c);
  detail::RevisedSimplex<Scalar> solver(a, b, c, opts);
  return solver.solve();
}

}  // namespace sawcub
