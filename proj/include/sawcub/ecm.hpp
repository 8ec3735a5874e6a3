#pragma once

// Empirical Cubature Method with an initial candidate set.
//
// Greedy selection of rows of an orthonormal integrand basis U (M x m) such
// that positive weights w on the selected rows E reproduce b = U^T W exactly.
// Candidates from the initial set y0 are preferred; after more than
// `failure_threshold` consecutive iterations without growth of E the pool is
// enlarged with the remaining rows.

#include <sawcub/least_squares.hpp>
#include <sawcub/nnls.hpp>
#include <sawcub/types.hpp>

#include <algorithm>
#include <span>

namespace sawcub {

template <typename Scalar>
struct EcmOptions {
  Index failure_threshold = 10;    // lambda
  Scalar low_norm_floor = 1e-6;    // rows with |U(i,:)| <= floor never enter the pool
  Index max_iterations = -1;       // -1: 20 * M + 100
};

template <typename Scalar>
struct EcmOutput {
  std::vector<Index> indices;  // ascending
  Vector<Scalar> weights;      // aligned with indices, strictly positive
  Scalar residual_norm = 0;    // |U(E,:)^T w - b|_2
  Scalar target_norm = 0;      // |b|_2
  Index iterations = 0;
  bool enlarged = false;
  Index overlap_with_candidates = 0;

  Index size() const { return static_cast<Index>(indices.size()); }
};

namespace detail {

// Pool of candidate rows kept as a membership mask; scans are in ascending
// index order so the first maximiser (lowest index) wins ties.
struct RowPool {
  std::vector<char> member;
  Index count = 0;

  explicit RowPool(Index n) : member(static_cast<std::size_t>(n), 0) {}
  void insert(Index i) {
    if (!member[i]) {
      member[i] = 1;
      ++count;
    }
  }
  void erase(Index i) {
    if (member[i]) {
      member[i] = 0;
      --count;
    }
  }
  bool contains(Index i) const { return member[i] != 0; }
  bool empty() const { return count == 0; }
};

}  // namespace detail

/// Runs the enhanced ECM. `candidates` empty means the whole row set.
template <typename Derived, typename WDerived>
EcmOutput<typename Derived::Scalar> ecm_select(const Eigen::MatrixBase<Derived>& basis,
                                               const Eigen::MatrixBase<WDerived>& full_weights,
                                               std::span<const Index> candidates = {},
                                               const EcmOptions<typename Derived::Scalar>& opts = {}) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> u = basis;
  const Index rows = u.rows();
  const Index m = u.cols();
  if (full_weights.size() != rows) throw ShapeMismatch("ECM: weight vector length differs from basis rows");
  require_finite(u);
  require_positive(full_weights);
  if (m == 0) throw IllPosed("ECM: basis has no columns");
  if (m > rows) throw ShapeMismatch("ECM: more basis columns than rows");

  const Vector<Scalar> b = u.transpose() * full_weights;
  const Scalar b_norm = b.norm();
  if (!(b_norm > 0)) throw IllPosed("ECM: exact integrals U^T W vanish; augment the basis with constants");

  // unit-normalised rows g_j = U(j,:)/|U(j,:)|
  const Vector<Scalar> row_norm = u.rowwise().norm();
  Matrix<Scalar> g = u;
  for (Index j = 0; j < rows; ++j)
    if (row_norm(j) > 0) g.row(j) /= row_norm(j);

  detail::RowPool pool(rows), complement(rows);
  std::vector<char> in_y0(static_cast<std::size_t>(rows), 0);
  for (Index i : candidates) {
    if (i < 0 || i >= rows) throw std::out_of_range("ECM: candidate index out of range");
    in_y0[i] = 1;
  }
  const bool has_y0 = !candidates.empty();
  // The low-norm filter applies to the full set when no y0 is given and to
  // the complement otherwise; given candidates are only stripped of exact
  // zero rows, which have no direction.
  for (Index j = 0; j < rows; ++j) {
    if (has_y0 && in_y0[j]) {
      if (row_norm(j) > 0) pool.insert(j);
    } else if (row_norm(j) > opts.low_norm_floor) {
      (has_y0 ? complement : pool).insert(j);
    }
  }

  const Index max_iter = opts.max_iterations >= 0 ? opts.max_iterations : 20 * rows + 100;
  const Scalar exact_tol = Scalar(1e-13) * b_norm;

  EcmOutput<Scalar> out;
  out.target_norm = b_norm;
  LsState<Scalar> state;
  Vector<Scalar> r = b;
  Index failures = 0;
  Index best_size = 0;
  std::vector<Index> parked;  // rows held out until E changes

  auto enlarge = [&] {
    for (Index j = 0; j < rows; ++j)
      if (complement.contains(j)) pool.insert(j);
    complement = detail::RowPool(rows);
    out.enlarged = true;
  };

  while (state.size() < m) {
    if (r.norm() <= exact_tol) break;
    if (pool.empty() || failures > opts.failure_threshold) {
      if (complement.empty()) {
        if (pool.empty()) break;
      } else {
        enlarge();
      }
    }
    if (out.iterations >= max_iter) break;
    ++out.iterations;

    const Vector<Scalar> score = g * r;
    Index pick = -1;
    for (Index j = 0; j < rows; ++j)
      if (pool.contains(j) && (pick < 0 || score(j) > score(pick))) pick = j;

    LsState<Scalar> previous = state;
    try {
      state = ls_add_row(state, pick, u.row(pick), b);
    } catch (const SingularGram&) {
      pool.erase(pick);
      parked.push_back(pick);
      ++failures;
      continue;
    }
    pool.erase(pick);

    std::vector<Index> negative;
    for (Index p = 0; p < state.size(); ++p)
      if (!(state.weights(p) > Scalar(0)))  // negatives and exact zeros both leave E
        negative.push_back(state.selected_rows[p]);
    bool changed = true;
    if (negative.size() == 1 && negative.front() == pick) {
      // E is back where it was and r unchanged, so the same row would win
      // again; hold it out until E changes.
      state = std::move(previous);
      parked.push_back(pick);
      changed = false;
    } else if (!negative.empty()) {
      for (Index i : negative) pool.insert(i);
      try {
        state = ls_remove_rows<Scalar>(state, negative, b);
      } catch (const SingularGram&) {
        std::vector<Index> keep;
        for (Index i : state.selected_rows)
          if (std::find(negative.begin(), negative.end(), i) == negative.end()) keep.push_back(i);
        LsState<Scalar> rebuilt;
        for (Index i : keep) rebuilt = ls_add_row(rebuilt, i, u.row(i), b);
        state = rebuilt;
      }
    }
    if (changed) {
      for (Index i : parked) pool.insert(i);
      parked.clear();
    }

    // success means a new largest E; growth right after a purge does not
    // count, otherwise an add/purge 2-cycle never reaches the threshold
    if (state.size() > best_size) {
      best_size = state.size();
      failures = 0;
    } else {
      ++failures;
    }
    r = b;
    if (!state.empty()) r -= state.rows.transpose() * state.weights;
  }

  if (!state.empty()) state = ls_refactor(state, b);
  r = b;
  if (!state.empty()) r -= state.rows.transpose() * state.weights;
  out.residual_norm = r.norm();

  const bool positive = state.empty() || (state.weights.array() > 0).all();
  if (state.empty() || !positive || out.residual_norm > Scalar(1e-9) * b_norm) {
    throw NoConvergence("ECM candidate pool exhausted with " + std::to_string(state.size()) + " of " +
                        std::to_string(m) + " points (relative residual " +
                        std::to_string(static_cast<double>(out.residual_norm / b_norm)) + ", " +
                        std::to_string(out.iterations) + " iterations, " + std::to_string(parked.size()) +
                        " rows held out)");
  }

  std::vector<Index> order(static_cast<std::size_t>(state.size()));
  for (Index p = 0; p < state.size(); ++p) order[p] = p;
  std::sort(order.begin(), order.end(),
            [&](Index a, Index c) { return state.selected_rows[a] < state.selected_rows[c]; });
  out.weights.resize(state.size());
  for (Index p = 0; p < state.size(); ++p) {
    out.indices.push_back(state.selected_rows[order[p]]);
    out.weights(p) = state.weights(order[p]);
    if (in_y0[state.selected_rows[order[p]]]) ++out.overlap_with_candidates;
  }
  return out;
}

/// True iff b is a nonnegative combination of the rows of `basis_rows`,
/// decided by NNLS to a residual below 1e-9 |b|.
template <typename Derived, typename BDerived>
bool conical_hull_feasible(const Eigen::MatrixBase<Derived>& basis_rows,
                           const Eigen::MatrixBase<BDerived>& b) {
  using Scalar = typename Derived::Scalar;
  const Scalar b_norm = b.norm();
  if (b_norm == Scalar(0)) return true;
  if (basis_rows.rows() == 0) return false;
  const auto sol = nnls(basis_rows.transpose(), b);
  return sol.residual_norm < Scalar(1e-9) * b_norm;
}

}  // namespace sawcub
