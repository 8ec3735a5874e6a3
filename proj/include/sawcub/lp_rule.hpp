#pragma once

// l1-convexified multi-subspace cubature as a block-diagonal standard-form
// LP: min 1^T z  s.t.  diag(U^(1)T, ..., U^(k)T) z = [b^(1); ...; b^(k)],
// z >= 0, with z = [z^(1); ...; z^(k)] and b^(i) = U^(i)T W.

#include <sawcub/saw_ecm.hpp>
#include <sawcub/simplex.hpp>

namespace sawcub {

template <typename Scalar>
struct StandardFormLp {
  Vector<Scalar> cost;                // k*M ones
  Matrix<Scalar> constraint_matrix;   // (sum m_i) x (k*M)
  Vector<Scalar> rhs;                 // sum m_i
  std::vector<Index> block_rows;      // m_i
  Index points = 0;                   // M

  Index blocks() const { return static_cast<Index>(block_rows.size()); }
};

template <typename Scalar>
StandardFormLp<Scalar> assemble_lp(const std::vector<SubspaceBasis<Scalar>>& bases) {
  if (bases.empty()) throw ShapeMismatch("LP needs at least one subspace");
  const Index M = bases.front().basis.rows();
  const Index k = static_cast<Index>(bases.size());
  Index total = 0;
  for (const auto& b : bases) total += b.modes();

  StandardFormLp<Scalar> lp;
  lp.points = M;
  lp.cost = Vector<Scalar>::Ones(k * M);
  lp.constraint_matrix = Matrix<Scalar>::Zero(total, k * M);
  lp.rhs.resize(total);
  Index row = 0;
  for (Index i = 0; i < k; ++i) {
    const auto& sb = bases[i];
    const Vector<Scalar> bi = sb.basis.transpose() * sb.ecm_weights;
    if (bi.norm() < Scalar(1e-14))
      throw IllPosed("LP block " + std::to_string(i + 1) +
                     " has vanishing exact integrals; augment the basis with constants");
    lp.constraint_matrix.block(row, i * M, sb.modes(), M) = sb.basis.transpose();
    lp.rhs.segment(row, sb.modes()) = bi;
    lp.block_rows.push_back(sb.modes());
    row += sb.modes();
  }
  return lp;
}

template <typename Scalar>
LpSolution<Scalar> solve_simplex(const StandardFormLp<Scalar>& lp, PivotRule rule = PivotRule::Bland) {
  SimplexOptions<Scalar> opts;
  opts.pivot_rule = rule;
  return solve_simplex(lp.constraint_matrix, lp.rhs, lp.cost, opts);
}

/// E = { g : sum_i z^(i)_g > zero_floor }, w^(i) = z^(i)(E) mapped back to
/// the original function space through each basis' row scale.
template <typename Scalar>
AdaptiveRule<Scalar> extract_rule(const LpSolution<Scalar>& sol, const std::vector<SubspaceBasis<Scalar>>& bases,
                                  Scalar zero_floor = Scalar(1e-10)) {
  if (sol.status != LpStatus::Optimal) throw NotOptimal();
  const Index k = static_cast<Index>(bases.size());
  const Index M = bases.front().basis.rows();
  if (sol.values.size() != k * M) throw ShapeMismatch("LP solution length differs from k*M");

  Vector<Scalar> total = Vector<Scalar>::Zero(M);
  for (Index i = 0; i < k; ++i) total += sol.values.segment(i * M, M);
  AdaptiveRule<Scalar> rule;
  for (Index g = 0; g < M; ++g)
    if (total(g) > zero_floor) rule.indices.push_back(g);
  for (Index i = 0; i < k; ++i) {
    Vector<Scalar> w(rule.size());
    for (Index p = 0; p < rule.size(); ++p) {
      const Index g = rule.indices[p];
      w(p) = sol.values(i * M + g) * bases[i].row_scale(g);
    }
    rule.per_subspace_weights.push_back(std::move(w));
    rule.per_subspace_mode_counts.push_back(bases[i].modes());
  }
  rule.m_max = max_modes(bases);
  rule.visit_order.resize(static_cast<std::size_t>(k));
  std::iota(rule.visit_order.begin(), rule.visit_order.end(), Index{0});
  return rule;
}

}  // namespace sawcub
