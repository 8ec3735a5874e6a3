#pragma once

// Subspace-adaptive weights ECM: one shared set of points, one nonnegative
// weight vector per subspace.
//
// Each sample matrix A^(i) is reduced to an orthonormal basis U^(i) by a
// truncated SVD, optionally augmented with the constant function, and the
// enhanced ECM is run over the bases in a chosen visit order, each pass
// seeded with the union of the points selected so far.

#include <sawcub/ecm.hpp>
#include <sawcub/svd.hpp>
#include <sawcub/types.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <variant>

namespace sawcub {

template <typename Scalar>
struct SubspaceFamily {
  std::vector<Matrix<Scalar>> sample_matrices;  // each M x (n_i P_i)
  Vector<Scalar> full_weights;                  // M, strictly positive

  Index points() const { return full_weights.size(); }
  Index subspaces() const { return static_cast<Index>(sample_matrices.size()); }

  void validate() const {
    if (sample_matrices.empty()) throw ShapeMismatch("family has no subspaces");
    require_positive(full_weights);
    for (const auto& a : sample_matrices) {
      if (a.rows() != points()) throw ShapeMismatch("sample matrix row count differs from weight length");
      require_finite(a);
    }
  }
};

/// Visit order of the subspaces in the accumulation loop.
struct NaturalOrder {};
struct SeededRandomOrder {
  std::uint64_t seed = 0;
};
struct ExplicitOrder {
  std::vector<Index> permutation;
};
using Ordering = std::variant<NaturalOrder, SeededRandomOrder, ExplicitOrder>;

/// When to append the constant function to a subspace basis.
///  - Always: whenever constants are not already in the span.
///  - WhenIllPosed: only if |U^T W| <= ill_posed_ratio * |W| (the zero rule
///    would otherwise be feasible); well-posed subspaces keep their m_i.
///  - Never.
enum class AugmentPolicy { Always, WhenIllPosed, Never };

template <typename Scalar>
struct SawEcmOptions {
  Scalar svd_tolerance = 0;
  Ordering ordering = NaturalOrder{};
  AugmentPolicy augment = AugmentPolicy::WhenIllPosed;
  Scalar ill_posed_ratio = 1e-8;
  bool weighted = false;  // diag(W)-orthogonal bases via the weighted SVD
  EcmOptions<Scalar> ecm{};
};

/// Basis handed to the ECM together with the weights it integrates against.
/// In the weighted formulation the ECM sees Ubar = diag(sqrt W) Utilde and
/// weights sqrt(W); cubature weights on the original functions are
/// recovered as ecm_weight * row_scale.
template <typename Scalar>
struct SubspaceBasis {
  Matrix<Scalar> basis;
  Vector<Scalar> ecm_weights;
  Vector<Scalar> row_scale;
  Index svd_rank = 0;
  bool augmented = false;

  Index modes() const { return basis.cols(); }
};

template <typename Scalar>
struct AdaptiveRule {
  std::vector<Index> indices;                         // shared set E, ascending, 0-based
  std::vector<Vector<Scalar>> per_subspace_weights;   // k vectors of length card(E)
  std::vector<Index> per_subspace_mode_counts;        // m_i
  Index m_max = 0;
  std::vector<Index> visit_order;

  Index size() const { return static_cast<Index>(indices.size()); }
  Index subspaces() const { return static_cast<Index>(per_subspace_weights.size()); }
};

template <typename Scalar>
std::vector<Index> visit_order(const Ordering& ordering, Index k) {
  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  if (const auto* r = std::get_if<SeededRandomOrder>(&ordering)) {
    std::mt19937_64 rng(r->seed);
    std::shuffle(order.begin(), order.end(), rng);
  } else if (const auto* e = std::get_if<ExplicitOrder>(&ordering)) {
    std::vector<Index> sorted = e->permutation;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != order) throw std::invalid_argument("explicit ordering is not a permutation of the subspaces");
    order = e->permutation;
  }
  return order;
}

/// Applies the augmentation policy to an orthonormal basis `u` whose ECM
/// weights are `w` and whose constant direction is `c`.
template <typename Scalar>
SubspaceBasis<Scalar> finish_basis(Matrix<Scalar> u, const Vector<Scalar>& w, const Vector<Scalar>& c,
                                   const Vector<Scalar>& row_scale, const SawEcmOptions<Scalar>& opts) {
  SubspaceBasis<Scalar> out;
  out.svd_rank = u.cols();
  out.ecm_weights = w;
  out.row_scale = row_scale;
  bool want = false;
  switch (opts.augment) {
    case AugmentPolicy::Always: want = true; break;
    case AugmentPolicy::Never: want = false; break;
    case AugmentPolicy::WhenIllPosed:
      want = (u.transpose() * w).norm() <= opts.ill_posed_ratio * w.norm();
      break;
  }
  if (want) {
    try {
      u = augment_with_vector(u, c);
      out.augmented = true;
    } catch (const AlreadyContained&) {
    }
  }
  out.basis = std::move(u);
  return out;
}

/// Truncated SVD + augmentation of one sample matrix.
template <typename Scalar>
SubspaceBasis<Scalar> subspace_basis(const Matrix<Scalar>& a, const Vector<Scalar>& w,
                                     const SawEcmOptions<Scalar>& opts) {
  if (opts.weighted) {
    const Vector<Scalar> sqrt_w = w.cwiseSqrt();
    auto svd = weighted_svd(a, w, opts.svd_tolerance, false);
    return finish_basis<Scalar>(std::move(svd.left), sqrt_w, sqrt_w, sqrt_w, opts);
  }
  auto svd = truncated_svd(a, opts.svd_tolerance, false);
  const Vector<Scalar> ones = Vector<Scalar>::Ones(w.size());
  return finish_basis<Scalar>(std::move(svd.left), w, ones, ones, opts);
}

/// Bases of every subspace. The SVDs are independent of each other.
template <typename Scalar>
std::vector<SubspaceBasis<Scalar>> prepare_bases(const SubspaceFamily<Scalar>& family,
                                                 const SawEcmOptions<Scalar>& opts) {
  family.validate();
  std::vector<SubspaceBasis<Scalar>> bases(family.sample_matrices.size());
  for (std::size_t i = 0; i < bases.size(); ++i) {
    try {
      bases[i] = subspace_basis(family.sample_matrices[i], family.full_weights, opts);
    } catch (const ZeroMatrix&) {
      throw IllPosed("subspace " + std::to_string(i + 1) + ": sample matrix is zero");
    }
  }
  return bases;
}

/// Upper bound m_all: rank of [U^(1) | ... | U^(k)] by untruncated SVD.
template <typename Scalar>
Index global_dimension(const std::vector<SubspaceBasis<Scalar>>& bases) {
  if (bases.empty()) return 0;
  Index cols = 0;
  for (const auto& b : bases) cols += b.modes();
  Matrix<Scalar> concat(bases.front().basis.rows(), cols);
  Index at = 0;
  for (const auto& b : bases) {
    concat.middleCols(at, b.modes()) = b.basis;
    at += b.modes();
  }
  return numerical_rank(concat);
}

/// Lower bound m_max: the largest basis dimension.
template <typename Scalar>
Index max_modes(const std::vector<SubspaceBasis<Scalar>>& bases) {
  Index m = 0;
  for (const auto& b : bases) m = std::max(m, b.modes());
  return m;
}

namespace detail {

/// Scatters per-subspace ECM outputs into card(E)-length vectors; inactive
/// positions hold exact zeros.
template <typename Scalar>
AdaptiveRule<Scalar> assemble_rule(const std::vector<SubspaceBasis<Scalar>>& bases,
                                   const std::vector<EcmOutput<Scalar>>& outputs,
                                   std::vector<Index> order) {
  std::set<Index> all;
  for (const auto& o : outputs) all.insert(o.indices.begin(), o.indices.end());
  AdaptiveRule<Scalar> rule;
  rule.indices.assign(all.begin(), all.end());
  rule.visit_order = std::move(order);
  rule.m_max = max_modes(bases);
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    Vector<Scalar> w = Vector<Scalar>::Zero(rule.size());
    for (Index p = 0; p < outputs[i].size(); ++p) {
      const Index g = outputs[i].indices[p];
      const auto pos = std::lower_bound(rule.indices.begin(), rule.indices.end(), g) - rule.indices.begin();
      w(pos) = outputs[i].weights(p) * bases[i].row_scale(g);
    }
    rule.per_subspace_weights.push_back(std::move(w));
    rule.per_subspace_mode_counts.push_back(bases[i].modes());
  }
  return rule;
}

}  // namespace detail

/// Accumulation loop over precomputed bases.
template <typename Scalar>
AdaptiveRule<Scalar> saw_ecm(const std::vector<SubspaceBasis<Scalar>>& bases, const Ordering& ordering,
                             const EcmOptions<Scalar>& ecm_opts = {},
                             std::vector<EcmOutput<Scalar>>* passes = nullptr) {
  if (bases.empty()) throw ShapeMismatch("SAW-ECM needs at least one subspace");
  const Index k = static_cast<Index>(bases.size());
  auto order = visit_order<Scalar>(ordering, k);
  std::vector<EcmOutput<Scalar>> outputs(static_cast<std::size_t>(k));
  std::set<Index> accumulated;
  std::vector<Index> y0;
  for (Index j : order) {
    try {
      outputs[j] = ecm_select(bases[j].basis, bases[j].ecm_weights, std::span<const Index>(y0), ecm_opts);
    } catch (const NoConvergence& e) {
      throw NoConvergence(e.what(), j);
    } catch (const IllPosed& e) {
      throw IllPosed("subspace " + std::to_string(j + 1) + ": " + e.what());
    }
    const auto before = accumulated.size();
    accumulated.insert(outputs[j].indices.begin(), outputs[j].indices.end());
    if (accumulated.size() != before) y0.assign(accumulated.begin(), accumulated.end());
  }
  auto rule = detail::assemble_rule(bases, outputs, std::move(order));
  if (passes) *passes = std::move(outputs);
  return rule;
}

/// SVD of each sample matrix, augmentation, then the accumulation loop.
template <typename Scalar>
AdaptiveRule<Scalar> saw_ecm(const SubspaceFamily<Scalar>& family, const SawEcmOptions<Scalar>& opts = {}) {
  return saw_ecm(prepare_bases(family, opts), opts.ordering, opts.ecm);
}

/// Naive baseline: one full-pool ECM per subspace.
template <typename Scalar>
std::vector<EcmOutput<Scalar>> independent_baseline(const std::vector<SubspaceBasis<Scalar>>& bases,
                                                    const EcmOptions<Scalar>& ecm_opts = {}) {
  std::vector<EcmOutput<Scalar>> outputs;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    try {
      outputs.push_back(ecm_select(bases[i].basis, bases[i].ecm_weights, {}, ecm_opts));
    } catch (const NoConvergence& e) {
      throw NoConvergence(e.what(), static_cast<Index>(i));
    }
  }
  return outputs;
}

/// Union of independent per-subspace rules, in AdaptiveRule form.
template <typename Scalar>
AdaptiveRule<Scalar> independent_rule(const std::vector<SubspaceBasis<Scalar>>& bases,
                                      const EcmOptions<Scalar>& ecm_opts = {}) {
  auto outputs = independent_baseline(bases, ecm_opts);
  std::vector<Index> order(bases.size());
  std::iota(order.begin(), order.end(), Index{0});
  return detail::assemble_rule(bases, outputs, std::move(order));
}

/// Standard (single weight vector) ECM on the sum of all subspaces: the
/// concatenated bases are re-orthonormalised by an untruncated SVD, the
/// augmentation policy is applied, and every subspace gets the same weights.
template <typename Scalar>
AdaptiveRule<Scalar> global_rule(const std::vector<SubspaceBasis<Scalar>>& bases,
                                 const SawEcmOptions<Scalar>& opts) {
  if (bases.empty()) throw ShapeMismatch("global ECM needs at least one subspace");
  Index cols = 0;
  for (const auto& b : bases) cols += b.modes();
  Matrix<Scalar> concat(bases.front().basis.rows(), cols);
  Index at = 0;
  for (const auto& b : bases) {
    concat.middleCols(at, b.modes()) = b.basis;
    at += b.modes();
  }
  auto svd = truncated_svd(concat, Scalar(0), false);
  const Vector<Scalar>& w = bases.front().ecm_weights;
  const Vector<Scalar>& scale = bases.front().row_scale;
  const Vector<Scalar> c = opts.weighted ? w : Vector<Scalar>::Ones(w.size());
  auto global = finish_basis<Scalar>(std::move(svd.left), w, c, scale, opts);

  EcmOutput<Scalar> out;
  try {
    out = ecm_select(global.basis, global.ecm_weights, {}, opts.ecm);
  } catch (const NoConvergence& e) {
    throw NoConvergence(std::string("global ECM: ") + e.what());
  }
  AdaptiveRule<Scalar> rule;
  rule.indices = out.indices;
  Vector<Scalar> wts(out.size());
  for (Index p = 0; p < out.size(); ++p) wts(p) = out.weights(p) * scale(out.indices[p]);
  for (const auto& b : bases) {
    rule.per_subspace_weights.push_back(wts);
    rule.per_subspace_mode_counts.push_back(b.modes());
  }
  rule.m_max = max_modes(bases);
  rule.visit_order.resize(bases.size());
  std::iota(rule.visit_order.begin(), rule.visit_order.end(), Index{0});
  return rule;
}

}  // namespace sawcub
