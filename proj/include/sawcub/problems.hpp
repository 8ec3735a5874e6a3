#pragma once

// Benchmark families, quadrature grids, snapshot windowing, the synthetic
// snapshot manifold and rule evaluation.

#include <sawcub/saw_ecm.hpp>
#include <sawcub/types.hpp>

#include <cstdint>
#include <optional>

namespace sawcub {

enum class GridDomain { Interval, ElementAggregated };

struct QuadratureGrid {
  VectorXd points;
  VectorXd weights;
  GridDomain domain = GridDomain::Interval;
  double lower = 0;
  double upper = 0;

  Index size() const { return weights.size(); }
  double volume() const { return weights.sum(); }
};

/// n-point Gauss-Legendre rule on [lower, upper].
QuadratureGrid gauss_legendre(Index n, double lower = -1, double upper = 1);

/// `elements` equal subintervals of [lower, upper], each with an n-point
/// Gauss rule; points are numbered element by element.
QuadratureGrid composite_gauss_legendre(Index n, Index elements, double lower, double upper);

/// One single-column sample matrix x^mu per degree.
SubspaceFamily<double> monomial_family(const QuadratureGrid& grid, const std::vector<int>& degrees);

/// One two-column sample matrix [1 | x^mu] per degree.
SubspaceFamily<double> vector_monomial_family(const QuadratureGrid& grid, const std::vector<int>& degrees);

/// Element-level (ECSW-style) family: rows become per-element integral
/// contributions sum_{g in e} W_g A(g,:), and the weights become all ones.
SubspaceFamily<double> aggregate_by_element(const SubspaceFamily<double>& family, Index points_per_element);

/// Two-mode, six-point illustration: u1 = sqrt(3/2) x, u2 = sqrt(1/2)
/// sampled at the 6-point Gauss rule on [-1, 1].
struct ToyProblem {
  MatrixXd basis;
  VectorXd weights;
};
ToyProblem toy_problem();

struct ClusterWindowing {
  Index snapshot_count = 0;
  Index window_size = 3;
  Index overlap = 1;
  std::vector<std::vector<Index>> clusters;  // 0-based, ascending snapshot indices

  Index size() const { return static_cast<Index>(clusters.size()); }
};

/// Consecutive windows of `window_size` snapshots; each window's core of
/// window_size - 2*overlap snapshots is padded by `overlap` snapshots on
/// both sides, so window 3 / overlap 1 gives the triples {i-1, i, i+1} and
/// k = P - 2 clusters.
ClusterWindowing window_by_size(Index snapshot_count, Index window_size = 3, Index overlap = 1);

/// Exactly k clusters: the interior snapshots are split into k nearly equal
/// contiguous cores, each padded by `overlap` snapshots per side.
ClusterWindowing window_by_count(Index snapshot_count, Index k, Index overlap = 1);

enum class ManifoldMode {
  Trajectory,  // smooth nonlinear family along a piecewise-affine parameter path
  Frozen,      // constant parameters: every snapshot identical
};

struct SnapshotSet {
  QuadratureGrid grid;
  MatrixXd snapshots;  // M x P, column t is the state at step t
};

/// Quasi-static trajectory stand-in: P snapshots d^t(x) = f(x; theta(t)) on
/// an M-point composite Gauss grid over [0,1], theta piecewise affine in t
/// with seeded breakpoints.
SnapshotSet synthetic_manifold(Index points, Index steps, ManifoldMode mode = ManifoldMode::Trajectory,
                               std::uint64_t seed = 0);

struct IntegrandFamily {
  SubspaceFamily<double> family;
  std::vector<Index> displacement_ranks;  // n_i per cluster
  double snapshot_reconstruction_error = 0;  // |D - Phi Phi^T D|_F / |D|_F over all windows
};

/// Per cluster: Phi^(i) from the window's snapshots (truncated SVD at
/// `displacement_svd_tol`), projected snapshots d_hat = Phi Phi^T d, and the
/// integrand columns a_{s,j}(g) = Phi_j(g) * sigma(d_hat_s(g)) with the
/// pointwise nonlinearity sigma(d) = d + d^2 / 2. A^(i) is M x (P_i n_i).
IntegrandFamily integrand_matrices(const SnapshotSet& snapshots, const ClusterWindowing& windowing,
                                   double displacement_svd_tol);

/// Pointwise nonlinearity used by integrand_matrices.
double integrand_nonlinearity(double d);

struct ErrorReport {
  VectorXd per_subspace_relative_residual;
  double max_residual = 0;
  std::optional<double> snapshot_reconstruction_error;
};

/// |A^(i)(E,:)^T w^(i) - A^(i)T W| / |A^(i)T W| per subspace (0/0 -> 0).
ErrorReport evaluate_rule(const AdaptiveRule<double>& rule, const SubspaceFamily<double>& family);

/// The trivial rule E = all points, w^(i) = W.
AdaptiveRule<double> full_rule(const SubspaceFamily<double>& family);

}  // namespace sawcub
