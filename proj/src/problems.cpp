#include <sawcub/problems.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace sawcub {

QuadratureGrid gauss_legendre(Index n, double lower, double upper) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one point");
  if (!(upper > lower)) throw std::invalid_argument("Gauss-Legendre interval must have upper > lower");
  VectorXd x(n), w(n);
  const Index half = (n + 1) / 2;
  for (Index i = 0; i < half; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess; roots come in +/- pairs
    double z = std::cos(std::numbers::pi * (double(i) + 0.75) / (double(n) + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (Index k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / double(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = double(n) * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1, p1 = z;
      for (Index k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / double(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = double(n) * (z * p1 - p0) / (z * z - 1);
    }
    if (n % 2 == 1 && i == half - 1) z = 0;
    const double wi = 2.0 / ((1 - z * z) * dp * dp);
    // ascending order: negative root first
    x(i) = -z;
    x(n - 1 - i) = z;
    w(i) = wi;
    w(n - 1 - i) = wi;
  }
  QuadratureGrid g;
  const double mid = 0.5 * (upper + lower), rad = 0.5 * (upper - lower);
  g.points = (mid + rad * x.array()).matrix();
  g.weights = rad * w;
  g.lower = lower;
  g.upper = upper;
  return g;
}

QuadratureGrid composite_gauss_legendre(Index n, Index elements, double lower, double upper) {
  if (elements < 1) throw std::invalid_argument("composite rule needs at least one element");
  QuadratureGrid g;
  g.points.resize(n * elements);
  g.weights.resize(n * elements);
  const double h = (upper - lower) / double(elements);
  for (Index e = 0; e < elements; ++e) {
    const auto local = gauss_legendre(n, lower + h * double(e), lower + h * double(e + 1));
    g.points.segment(e * n, n) = local.points;
    g.weights.segment(e * n, n) = local.weights;
  }
  g.lower = lower;
  g.upper = upper;
  return g;
}

SubspaceFamily<double> monomial_family(const QuadratureGrid& grid, const std::vector<int>& degrees) {
  SubspaceFamily<double> f;
  f.full_weights = grid.weights;
  for (int mu : degrees) {
    if (mu < 0) throw std::invalid_argument("monomial degree must be nonnegative");
    f.sample_matrices.push_back(grid.points.array().pow(double(mu)).matrix());
  }
  return f;
}

SubspaceFamily<double> vector_monomial_family(const QuadratureGrid& grid, const std::vector<int>& degrees) {
  SubspaceFamily<double> f;
  f.full_weights = grid.weights;
  for (int mu : degrees) {
    if (mu < 0) throw std::invalid_argument("monomial degree must be nonnegative");
    MatrixXd a(grid.size(), 2);
    a.col(0).setOnes();
    a.col(1) = grid.points.array().pow(double(mu)).matrix();
    f.sample_matrices.push_back(std::move(a));
  }
  return f;
}

SubspaceFamily<double> aggregate_by_element(const SubspaceFamily<double>& family, Index points_per_element) {
  family.validate();
  const Index M = family.points();
  if (points_per_element < 1 || M % points_per_element != 0)
    throw ShapeMismatch("point count is not a multiple of the points per element");
  const Index E = M / points_per_element;
  SubspaceFamily<double> out;
  out.full_weights = VectorXd::Ones(E);
  for (const auto& a : family.sample_matrices) {
    MatrixXd agg = MatrixXd::Zero(E, a.cols());
    for (Index g = 0; g < M; ++g) agg.row(g / points_per_element) += family.full_weights(g) * a.row(g);
    out.sample_matrices.push_back(std::move(agg));
  }
  return out;
}

ToyProblem toy_problem() {
  const auto grid = gauss_legendre(6, -1, 1);
  ToyProblem t;
  t.weights = grid.weights;
  t.basis.resize(6, 2);
  t.basis.col(0) = std::sqrt(1.5) * grid.points;
  t.basis.col(1).setConstant(std::sqrt(0.5));
  return t;
}

ClusterWindowing window_by_size(Index snapshot_count, Index window_size, Index overlap) {
  if (overlap < 0 || window_size - 2 * overlap < 1)
    throw std::invalid_argument("window must keep at least one core snapshot after overlap padding");
  if (snapshot_count < window_size) throw std::invalid_argument("fewer snapshots than one window");
  ClusterWindowing w;
  w.snapshot_count = snapshot_count;
  w.window_size = window_size;
  w.overlap = overlap;
  const Index core = window_size - 2 * overlap;
  for (Index c = overlap; c < snapshot_count - overlap; c += core) {
    const Index end = std::min(c + core, snapshot_count - overlap);
    std::vector<Index> cl;
    for (Index s = c - overlap; s < end + overlap; ++s) cl.push_back(s);
    w.clusters.push_back(std::move(cl));
  }
  return w;
}

ClusterWindowing window_by_count(Index snapshot_count, Index k, Index overlap) {
  const Index interior = snapshot_count - 2 * overlap;
  if (overlap < 0 || k < 1 || interior < k)
    throw std::invalid_argument("cannot split the snapshots into the requested number of clusters");
  ClusterWindowing w;
  w.snapshot_count = snapshot_count;
  w.overlap = overlap;
  Index start = overlap;
  for (Index i = 0; i < k; ++i) {
    const Index len = interior / k + (i < interior % k ? 1 : 0);
    std::vector<Index> cl;
    for (Index s = start - overlap; s < start + len + overlap; ++s) cl.push_back(s);
    w.window_size = std::max<Index>(w.window_size, static_cast<Index>(cl.size()));
    w.clusters.push_back(std::move(cl));
    start += len;
  }
  return w;
}

namespace {

// Growing field whose wavenumber drifts with the load parameter. Every
// snapshot has global support; the long trajectory sweeps through many
// frequencies while a short window stays nearly affine in theta.
double manifold_state(double x, double theta) {
  const double omega = std::numbers::pi * (1.0 + 20.0 * theta);
  return 0.5 * theta * std::sin(omega * x) + 0.2 * theta * theta * x * std::cos(0.5 * omega * x + 1.0);
}

}  // namespace

SnapshotSet synthetic_manifold(Index points, Index steps, ManifoldMode mode, std::uint64_t seed) {
  if (points < 1 || steps < 3) throw std::invalid_argument("manifold needs at least one point and three steps");
  SnapshotSet s;
  const Index per_element = points % 4 == 0 ? 4 : 1;
  s.grid = composite_gauss_legendre(per_element, points / per_element, 0.0, 1.0);

  // load path: piecewise affine, increasing from 0 to 1 with seeded
  // breakpoints and slopes
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.5, 1.5);
  const int pieces = 4;
  std::vector<double> knots(pieces + 1, 0.0);
  for (int p = 1; p <= pieces; ++p) knots[p] = knots[p - 1] + uni(rng);
  for (auto& v : knots) v /= knots.back();

  s.snapshots.resize(points, steps);
  for (Index t = 0; t < steps; ++t) {
    double theta = 0.5;
    if (mode == ManifoldMode::Trajectory) {
      const double tau = double(t) / double(steps - 1) * pieces;
      const int p = std::min(int(tau), pieces - 1);
      theta = knots[p] + (tau - p) * (knots[p + 1] - knots[p]);
    }
    for (Index g = 0; g < points; ++g) s.snapshots(g, t) = manifold_state(s.grid.points(g), theta);
  }
  return s;
}

double integrand_nonlinearity(double d) { return d + 0.5 * d * d; }

IntegrandFamily integrand_matrices(const SnapshotSet& snapshots, const ClusterWindowing& windowing,
                                   double displacement_svd_tol) {
  const MatrixXd& D = snapshots.snapshots;
  const Index M = D.rows();
  IntegrandFamily out;
  out.family.full_weights = snapshots.grid.weights;
  double err2 = 0, tot2 = 0;
  for (Index i = 0; i < windowing.size(); ++i) {
    const auto& cl = windowing.clusters[i];
    MatrixXd Di(M, static_cast<Index>(cl.size()));
    for (std::size_t s = 0; s < cl.size(); ++s) {
      if (cl[s] < 0 || cl[s] >= D.cols()) throw std::out_of_range("cluster references a missing snapshot");
      Di.col(static_cast<Index>(s)) = D.col(cl[s]);
    }
    TruncatedSvd<double> svd;
    try {
      svd = truncated_svd(Di, displacement_svd_tol, false);
    } catch (const ZeroMatrix&) {
      throw DegenerateWindow(i);
    }
    if (svd.rank() == 0) throw DegenerateWindow(i);
    const MatrixXd& phi = svd.left;
    const MatrixXd proj = phi * (phi.transpose() * Di);
    err2 += (Di - proj).squaredNorm();
    tot2 += Di.squaredNorm();

    const Index n = phi.cols(), P = Di.cols();
    MatrixXd A(M, P * n);
    for (Index s = 0; s < P; ++s) {
      const VectorXd sig = proj.col(s).unaryExpr([](double d) { return integrand_nonlinearity(d); });
      for (Index j = 0; j < n; ++j) A.col(s * n + j) = phi.col(j).cwiseProduct(sig);
    }
    out.family.sample_matrices.push_back(std::move(A));
    out.displacement_ranks.push_back(n);
  }
  out.snapshot_reconstruction_error = tot2 > 0 ? std::sqrt(err2 / tot2) : 0.0;
  return out;
}

ErrorReport evaluate_rule(const AdaptiveRule<double>& rule, const SubspaceFamily<double>& family) {
  if (rule.subspaces() != family.subspaces()) throw ShapeMismatch("rule and family differ in subspace count");
  ErrorReport rep;
  rep.per_subspace_relative_residual.resize(family.subspaces());
  for (Index i = 0; i < family.subspaces(); ++i) {
    const MatrixXd& A = family.sample_matrices[i];
    const VectorXd exact = A.transpose() * family.full_weights;
    VectorXd approx = VectorXd::Zero(A.cols());
    for (Index p = 0; p < rule.size(); ++p) approx += rule.per_subspace_weights[i](p) * A.row(rule.indices[p]).transpose();
    const double num = (approx - exact).norm(), den = exact.norm();
    const double rel = den > 0 ? num / den : (num > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.per_subspace_relative_residual(i) = rel;
    rep.max_residual = std::max(rep.max_residual, rel);
  }
  return rep;
}

AdaptiveRule<double> full_rule(const SubspaceFamily<double>& family) {
  AdaptiveRule<double> r;
  for (Index g = 0; g < family.points(); ++g) r.indices.push_back(g);
  for (Index i = 0; i < family.subspaces(); ++i) {
    r.per_subspace_weights.push_back(family.full_weights);
    r.per_subspace_mode_counts.push_back(family.sample_matrices[i].cols());
    r.visit_order.push_back(i);
  }
  return r;
}

}  // namespace sawcub
