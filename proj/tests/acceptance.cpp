// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Detail lines under each criterion show measured values.

#include <sawcub/io.hpp>
#include <sawcub/lp_rule.hpp>
#include <sawcub/strategies.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <set>
#include <string>

using namespace sawcub;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(const char* id, bool pass, const std::string& summary) {
  std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", summary.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
  std::printf("    ");
  va_list ap;
  va_start(ap, fmt);
  std::vprintf(fmt, ap);
  va_end(ap);
  std::printf("\n");
}

std::string one_based(const std::vector<Index>& idx) {
  std::string s = "{";
  for (std::size_t p = 0; p < idx.size(); ++p) s += (p ? "," : "") + std::to_string(idx[p] + 1);
  return s + "}";
}

MatrixXd gaussian(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  MatrixXd a(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) a(i, j) = n(rng);
  return a;
}

MatrixXd random_orthonormal(Index M, Index m, std::mt19937_64& rng) {
  return Eigen::HouseholderQR<MatrixXd>(gaussian(M, m, rng)).householderQ() * MatrixXd::Identity(M, m);
}

std::vector<SubspaceBasis<double>> bases_of(const SubspaceFamily<double>& f, AugmentPolicy p) {
  SawEcmOptions<double> o;
  o.augment = p;
  return prepare_bases(f, o);
}

// ------------------------------------------------------------------ AC1
void ac1() {
  const auto t0 = Clock::now();
  const auto f = poly_scalar_family();
  const auto rule = saw_ecm(bases_of(f, AugmentPolicy::WhenIllPosed), NaturalOrder{});
  const double t = seconds_since(t0);
  const auto grid = gauss_legendre(20, 0, 1);
  double worst = 0;
  if (rule.size() == 1) {
    const double x = grid.points(rule.indices[0]);
    for (int mu = 0; mu < 6; ++mu) {
      const double exact = 1.0 / (mu + 1);
      worst = std::max(worst, std::abs(rule.per_subspace_weights[mu](0) * std::pow(x, mu) - exact) / exact);
    }
    detail("shared point x = %.15f (index %ld)", x, static_cast<long>(rule.indices[0] + 1));
  }
  const bool pass = rule.size() == 1 && worst <= 1e-10 && t < 1.0;
  char buf[256];
  std::snprintf(buf, sizeof buf, "poly-scalar SAW-ECM: card(E) = %ld (want 1), max rel moment error %.2e (tol 1e-10), %.3f s (limit 1 s)",
                static_cast<long>(rule.size()), worst, t);
  verdict("AC1", pass, buf);
}

// ------------------------------------------------------------------ AC2
void ac2() {
  const auto t0 = Clock::now();
  const auto f = poly_scalar_family();
  const auto b = bases_of(f, AugmentPolicy::WhenIllPosed);
  const auto global = global_rule(b, SawEcmOptions<double>{});
  const auto passes = independent_baseline(b);
  const auto indep = independent_rule(b);
  const double t = seconds_since(t0);
  bool each_one = true;
  for (const auto& p : passes) each_one = each_one && p.size() == 1;
  const double res = std::max(evaluate_rule(global, f).max_residual, evaluate_rule(indep, f).max_residual);
  detail("global E = %s, independent union = %s", one_based(global.indices).c_str(), one_based(indep.indices).c_str());
  const bool pass = global.size() == 6 && each_one && std::abs(double(indep.size()) - 4.0) <= 1.0 && res <= 1e-10 && t < 1.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "poly-scalar baselines: global card(E) = %ld (want 6), independent 1 point each = %s, union %ld (want 4 +- 1), "
                "max residual %.1e, %.3f s (limit 1 s)",
                static_cast<long>(global.size()), each_one ? "yes" : "no", static_cast<long>(indep.size()), res, t);
  verdict("AC2", pass, buf);
}

// ------------------------------------------------------------------ AC3
void ac3() {
  const auto t0 = Clock::now();
  const auto f = poly_vector_family();
  const auto b = bases_of(f, AugmentPolicy::WhenIllPosed);
  const auto saw = saw_ecm(b, NaturalOrder{});
  const auto global = global_rule(b, SawEcmOptions<double>{});
  const auto lp = assemble_lp(b);
  const auto sol = solve_simplex(lp, PivotRule::Dantzig);
  const auto lp_rule = extract_rule(sol, b, 1e-10);
  const double t = seconds_since(t0);
  const auto bland = extract_rule(solve_simplex(lp, PivotRule::Bland), b, 1e-10);

  const double res = std::max({evaluate_rule(saw, f).max_residual, evaluate_rule(global, f).max_residual,
                               evaluate_rule(lp_rule, f).max_residual});
  detail("SAW-ECM E = %s", one_based(saw.indices).c_str());
  detail("m_max = %ld, m_all = %ld (untruncated SVD of the concatenated bases)", static_cast<long>(max_modes(b)),
         static_cast<long>(global_dimension(b)));
  detail("LP (Dantzig pricing) E = %s; Bland pricing gives card(E) = %ld", one_based(lp_rule.indices).c_str(),
         static_cast<long>(bland.size()));
  const bool saw_ok = saw.size() == 2, global_ok = global.size() == 20,
             lp_ok = lp_rule.size() >= 2 && lp_rule.size() <= 5;
  const bool pass = saw_ok && global_ok && lp_ok && res <= 1e-9 && t < 5.0;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "poly-vector: SAW-ECM card(E) = %ld (want 2) %s, global card(E) = %ld (want 20) %s, LP card(E) = %ld "
                "(want 2..5) %s, max residual %.1e, %.3f s (limit 5 s)",
                static_cast<long>(saw.size()), saw_ok ? "ok" : "MISS", static_cast<long>(global.size()),
                global_ok ? "ok" : "MISS", static_cast<long>(lp_rule.size()), lp_ok ? "ok" : "MISS", res, t);
  verdict("AC3", pass, buf);
}

// ------------------------------------------------------------------ AC4
void ac4() {
  const auto toy = toy_problem();
  const auto full = ecm_select(toy.basis, toy.weights);
  const Index y0[] = {3, 4, 5};
  const auto seeded = ecm_select(toy.basis, toy.weights, y0);
  const std::set<Index> full_set(full.indices.begin(), full.indices.end());
  const bool full_ok = full_set == std::set<Index>{0, 3};
  const bool seeded_ok = seeded.enlarged && seeded.residual_norm <= 1e-12 * seeded.target_norm;
  const VectorXd score = toy.basis * toy.basis.transpose() * toy.weights;
  detail("first-step scores g.b at nodes 3, 4: %.17g, %.17g (b1 = %.2e)",
         score(2) / toy.basis.row(2).norm(), score(3) / toy.basis.row(3).norm(),
         (toy.basis.col(0).transpose() * toy.weights)(0));
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "toy: full candidate set E = %s (want {1,4}) %s; y0 = {4,5,6}: enlarged = %s, E = %s, rel residual %.1e %s",
                one_based(full.indices).c_str(), full_ok ? "ok" : "MISS", seeded.enlarged ? "true" : "false",
                one_based(seeded.indices).c_str(), seeded.residual_norm / seeded.target_norm, seeded_ok ? "ok" : "MISS");
  verdict("AC4", full_ok && seeded_ok, buf);
}

// ------------------------------------------------------------------ AC5
void ac5() {
  const auto t0 = Clock::now();
  ManifoldConfig c;
  const Index P = c.steps;
  bool sandwich = true, residual_ok = true;
  double worst_res = 0;
  Index card_first = 0, card_last = 0;
  std::vector<SubspaceBasis<double>> last_bases;
  for (Index k : {Index(1), Index(5), Index(25), Index(100), P - 2}) {
    const auto fam = manifold_family(c, k == P - 2 ? 0 : k);
    auto b = bases_of(fam.family, AugmentPolicy::Always);
    const auto rule = saw_ecm(b, NaturalOrder{});
    const Index lo = max_modes(b), hi = global_dimension(b);
    const double res = evaluate_rule(rule, fam.family).max_residual;
    worst_res = std::max(worst_res, res);
    sandwich = sandwich && lo <= rule.size() && rule.size() <= hi;
    residual_ok = residual_ok && res <= 1e-8;
    detail("k = %3ld: m_max = %3ld <= card(E) = %3ld <= m_all = %3ld, max residual %.1e", static_cast<long>(k),
           static_cast<long>(lo), static_cast<long>(rule.size()), static_cast<long>(hi), res);
    if (k == 1) card_first = rule.size();
    if (k == P - 2) {
      card_last = rule.size();
      last_bases = std::move(b);
    }
  }
  const double ratio = double(card_last) / double(card_first);
  Index lo = std::numeric_limits<Index>::max(), hi = 0;
  std::string counts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rule = saw_ecm(last_bases, SeededRandomOrder{seed});
    lo = std::min(lo, rule.size());
    hi = std::max(hi, rule.size());
    counts += (seed ? " " : "") + std::to_string(rule.size());
  }
  const double spread = double(hi - lo) / double(lo);
  const double t = seconds_since(t0);
  detail("card(E) over 20 random orderings at k = P-2: %s", counts.c_str());
  const bool pass = sandwich && ratio <= 0.25 && residual_ok && spread <= 0.35 && t < 60;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "manifold: sandwich %s, card(E) k=P-2 / k=1 = %ld/%ld = %.2f (limit 0.25), max residual %.1e (tol 1e-8), "
                "ordering spread %.2f (limit 0.35), %.1f s (limit 60 s)",
                sandwich ? "holds" : "VIOLATED", static_cast<long>(card_last), static_cast<long>(card_first), ratio,
                worst_res, spread, t);
  verdict("AC5", pass, buf);
}

// ------------------------------------------------------------------ AC6
void ac6() {
  std::mt19937_64 rng(6);
  bool ok = true;

  // ECM positivity and exactness
  int ecm_bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 1 + trial % 8;
    const MatrixXd u = random_orthonormal(50, m, rng);
    try {
      const auto out = ecm_select(u, VectorXd::Ones(50));
      MatrixXd rows(out.size(), m);
      for (Index p = 0; p < out.size(); ++p) rows.row(p) = u.row(out.indices[p]);
      const VectorXd b = u.transpose() * VectorXd::Ones(50);
      if (!(out.weights.array() > 0).all() || (rows.transpose() * out.weights - b).norm() > 1e-9 * b.norm()) ++ecm_bad;
    } catch (const Error&) {
      ++ecm_bad;
    }
  }
  detail("ECM on 50 random orthonormal bases: %d failures", ecm_bad);
  ok = ok && ecm_bad == 0;

  // weighted SVD orthogonality in diag(W)
  const auto grid = gauss_legendre(20, 0, 1);
  MatrixXd mono(20, 6);
  for (int j = 0; j < 6; ++j) mono.col(j) = grid.points.array().pow(double(j)).matrix();
  const MatrixXd ut = unweight_basis(weighted_svd(mono, grid.weights, 0.0).left, grid.weights);
  const double worth = (ut.transpose() * grid.weights.asDiagonal() * ut - MatrixXd::Identity(ut.cols(), ut.cols()))
                           .cwiseAbs()
                           .maxCoeff();
  detail("weighted SVD: max |U~^T W U~ - I| = %.1e", worth);
  ok = ok && worth <= 1e-10;

  // augmentation
  double aug_orth = 0, aug_span = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index M = 10 + trial, m = 1 + trial % 5;
    const MatrixXd a = augment_with_constant(random_orthonormal(M, m, rng));
    aug_orth = std::max(aug_orth, (a.transpose() * a - MatrixXd::Identity(m + 1, m + 1)).cwiseAbs().maxCoeff());
    const VectorXd ones = VectorXd::Ones(M);
    aug_span = std::max(aug_span, (ones - a * (a.transpose() * ones)).norm() / ones.norm());
  }
  detail("augmentation: orthonormality %.1e, constant-span residual %.1e", aug_orth, aug_span);
  ok = ok && aug_orth < 1e-10 && aug_span < 1e-10;

  // incremental least squares against a direct solve
  double ls_worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 2 + trial % 7;
    const MatrixXd u = gaussian(m + 6, m, rng);
    const VectorXd b = gaussian(m, 1, rng);
    LsState<double> s;
    for (Index r = 0; r < m; ++r) s = ls_add_row(s, r, u.row(r), b);
    const Index drop[] = {trial % m};
    s = ls_remove_rows<double>(s, drop, b);
    s = ls_add_row(s, m, u.row(m), b);
    MatrixXd rows(s.size(), m);
    for (Index p = 0; p < s.size(); ++p) rows.row(p) = u.row(s.selected_rows[p]);
    const VectorXd direct =
        Eigen::JacobiSVD<MatrixXd>(rows.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    ls_worst = std::max(ls_worst, (s.weights - direct).norm() / std::max(1.0, direct.norm()));
  }
  detail("incremental LS vs direct solve, 100 instances: max rel difference %.1e", ls_worst);
  ok = ok && ls_worst <= 1e-10;

  // Gauss-Legendre exactness boundary; the degree-2n error must match the
  // closed form (n!)^4 / ((2n+1) ((2n)!)^2) on [0,1]
  bool gauss_ok = true;
  for (int n : {1, 2, 4, 7, 10}) {
    const auto g = gauss_legendre(n, 0, 1);
    for (int j = 0; j <= 2 * n; ++j) {
      const double err = 1.0 / double(j + 1) - g.weights.dot(g.points.array().pow(double(j)).matrix());
      if (j <= 2 * n - 1) {
        gauss_ok = gauss_ok && std::abs(err) * double(j + 1) <= 1e-13;
      } else {
        const double nf = std::tgamma(n + 1.0), n2f = std::tgamma(2.0 * n + 1);
        const double expect = std::pow(nf, 4) / ((2.0 * n + 1) * n2f * n2f);
        gauss_ok = gauss_ok && err > 0 && std::abs(err / expect - 1) <= 1e-3;
      }
    }
  }
  detail("Gauss-Legendre exact through degree 2n-1, inexact at 2n: %s", gauss_ok ? "yes" : "no");
  ok = ok && gauss_ok;

  // LP vertex sparsity and feasibility
  bool lp_ok = true;
  for (const auto& f : {poly_scalar_family(), poly_vector_family()}) {
    const auto b = bases_of(f, AugmentPolicy::WhenIllPosed);
    const auto lp = assemble_lp(b);
    for (PivotRule rule : {PivotRule::Bland, PivotRule::Dantzig}) {
      const auto sol = solve_simplex(lp, rule);
      const Index nnz = (sol.values.array() > 0).count();
      const double feas = (lp.constraint_matrix * sol.values - lp.rhs).norm();
      lp_ok = lp_ok && sol.status == LpStatus::Optimal && nnz <= lp.constraint_matrix.rows() && feas <= 1e-9;
      detail("LP %s/%s: nonzeros %ld <= sum m_i = %ld, feasibility %.1e", f.subspaces() == 6 ? "poly-scalar" : "poly-vector",
             rule == PivotRule::Bland ? "bland" : "dantzig", static_cast<long>(nnz),
             static_cast<long>(lp.constraint_matrix.rows()), feas);
    }
  }
  ok = ok && lp_ok;

  // rule file round trip
  bool io_ok = true;
  for (const auto& f : {poly_scalar_family(), poly_vector_family()}) {
    RuleFile rf;
    rf.points = f.points();
    rf.rule = saw_ecm(bases_of(f, AugmentPolicy::WhenIllPosed), SeededRandomOrder{3});
    rf.metadata["strategy"] = "saw-ecm";
    rf.metadata["seed"] = 3;
    const auto text = emit_rule(rf);
    io_ok = io_ok && emit_rule(parse_rule(text)) == text;
  }
  detail("rule file emit/parse/emit byte-identical: %s", io_ok ? "yes" : "no");
  ok = ok && io_ok;

  verdict("AC6", ok, "invariant suites (ECM, weighted SVD, augmentation, incremental LS, Gauss, LP, rule files)");
}

}  // namespace

int main() {
  const std::pair<const char*, void (*)()> criteria[] = {{"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3},
                                                          {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6}};
  for (const auto& [id, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      verdict(id, false, std::string("error: ") + e.what());
    }
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
