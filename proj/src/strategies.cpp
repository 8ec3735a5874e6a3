#include <sawcub/strategies.hpp>

#include <chrono>
#include <stdexcept>

namespace sawcub {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::GlobalEcm: return "global-ecm";
    case Strategy::IndependentEcm: return "independent-ecm";
    case Strategy::SawEcm: return "saw-ecm";
    case Strategy::Lp: return "lp";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  for (Strategy s : all_strategies())
    if (name == to_string(s)) return s;
  throw std::invalid_argument("unknown strategy '" + name + "' (global-ecm, independent-ecm, saw-ecm, lp)");
}

std::vector<Strategy> all_strategies() {
  return {Strategy::GlobalEcm, Strategy::IndependentEcm, Strategy::SawEcm, Strategy::Lp};
}

StrategyResult run_strategy(Strategy strategy, const SubspaceFamily<double>& family,
                            const std::vector<SubspaceBasis<double>>& bases, const StrategyOptions& opts) {
  StrategyResult out;
  out.strategy = strategy;
  const auto start = std::chrono::steady_clock::now();
  switch (strategy) {
    case Strategy::GlobalEcm: out.rule = global_rule(bases, opts.saw); break;
    case Strategy::IndependentEcm: out.rule = independent_rule(bases, opts.saw.ecm); break;
    case Strategy::SawEcm: out.rule = saw_ecm(bases, opts.saw.ordering, opts.saw.ecm); break;
    case Strategy::Lp: {
      Index rows = 0;
      for (const auto& b : bases) rows += b.modes();
      const double entries = double(rows) * double(rows + Index(bases.size()) * family.points());
      if (entries > opts.lp_max_entries)
        throw Error("dense simplex tableau would hold " + std::to_string(static_cast<long long>(entries)) +
                    " entries (limit " + std::to_string(static_cast<long long>(opts.lp_max_entries)) + ")");
      const auto lp = assemble_lp(bases);
      const auto sol = solve_simplex(lp, opts.pivot);
      out.lp_pivots = sol.pivot_count;
      if (sol.status != LpStatus::Optimal)
        throw NoConvergence(std::string("simplex ended with status ") + to_string(sol.status));
      out.rule = extract_rule(sol, bases, opts.zero_floor);
      break;
    }
  }
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.report = evaluate_rule(out.rule, family);
  return out;
}

SubspaceFamily<double> poly_scalar_family() {
  return monomial_family(gauss_legendre(20, 0, 1), {0, 1, 2, 3, 4, 5});
}

SubspaceFamily<double> poly_vector_family() {
  std::vector<int> degrees(20);
  for (int mu = 0; mu < 20; ++mu) degrees[mu] = mu;
  return vector_monomial_family(gauss_legendre(50, 0, 1), degrees);
}

IntegrandFamily manifold_family(const ManifoldConfig& config, Index clusters) {
  const auto snaps = synthetic_manifold(config.points, config.steps, ManifoldMode::Trajectory, config.seed);
  const auto windows = clusters > 0 ? window_by_count(config.steps, clusters, config.overlap)
                                    : window_by_size(config.steps, config.window, config.overlap);
  return integrand_matrices(snaps, windows, config.displacement_svd_tol);
}

}  // namespace sawcub
