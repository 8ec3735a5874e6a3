#pragma once

// The four point-selection strategies behind one interface, plus the
// benchmark families used by the demos.

#include <sawcub/lp_rule.hpp>
#include <sawcub/problems.hpp>
#include <sawcub/saw_ecm.hpp>

#include <string>

namespace sawcub {

enum class Strategy { GlobalEcm, IndependentEcm, SawEcm, Lp };

const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& name);  // throws std::invalid_argument
std::vector<Strategy> all_strategies();

struct StrategyOptions {
  SawEcmOptions<double> saw{};
  PivotRule pivot = PivotRule::Bland;
  double zero_floor = 1e-10;
  double lp_max_entries = 3e7;  // dense tableau size guard (~240 MB)
};

struct StrategyResult {
  Strategy strategy = Strategy::SawEcm;
  AdaptiveRule<double> rule;
  ErrorReport report;
  double wall_time_s = 0;
  Index lp_pivots = 0;  // LP only
};

/// Runs one strategy on precomputed bases of `family`; the report measures
/// the rule against the original sample matrices.
StrategyResult run_strategy(Strategy strategy, const SubspaceFamily<double>& family,
                            const std::vector<SubspaceBasis<double>>& bases, const StrategyOptions& opts);

/// x^0..x^5 on the 20-point Gauss rule of [0,1].
SubspaceFamily<double> poly_scalar_family();
/// (1, x^mu), mu = 0..19, on the 50-point Gauss rule of [0,1].
SubspaceFamily<double> poly_vector_family();

struct ManifoldConfig {
  Index points = 200;
  Index steps = 400;
  std::uint64_t seed = 0;
  double displacement_svd_tol = 1e-12;
  Index window = 3;
  Index overlap = 1;
};

/// Synthetic snapshot manifold split into `clusters` windows (0 = by window
/// size, i.e. k = P - 2 for window 3 / overlap 1).
IntegrandFamily manifold_family(const ManifoldConfig& config, Index clusters);

}  // namespace sawcub
