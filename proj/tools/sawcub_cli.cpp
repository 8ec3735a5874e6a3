#include <sawcub/io.hpp>
#include <sawcub/strategies.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace sawcub;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kInputError = 2, kConvergenceError = 3 };

struct CommonFlags {
  double svd_tol = 0;
  std::string ordering = "natural";
  std::uint64_t seed = 0;
  Index lambda = 10;
  double low_norm_floor = 1e-6;
  double zero_floor = 1e-10;
  std::string pivot = "bland";
  std::string augment = "auto";
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--svd-tol", f.svd_tol, "relative Frobenius tolerance of the per-subspace SVD")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--ordering", f.ordering, "subspace visit order")->check(CLI::IsMember({"natural", "random"}));
  app->add_option("--seed", f.seed, "seed for random ordering and synthetic data");
  app->add_option("--lambda", f.lambda, "ECM failure threshold before the pool is enlarged")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--low-norm-floor", f.low_norm_floor, "rows with smaller norm never enter the ECM pool")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--zero-floor", f.zero_floor, "LP weights at or below this count as zero")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--pivot", f.pivot, "simplex pricing rule")->check(CLI::IsMember({"bland", "dantzig"}));
  app->add_option("--augment", f.augment, "constant-function augmentation (auto: always for manifold)")
      ->check(CLI::IsMember({"auto", "always", "ill-posed", "never"}));
}

StrategyOptions make_options(const CommonFlags& f, AugmentPolicy auto_policy) {
  StrategyOptions o;
  o.saw.svd_tolerance = f.svd_tol;
  if (f.ordering == "random") o.saw.ordering = SeededRandomOrder{f.seed};
  o.saw.ecm.failure_threshold = f.lambda;
  o.saw.ecm.low_norm_floor = f.low_norm_floor;
  o.zero_floor = f.zero_floor;
  o.pivot = f.pivot == "dantzig" ? PivotRule::Dantzig : PivotRule::Bland;
  if (f.augment == "always") o.saw.augment = AugmentPolicy::Always;
  else if (f.augment == "ill-posed") o.saw.augment = AugmentPolicy::WhenIllPosed;
  else if (f.augment == "never") o.saw.augment = AugmentPolicy::Never;
  else o.saw.augment = auto_policy;
  return o;
}

const char* augment_name(AugmentPolicy p) {
  switch (p) {
    case AugmentPolicy::Always: return "always";
    case AugmentPolicy::WhenIllPosed: return "ill-posed";
    case AugmentPolicy::Never: return "never";
  }
  return "?";
}

// Everything that determines the rule; no timings, so reruns are byte-identical.
json metadata(Strategy s, const CommonFlags& f, const StrategyOptions& o) {
  json m;
  m["strategy"] = to_string(s);
  m["ordering"] = f.ordering;
  m["seed"] = f.seed;
  m["svd_tol"] = f.svd_tol;
  m["lambda"] = f.lambda;
  m["low_norm_floor"] = f.low_norm_floor;
  m["augment"] = augment_name(o.saw.augment);
  if (s == Strategy::Lp) {
    m["pivot"] = f.pivot;
    m["zero_floor"] = f.zero_floor;
  }
  return m;
}

std::vector<Strategy> parse_strategies(const std::string& list) {
  if (list == "all") return all_strategies();
  std::vector<Strategy> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(parse_strategy(item));
  if (out.empty()) throw std::invalid_argument("no strategy given");
  return out;
}

struct Demo {
  SubspaceFamily<double> family;
  std::optional<double> reconstruction;
  AugmentPolicy auto_policy = AugmentPolicy::WhenIllPosed;
};

Demo build_demo(const std::string& name, const CommonFlags& f, const ManifoldConfig& base, Index clusters) {
  Demo d;
  if (name == "poly-scalar") {
    d.family = poly_scalar_family();
  } else if (name == "poly-vector") {
    d.family = poly_vector_family();
  } else {
    ManifoldConfig c = base;
    c.seed = f.seed;
    auto fam = manifold_family(c, clusters);
    d.family = std::move(fam.family);
    d.reconstruction = fam.snapshot_reconstruction_error;
    d.auto_policy = AugmentPolicy::Always;
  }
  return d;
}

json report_json(const ErrorReport& r, double tol, bool pass) {
  json j;
  json per = json::array();
  for (Index i = 0; i < r.per_subspace_relative_residual.size(); ++i) per.push_back(r.per_subspace_relative_residual(i));
  j["per_subspace_relative_residual"] = per;
  j["max_residual"] = r.max_residual;
  if (r.snapshot_reconstruction_error) j["snapshot_reconstruction_error"] = *r.snapshot_reconstruction_error;
  j["tolerance"] = tol;
  j["pass"] = pass;
  return j;
}

int cmd_demo(const std::string& name, const std::string& strategies, const CommonFlags& f, const ManifoldConfig& mc,
             Index clusters, const std::filesystem::path& out_dir) {
  // the dense LP does not fit in memory for the default manifold
  const auto list = parse_strategies(strategies.empty() ? (name == "manifold" ? "global-ecm,independent-ecm,saw-ecm" : "all")
                                                        : strategies);
  const Demo demo = build_demo(name, f, mc, clusters);
  const StrategyOptions opts = make_options(f, demo.auto_policy);
  const auto bases = prepare_bases(demo.family, opts.saw);
  std::filesystem::create_directories(out_dir);

  std::vector<SummaryRow> rows;
  int status = kOk;
  std::printf("%-16s %8s %14s %12s\n", "strategy", "card(E)", "max residual", "time [s]");
  for (Strategy s : list) {
    try {
      auto res = run_strategy(s, demo.family, bases, opts);
      const std::string stem = name + "_" + to_string(s);
      RuleFile rf;
      rf.points = demo.family.points();
      rf.rule = res.rule;
      rf.metadata = metadata(s, f, opts);
      rf.metadata["demo"] = name;
      write_text(out_dir / (stem + ".rule.json"), emit_rule(rf));
      write_text(out_dir / (stem + ".sparsity.csv"), emit_sparsity_csv(res.rule, demo.family.points(), to_string(s)));
      rows.push_back({to_string(s), res.rule.size(), res.report.max_residual, res.wall_time_s});
      std::printf("%-16s %8ld %14.3e %12.4f\n", to_string(s), static_cast<long>(res.rule.size()),
                  res.report.max_residual, res.wall_time_s);
    } catch (const NoConvergence& e) {
      std::fprintf(stderr, "%s: %s\n", to_string(s), e.what());
      status = kConvergenceError;
    } catch (const IllPosed& e) {
      std::fprintf(stderr, "%s: %s\n", to_string(s), e.what());
      status = kConvergenceError;
    } catch (const Error& e) {
      std::fprintf(stderr, "%s: %s\n", to_string(s), e.what());
      if (status == kOk) status = kInputError;
    }
  }
  if (demo.reconstruction) std::printf("snapshot reconstruction error %.3e\n", *demo.reconstruction);
  write_text(out_dir / (name + "_summary.csv"), emit_summary_csv(rows));
  return status;
}

int cmd_family(const std::string& name, const CommonFlags& f, const ManifoldConfig& mc, Index clusters,
               const std::filesystem::path& out) {
  write_text(out, emit_family_csv(build_demo(name, f, mc, clusters).family));
  return kOk;
}

int cmd_run(const std::filesystem::path& family_file, const std::string& strategy, const CommonFlags& f,
            const std::string& out) {
  const Strategy s = parse_strategy(strategy);
  const auto family = parse_family_csv(read_text(family_file));
  const StrategyOptions opts = make_options(f, AugmentPolicy::WhenIllPosed);
  const auto bases = prepare_bases(family, opts.saw);
  const auto res = run_strategy(s, family, bases, opts);
  RuleFile rf;
  rf.points = family.points();
  rf.rule = res.rule;
  rf.metadata = metadata(s, f, opts);
  const std::string text = emit_rule(rf);
  if (out.empty() || out == "-") std::cout << text;
  else write_text(out, text);
  std::fprintf(stderr, "%s: card(E) = %ld, max residual %.3e\n", to_string(s), static_cast<long>(res.rule.size()),
               res.report.max_residual);
  return kOk;
}

int cmd_verify(const std::filesystem::path& rule_file, const std::filesystem::path& family_file, double tol) {
  const auto rf = parse_rule(read_text(rule_file));
  const auto family = parse_family_csv(read_text(family_file));
  if (rf.points != family.points())
    throw ShapeMismatch("rule file has M = " + std::to_string(rf.points) + ", family has " +
                        std::to_string(family.points()));
  const auto report = evaluate_rule(rf.rule, family);
  const bool pass = report.max_residual <= tol;
  std::cout << report_json(report, tol, pass).dump(2) << "\n";
  return pass ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace-adaptive weights cubature: SAW-ECM, independent and global ECM, l1 LP"};
  app.require_subcommand(1);

  CommonFlags flags;
  ManifoldConfig mc;
  Index clusters = 0;
  std::string strategies, out_dir = ".";
  std::string demo_name;

  auto* demo = app.add_subcommand("demo", "run a built-in family through the strategies and write artifacts");
  demo->add_option("name", demo_name, "poly-scalar, poly-vector or manifold")
      ->required()
      ->check(CLI::IsMember({"poly-scalar", "poly-vector", "manifold"}));
  demo->add_option("--strategies,--strategy", strategies,
                   "comma-separated list or 'all' (default: all; manifold: the three ECM strategies)");
  demo->add_option("--out-dir", out_dir, "directory for rule files, sparsity dumps and the summary");
  demo->add_option("--clusters", clusters, "manifold clusters (0: window 3 / overlap 1, k = P - 2)")
      ->check(CLI::NonNegativeNumber);
  demo->add_option("--points", mc.points, "manifold grid points")->check(CLI::PositiveNumber);
  demo->add_option("--steps", mc.steps, "manifold snapshots")->check(CLI::Range(3, 1000000));
  demo->add_option("--displacement-tol", mc.displacement_svd_tol, "manifold per-window SVD tolerance")
      ->check(CLI::Range(0.0, 1.0));
  add_common(demo, flags);

  std::string family_name, family_out;
  auto* family = app.add_subcommand("family", "write a built-in family as family CSV");
  family->add_option("name", family_name)->required()->check(CLI::IsMember({"poly-scalar", "poly-vector", "manifold"}));
  family->add_option("--out", family_out, "output CSV")->required();
  family->add_option("--clusters", clusters)->check(CLI::NonNegativeNumber);
  family->add_option("--points", mc.points)->check(CLI::PositiveNumber);
  family->add_option("--steps", mc.steps)->check(CLI::Range(3, 1000000));
  family->add_option("--seed", flags.seed);

  std::string family_file, strategy = "saw-ecm", rule_out;
  auto* run = app.add_subcommand("run", "compute a rule for a family CSV");
  run->add_option("family", family_file, "family CSV")->required();
  run->add_option("--strategy", strategy, "global-ecm, independent-ecm, saw-ecm or lp");
  run->add_option("--out", rule_out, "rule file (default: stdout)");
  add_common(run, flags);

  std::string rule_file;
  double tol = 1e-8;
  auto* verify = app.add_subcommand("verify", "check a rule file against a family CSV");
  verify->add_option("rule", rule_file, "rule JSON")->required();
  verify->add_option("family", family_file, "family CSV")->required();
  verify->add_option("--tol", tol, "largest accepted relative residual")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*demo) return cmd_demo(demo_name, strategies, flags, mc, clusters, out_dir);
    if (*family) return cmd_family(family_name, flags, mc, clusters, family_out);
    if (*run) return cmd_run(family_file, strategy, flags, rule_out);
    if (*verify) return cmd_verify(rule_file, family_file, tol);
  } catch (const NoConvergence& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConvergenceError;
  } catch (const IllPosed& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConvergenceError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  }
  return kInputError;
}
