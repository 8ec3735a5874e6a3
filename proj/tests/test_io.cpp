#include <sawcub/io.hpp>
#include <sawcub/strategies.hpp>

#include <gtest/gtest.h>

#include <filesystem>

using namespace sawcub;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "sawcub_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

StrategyResult run(Strategy s, const SubspaceFamily<double>& f, PivotRule pivot = PivotRule::Bland) {
  StrategyOptions o;
  o.pivot = pivot;
  return run_strategy(s, f, prepare_bases(f, o.saw), o);
}

}  // namespace

TEST(RuleFile, RoundTripIsByteIdentical) {
  const auto f = poly_vector_family();
  for (Strategy s : all_strategies()) {
    RuleFile rf;
    rf.points = f.points();
    rf.rule = run(s, f).rule;
    rf.metadata["strategy"] = to_string(s);
    rf.metadata["seed"] = 17;
    rf.metadata["svd_tol"] = 1e-12;
    const std::string text = emit_rule(rf);
    const RuleFile back = parse_rule(text);
    EXPECT_EQ(emit_rule(back), text) << to_string(s);
    EXPECT_EQ(back.rule.indices, rf.rule.indices);
    ASSERT_EQ(back.rule.subspaces(), rf.rule.subspaces());
    for (Index i = 0; i < rf.rule.subspaces(); ++i)
      EXPECT_EQ(back.rule.per_subspace_weights[i], rf.rule.per_subspace_weights[i]);
    EXPECT_EQ(back.rule.visit_order, rf.rule.visit_order);
  }
}

TEST(RuleFile, IndicesAreOneBased) {
  RuleFile rf;
  rf.points = 5;
  rf.rule.indices = {0, 4};
  rf.rule.per_subspace_weights = {VectorXd::Ones(2)};
  const auto j = nlohmann::json::parse(emit_rule(rf));
  EXPECT_EQ(j["indices"], nlohmann::json({1, 5}));
  EXPECT_EQ(j["schema_version"], 1);
}

TEST(RuleFile, RejectsInvalidFiles) {
  EXPECT_THROW(parse_rule("not json"), ParseError);
  EXPECT_THROW(parse_rule("[1,2]"), ParseError);
  const std::string base = R"({"schema_version":1,"M":4,"k":1,"indices":%I,"weights":%W})";
  auto make = [&](const std::string& idx, const std::string& w) {
    std::string s = base;
    s.replace(s.find("%I"), 2, idx);
    s.replace(s.find("%W"), 2, w);
    return s;
  };
  EXPECT_NO_THROW(parse_rule(make("[1,3]", "[[0.5,0.5]]")));
  EXPECT_THROW(parse_rule(make("[1,5]", "[[0.5,0.5]]")), ParseError);   // index > M
  EXPECT_THROW(parse_rule(make("[0,3]", "[[0.5,0.5]]")), ParseError);   // 1-based
  EXPECT_THROW(parse_rule(make("[3,1]", "[[0.5,0.5]]")), ParseError);   // order
  EXPECT_THROW(parse_rule(make("[1,1]", "[[0.5,0.5]]")), ParseError);   // duplicate
  EXPECT_THROW(parse_rule(make("[1,3]", "[[0.5]]")), ParseError);       // length
  EXPECT_THROW(parse_rule(make("[1,3]", "[[0.5,0.5],[1,1]]")), ParseError);  // k
  EXPECT_THROW(parse_rule(R"({"schema_version":2,"M":1,"k":1,"indices":[1],"weights":[[1]]})"), ParseError);
  EXPECT_THROW(parse_rule(R"({"schema_version":1,"k":1,"indices":[1],"weights":[[1]]})"), ParseError);
}

TEST(FamilyCsv, RoundTrip) {
  const auto f = poly_vector_family();
  const auto text = emit_family_csv(f);
  const auto back = parse_family_csv(text);
  ASSERT_EQ(back.subspaces(), f.subspaces());
  EXPECT_EQ(back.full_weights, f.full_weights);
  for (Index i = 0; i < f.subspaces(); ++i) EXPECT_EQ(back.sample_matrices[i], f.sample_matrices[i]);
  EXPECT_EQ(emit_family_csv(back), text);
}

TEST(FamilyCsv, RejectsMalformedInput) {
  EXPECT_THROW(parse_family_csv(""), ParseError);
  EXPECT_THROW(parse_family_csv("2\n"), ParseError);
  EXPECT_THROW(parse_family_csv("2,1\n1,1\n1\n1\n"), ParseError);           // missing row
  EXPECT_THROW(parse_family_csv("2,1\n1,1\n1\n1\nx\n"), ParseError);        // not a number
  EXPECT_THROW(parse_family_csv("2,1\n1,-1\n1\n1\n2\n"), ParseError);       // nonpositive weight
  EXPECT_THROW(parse_family_csv("2,1\n1,1\n1\n1\n2\n3\n"), ParseError);     // trailing data
  EXPECT_THROW(parse_family_csv("2,1\n1,1\n2\n1\n2\n"), ParseError);        // wrong width
  const auto ok = parse_family_csv("2,1\n0.5,0.5\n1\n1\n2\n");
  EXPECT_EQ(ok.points(), 2);
}

TEST(SparsityDump, RowSupportMatchesPositiveWeights) {
  const auto f = poly_vector_family();
  for (Strategy s : all_strategies()) {
    const auto rule = run(s, f).rule;
    const auto text = emit_sparsity_csv(rule, f.points(), to_string(s));
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, std::string("strategy,") + to_string(s));
    for (Index i = 0; i < rule.subspaces(); ++i) {
      ASSERT_TRUE(std::getline(in, line));
      const auto ones = std::count(line.begin(), line.end(), '1');
      EXPECT_EQ(ones, (rule.per_subspace_weights[i].array() > 0).count());
      EXPECT_EQ(std::count(line.begin(), line.end(), ','), f.points() - 1);
    }
    EXPECT_FALSE(std::getline(in, line));
  }
}

TEST(SummaryCsv, Header) {
  const auto text = emit_summary_csv({{"saw-ecm", 1, 1e-16, 0.5}});
  EXPECT_EQ(text.substr(0, text.find('\n')), "strategy,card_E,max_residual,wall_time_s");
  EXPECT_NE(text.find("saw-ecm,1,"), std::string::npos);
}

TEST(Snapshots, CsvAndBinaryRoundTrip) {
  const auto s = synthetic_manifold(16, 5);
  for (const char* name : {"snaps.csv", "snaps.bin"}) {
    const auto path = scratch(name);
    save_snapshots(path, s.snapshots);
    EXPECT_EQ(load_snapshots(path), s.snapshots) << name;
  }
  write_text(scratch("short.bin"), std::string("abc"));
  EXPECT_THROW(load_snapshots(scratch("short.bin")), ParseError);
  write_text(scratch("bad.csv"), "2,2\n1,2\n3\n");
  EXPECT_THROW(load_snapshots(scratch("bad.csv")), ParseError);
}

TEST(Strategies, NamesRoundTrip) {
  for (Strategy s : all_strategies()) EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_THROW(parse_strategy("nope"), std::invalid_argument);
}

TEST(Strategies, ScalarMonomialCounts) {
  const auto f = poly_scalar_family();
  EXPECT_EQ(run(Strategy::SawEcm, f).rule.size(), 1);
  EXPECT_EQ(run(Strategy::GlobalEcm, f).rule.size(), 6);
  EXPECT_EQ(run(Strategy::IndependentEcm, f).rule.size(), 4);
  const auto lp = run(Strategy::Lp, f);
  EXPECT_GE(lp.rule.size(), 1);
  EXPECT_LE(lp.rule.size(), 6);
  for (Strategy s : all_strategies()) EXPECT_LE(run(s, f).report.max_residual, 1e-9) << to_string(s);
}

TEST(Strategies, ManifoldSingleClusterIsGlobalPath) {
  ManifoldConfig c;
  c.points = 40;
  c.steps = 30;
  const auto fam = manifold_family(c, 1);
  ASSERT_EQ(fam.family.subspaces(), 1);
  StrategyOptions o;
  o.saw.augment = AugmentPolicy::Always;
  const auto b = prepare_bases(fam.family, o.saw);
  const auto saw = run_strategy(Strategy::SawEcm, fam.family, b, o);
  const auto global = run_strategy(Strategy::GlobalEcm, fam.family, b, o);
  EXPECT_EQ(saw.rule.indices, global.rule.indices);
  EXPECT_LE(saw.report.max_residual, 1e-8);
}
