#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "sbst/errors.hpp"
#include "sbst/selection.hpp"

using namespace sbst;

namespace {

std::string block_of(int lines) {
  std::string s = "fn f(a:int)->int {\n";
  for (int i = 0; i < lines - 1; ++i) s += "  a = a + 1;\n";
  s += "  return a;\n}\n";
  return s;
}

// Oracle: representative infected => every member infected, on the table's own grid.
void check_table(const SubsumptionTable& t) {
  for (const auto& c : t.classes) {
    const auto& rep = t.infections.at(c.representative);
    ASSERT_FALSE(rep.empty());
    for (const auto& m : c.members) {
      const auto& mem = t.infections.at(m);
      EXPECT_TRUE(std::includes(mem.begin(), mem.end(), rep.begin(), rep.end())) << t.context << " " << m;
    }
  }
  std::size_t listed = t.unkillable.size();
  for (const auto& c : t.classes) listed += c.members.size();
  EXPECT_EQ(listed, t.infections.size());
}

}  // namespace

TEST(Groups, StaticData) {
  auto g = group_criteria();
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0], (std::vector<Criterion>{Criterion::BC, Criterion::DBC, Criterion::LC, Criterion::WM}));
  EXPECT_EQ(g[1], (std::vector<Criterion>{Criterion::TMC, Criterion::NTMC}));
  EXPECT_EQ(g[2], (std::vector<Criterion>{Criterion::EC}));
  EXPECT_EQ(select_representatives(),
            (std::set<Criterion>{Criterion::DBC, Criterion::NTMC, Criterion::EC, Criterion::OC}));
}

TEST(Lines, Threshold) {
  auto seven = Subject::from_source(block_of(7));
  EXPECT_TRUE(select_line_goals(seven, 8).empty());
  auto eight = Subject::from_source(block_of(8));
  EXPECT_EQ(select_line_goals(eight, 8).ids(), (std::set<std::string>{"lc:L9"}));
  auto s = Subject::from_source("fn f(a:int)->int {\n  if (a > 0) {\n    a = 1;\n  }\n  return a;\n}\n");
  EXPECT_EQ(select_line_goals(s, 1).size(), 3u);
  EXPECT_THROW(select_line_goals(s, 0), InvalidConfig);
}

TEST(Subsumption, RorLessThanHasThreeRepresentatives) {
  auto t = derive_subsumption_table(MutationOperator::ROR, "lt:int");
  EXPECT_EQ(t.representatives(), (std::set<std::string>{"le", "ne", "false"}));
  EXPECT_TRUE(t.unkillable.empty());
  check_table(t);
}

TEST(Subsumption, AllContextsSatisfyOracle) {
  for (auto op : {"lt", "le", "gt", "ge", "eq", "ne"}) {
    check_table(derive_subsumption_table(MutationOperator::ROR, std::string(op) + ":int"));
  }
  for (auto op : {"eq", "ne"}) check_table(derive_subsumption_table(MutationOperator::ROR, std::string(op) + ":bool"));
  for (auto op : {"add", "sub", "mul", "div", "mod"}) {
    check_table(derive_subsumption_table(MutationOperator::AOR, std::string(op) + ":int"));
  }
  for (auto op : {"and", "or", "xor"}) check_table(derive_subsumption_table(MutationOperator::BOR, std::string(op) + ":int"));
}

TEST(Subsumption, NeverInfectedIsExcluded) {
  OracleDomain zero{{0}};
  auto t = derive_subsumption_table(MutationOperator::AOR, "add:int", zero);
  EXPECT_NE(std::find(t.unkillable.begin(), t.unkillable.end(), "sub"), t.unkillable.end());
  EXPECT_FALSE(t.representatives().count("sub"));
  check_table(t);
}

TEST(Subsumption, BoolEqualityFamily) {
  auto t = derive_subsumption_table(MutationOperator::ROR, "eq:bool");
  EXPECT_EQ(t.infections.size(), 3u);
  // ne is infected everywhere; true/false each on half the grid.
  EXPECT_EQ(t.representatives(), (std::set<std::string>{"true", "false"}));
  check_table(t);
}

TEST(Subsumption, Errors) {
  EXPECT_THROW(derive_subsumption_table(MutationOperator::ROR, "lt:int", OracleDomain{{}}), EmptyDomain);
  EXPECT_THROW(derive_subsumption_table(MutationOperator::AOR, "lt:int"), InvalidConfig);
  EXPECT_THROW(derive_subsumption_table(MutationOperator::ROR, "bogus"), InvalidConfig);
}

TEST(Subsumption, DiskCacheRoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "sbst_cache_test";
  std::filesystem::remove_all(dir);
  {
    SubsumptionCache cache(dir);
    cache.get(MutationOperator::ROR, "lt:int");
  }
  auto path = dir / "ROR_lt_int.json";
  ASSERT_TRUE(std::filesystem::exists(path));
  std::ifstream in(path);
  auto j = nlohmann::json::parse(in);
  EXPECT_EQ(SubsumptionTable::from_json(j).representatives(), (std::set<std::string>{"le", "ne", "false"}));
  SubsumptionCache again(dir);
  EXPECT_EQ(again.get(MutationOperator::ROR, "lt:int").to_json(), j);
  std::filesystem::remove_all(dir);
}

TEST(MutantGoals, KeyOperatorsAndRepresentatives) {
  SubsumptionCache cache;
  auto uoi_only = Subject::from_source("fn f(x:int)->int { return x; }");
  EXPECT_TRUE(select_mutant_goals(uoi_only, cache).empty());
  auto lt = Subject::from_source("fn f(a:int, b:int)->bool { return a < b; }");
  auto g = select_mutant_goals(lt, cache);
  EXPECT_EQ(g.size(), 3u);
  auto rc = Subject::from_source("fn f(x:int)->int { return 5; }");
  EXPECT_TRUE(select_mutant_goals(rc, cache).empty());
}

TEST(Strategy, Parse) {
  EXPECT_EQ(StrategyConfig::parse("smart").kind, StrategyKind::Smart);
  EXPECT_EQ(StrategyConfig::parse("original").kind, StrategyKind::Original);
  EXPECT_EQ(StrategyConfig::parse("smart-nosub").kind, StrategyKind::SmartNoSubsumption);
  auto single = StrategyConfig::parse("single:lc");
  EXPECT_EQ(single.criteria, (std::vector<Criterion>{Criterion::LC}));
  EXPECT_EQ(single.name(), "single:LC");
  auto custom = StrategyConfig::parse("custom:LC,TMC,EC,OC");
  EXPECT_EQ(custom.criteria.size(), 4u);
  EXPECT_EQ(custom.name(), "custom:LC,TMC,EC,OC");
  EXPECT_THROW(StrategyConfig::parse("custom:"), InvalidConfig);
  EXPECT_THROW(StrategyConfig::parse("single:XX"), InvalidConfig);
  EXPECT_THROW(StrategyConfig::parse("fancy"), InvalidConfig);
  EXPECT_THROW(StrategyConfig::parse("smart", 0), InvalidConfig);
  EXPECT_EQ(parse_algorithm("DynaMOSA"), Algorithm::DynaMOSA);
  EXPECT_THROW(parse_algorithm("nsga"), InvalidConfig);
}

TEST(BuildGoalset, SubsetAndForcedBranches) {
  auto s = Subject::from_source(
      "fn f(a:int, b:int)->int {\n"
      "  let r = 0;\n"
      "  if (a < b) {\n"
      "    r = a + 2;\n"
      "  } else {\n"
      "    r = b * 3;\n"
      "  }\n"
      "  return r;\n"
      "}\n");
  SubsumptionCache cache;
  auto smart = build_goalset(s, StrategyConfig::parse("smart"), Algorithm::MOSA, cache);
  auto orig = build_goalset(s, StrategyConfig::parse("original"), Algorithm::MOSA, cache);
  EXPECT_LT(smart.size(), orig.size());
  for (const auto& id : smart.ids()) EXPECT_TRUE(orig.contains(id)) << id;
  EXPECT_EQ(smart.count(GoalKind::Line), 0u);  // every block is short
  EXPECT_EQ(smart.count(Criterion::BC), 0u);

  auto lc = build_goalset(s, StrategyConfig::parse("single:LC"), Algorithm::DynaMOSA, cache);
  EXPECT_EQ(lc.size(), extract_goals(s, Criterion::LC).size() + extract_goals(s, Criterion::BC).size());
  auto dyn = build_goalset(s, StrategyConfig::parse("smart"), Algorithm::DynaMOSA, cache);
  EXPECT_EQ(dyn.count(Criterion::BC), 2u);
  auto nosub = build_goalset(s, StrategyConfig::parse("smart-nosub"), Algorithm::WS, cache);
  EXPECT_EQ(nosub.count(GoalKind::Mutant), 0u);
  EXPECT_EQ(nosub.size(), 2u + 1u + 3u);  // DBC, NTMC, OC partitions
}
