#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sbst/bench.hpp"
#include "sbst/errors.hpp"

using namespace sbst;

namespace {

double pairwise_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0;
  for (double x : a) {
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  }
  return u;
}

// Two-sided exact p by enumerating every split of the pooled sample.
double brute_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = a.size(), total = pooled.size();
  auto u_of = [&](unsigned mask) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < total; ++i) ((mask >> i) & 1 ? x : y).push_back(pooled[i]);
    return pairwise_u(x, y);
  };
  const double mean = static_cast<double>(n * b.size()) / 2;
  const double dev = std::fabs(pairwise_u(a, b) - mean);
  double hit = 0, all = 0;
  for (unsigned mask = 0; mask < (1u << total); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n) continue;
    all += 1;
    if (std::fabs(u_of(mask) - mean) >= dev - 1e-9) hit += 1;
  }
  return hit / all;
}

double brute_normal_p(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size()), N = n + m;
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::map<double, int> counts;
  for (double v : pooled) ++counts[v];
  double ties = 0;
  for (const auto& [v, t] : counts) ties += static_cast<double>(t) * t * t - t;
  const double sigma = std::sqrt(n * m / 12 * ((N + 1) - ties / (N * (N - 1))));
  if (sigma == 0) return 1.0;
  const double u = pairwise_u(a, b);
  const double z = (std::fabs(u - n * m / 2) - 0.5) / sigma;
  return std::min(1.0, 2 * 0.5 * std::erfc(z / std::sqrt(2.0)));
}

std::vector<double> sample(std::mt19937_64& rng, std::size_t n, int levels) {
  std::vector<double> v(n);
  for (auto& x : v) x = std::uniform_int_distribution<int>(0, levels)(rng) / static_cast<double>(levels);
  return v;
}

}  // namespace

TEST(MannWhitney, Fixtures) {
  // Reference values from an independent statistics package.
  const auto r = mann_whitney_u({1.5, 2.25, 3.0, 7.0, 8.5, 0.25}, {4.0, 5.0, 6.0, 9.0, 10.5, 11.0, 12.0});
  EXPECT_EQ(r.u, 6.0);
  EXPECT_NEAR(r.p, 0.03496503496503496, 1e-9);
  const std::vector<double> x = {0.3,  0.8, 0.3,  -1.3, 0.9,  0.4, -0.5, 0.6, 0.4, 0.3,  0.0, 0.5, -0.7,
                                 -0.2, -0.5, 0.6, 0.0,  -0.3, -0.8, -0.3, 0.0, -0.3, 1.3, 1.0, -2.7};
  const std::vector<double> y = {-1.4, 0.3,  0.1,  0.7, 0.7, 2.6,  -0.6, 0.1, 2.5, 1.1, 1.2, -0.0, -1.1, 0.7, 0.6,
                                 -0.7, -0.2, 0.4,  -0.4, 0.4, 0.6, 0.5,  -0.0, 1.1, 1.4, 0.8, -0.3, 1.2,  -0.0, 1.4};
  const auto big = mann_whitney_u(x, y);
  EXPECT_EQ(big.u, 268.5);
  EXPECT_NEAR(big.p, 0.0727209895182198, 1e-9);
}

TEST(MannWhitney, Trivial) {
  std::vector<double> c(10, 0.5);
  EXPECT_EQ(mann_whitney_u(c, c).p, 1.0);
  std::vector<double> c30(30, 0.5);
  EXPECT_EQ(mann_whitney_u(c30, c30).p, 1.0);
  std::vector<double> hi, lo;
  for (int i = 0; i < 30; ++i) {
    hi.push_back(100 + i);
    lo.push_back(i);
  }
  EXPECT_LT(mann_whitney_u(hi, lo).p, 0.001);
  EXPECT_THROW(mann_whitney_u({}, {1.0}), EmptySample);
}

TEST(MannWhitney, MatchesBruteForce) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(1, 7)(rng);
    const auto m = std::uniform_int_distribution<std::size_t>(1, 7)(rng);
    auto a = sample(rng, n, 4), b = sample(rng, m, 4);
    const auto r = mann_whitney_u(a, b);
    EXPECT_NEAR(r.u, pairwise_u(a, b), 1e-9);
    EXPECT_NEAR(r.p, brute_exact_p(a, b), 1e-6);
  }
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(21, 40)(rng);
    const auto m = std::uniform_int_distribution<std::size_t>(21, 40)(rng);
    auto a = sample(rng, n, 10), b = sample(rng, m, 10);
    const auto r = mann_whitney_u(a, b);
    EXPECT_NEAR(r.u, pairwise_u(a, b), 1e-9);
    EXPECT_NEAR(r.p, brute_normal_p(a, b), 1e-6);
  }
}

TEST(VarghaDelaney, Values) {
  EXPECT_EQ(vargha_delaney({1, 2}, {1, 3}), 0.375);
  EXPECT_EQ(vargha_delaney({1, 2, 3}, {1, 2, 3}), 0.5);
  EXPECT_EQ(vargha_delaney({5, 6}, {1, 2}), 1.0);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto a = sample(rng, 1 + rng() % 20, 5), b = sample(rng, 1 + rng() % 20, 5);
    const double ab = vargha_delaney(a, b);
    EXPECT_EQ(ab, pairwise_u(a, b) / static_cast<double>(a.size() * b.size()));
    EXPECT_EQ(ab + vargha_delaney(b, a), 1.0);
    EXPECT_EQ(vargha_delaney(a, a), 0.5);
  }
}

TEST(Pearson, Values) {
  const auto p = pearson({1, 2, 3, 4, 5, 6, 7}, {2, 1, 4, 3, 7, 5, 6});
  EXPECT_NEAR(p.r, 0.8214285714285714, 1e-12);
  EXPECT_NEAR(p.p, 0.023448808345691522, 1e-9);
  EXPECT_EQ(pearson({1, 2, 3}, {1, 2, 3}).r, 1.0);
  EXPECT_EQ(pearson({1, 2, 3}, {-1, -2, -3}).r, -1.0);
  EXPECT_THROW(pearson({1, 1, 1}, {1, 2, 3}), DegenerateInput);
  EXPECT_THROW(pearson({1, 2}, {1, 2}), InvalidConfig);
}

TEST(Classify, Rules) {
  EXPECT_EQ(classify(0.7, 0.01), Outcome::AOutperforms);
  EXPECT_EQ(classify(0.3, 0.01), Outcome::BOutperforms);
  EXPECT_EQ(classify(0.7, 0.2), Outcome::NoSignificant);
  EXPECT_EQ(classify(0.5, 0.0), Outcome::NoSignificant);
}

TEST(Config, ParseAndErrors) {
  auto j = nlohmann::json::parse(R"({"subjects":["a.mini"],"strategies":["smart","original"],"repeats":2,
                                     "algorithms":["ws"],"budgets":[1000]})");
  auto c = ExperimentConfig::from_json(j, "/base");
  EXPECT_EQ(c.subjects[0], std::filesystem::path("/base/a.mini"));
  EXPECT_EQ(c.repeats, 2);
  EXPECT_EQ(c.strategies[1].name(), "original");
  j["repeats"] = 0;
  EXPECT_THROW(ExperimentConfig::from_json(j), InvalidConfig);
  j["repeats"] = 1;
  j["strategies"] = {"bogus"};
  EXPECT_THROW(ExperimentConfig::from_json(j), InvalidConfig);
  j["strategies"] = {"smart"};
  j["colour"] = 1;
  EXPECT_THROW(ExperimentConfig::from_json(j), InvalidConfig);
}

TEST(Config, CellSeeds) {
  const auto a = cell_seed(1, "s", Algorithm::WS, "smart", 20000, 0);
  EXPECT_EQ(a, cell_seed(1, "s", Algorithm::WS, "smart", 20000, 0));
  EXPECT_NE(a, cell_seed(1, "s", Algorithm::WS, "smart", 20000, 1));
  EXPECT_NE(a, cell_seed(2, "s", Algorithm::WS, "smart", 20000, 0));
  EXPECT_NE(a, cell_seed(1, "s", Algorithm::MOSA, "smart", 20000, 0));
}

class Experiment : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / ("sbst_bench_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
    std::ofstream(dir_ / "tri.mini") << "fn f(a:int, b:int) -> int {\n  if (a > b) {\n    return a - b;\n  }\n"
                                        "  if (a == 3) {\n    throw three;\n  }\n  return 0;\n}\n";
    std::ofstream(dir_ / "bad.mini") << "fn broken( {\n";
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  ExperimentConfig config(int jobs) {
    auto j = nlohmann::json::parse(R"({"subjects":["tri.mini","bad.mini"],
        "strategies":["smart","original","single:BC","single:EC"],"repeats":3,
        "algorithms":["WS","MOSA"],"budgets":[300],"population":10})");
    j["jobs"] = jobs;
    return ExperimentConfig::from_json(j, dir_);
  }

  std::string read(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::filesystem::path dir_;
};

TEST_F(Experiment, RunsReportsAndDeterminism) {
  const auto cfg = config(1);
  const auto rep = run_experiment(cfg);
  // 1 good subject x 2 algorithms x 4 strategies x 3 repeats, minus MOSA single:EC (no objectives).
  EXPECT_EQ(rep.runs.size(), 21u);
  // One load error for bad.mini, then one per skipped MOSA single:EC repeat.
  ASSERT_EQ(rep.diagnostics.size(), 4u);
  EXPECT_NE(rep.diagnostics[0].find("bad.mini"), std::string::npos);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_NE(rep.diagnostics[i].find("single:EC"), std::string::npos);
  for (Criterion c : kAllCriteria) {
    const Tally t = rep.tally(Algorithm::WS, 300, "smart", "original", c);
    EXPECT_EQ(t.a + t.b + t.none, 1);
  }
  write_reports(rep, cfg, dir_ / "out1");
  write_reports(run_experiment(config(2)), cfg, dir_ / "out2");
  const auto s1 = read(dir_ / "out1" / "summary.csv");
  EXPECT_EQ(s1, read(dir_ / "out2" / "summary.csv"));
  EXPECT_EQ(s1.substr(0, s1.find('\n')), "subject,algorithm,strategy,budget,criterion,seed,coverage");
  EXPECT_EQ(std::count(s1.begin(), s1.end(), '\n'), 1 + 21 * 8);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out1" / "significant_cases.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out1" / "correlation_matrix.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out1" / "runs" / "tri__WS__smart__300__0.json"));
}

TEST(Correlation, EcNormalizedAndGrouped) {
  std::vector<RunRecord> runs;
  for (int i = 0; i < 4; ++i) {
    RunRecord r;
    r.subject = "s";
    r.algorithm = Algorithm::WS;
    r.strategy = "single:BC";
    r.result.coverage.bc = 0.25 * i;
    r.result.coverage.lc = 0.2 * i + 0.1;
    r.result.coverage.ec = i;
    runs.push_back(r);
  }
  const auto m = correlation_matrix(runs);
  ASSERT_EQ(m.size(), 7u);
  for (const auto& e : m) {
    EXPECT_EQ(e.guide, Criterion::BC);
    if (e.measured == Criterion::LC) {
      EXPECT_TRUE(e.same_group);
      ASSERT_TRUE(e.pcc);
      EXPECT_NEAR(e.pcc->r, 1.0, 1e-12);
    }
    if (e.measured == Criterion::EC) {
      EXPECT_FALSE(e.same_group);
      ASSERT_TRUE(e.pcc);
    }
    if (e.measured == Criterion::DBC) EXPECT_FALSE(e.pcc);  // constant zero
  }
}
