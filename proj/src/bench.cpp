#include "sbst/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <memory>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "sbst/errors.hpp"

namespace sbst {

Band band_of(const Subject& subject) {
  const int b = subject.branch_count();
  if (b <= kSmallBandMaxBranches) return Band::Small;
  if (b >= kLargeBandMinBranches) return Band::Large;
  return Band::Medium;
}

std::string_view to_string(Band b) {
  switch (b) {
    case Band::Small: return "small";
    case Band::Medium: return "medium";
    case Band::Large: return "large";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Statistics

namespace {

// Midranks (1-based) of the pooled sample, doubled so they stay integral.
std::vector<long> doubled_midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<long> r2(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r2[order[k]] = static_cast<long>(i + 1 + j + 1);
    i = j + 1;
  }
  return r2;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : (v[h - 1] + v[h]) / 2;
}

}  // namespace

MannWhitney mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw EmptySample("Mann-Whitney U needs two non-empty samples");
  const std::size_t n = a.size(), m = b.size(), total = n + m;
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto r2 = doubled_midranks(pooled);
  long s_obs = 0;
  for (std::size_t i = 0; i < n; ++i) s_obs += r2[i];
  MannWhitney out;
  out.u = static_cast<double>(s_obs) / 2.0 - static_cast<double>(n * (n + 1)) / 2.0;
  const double mean_u = static_cast<double>(n * m) / 2.0;

  if (n * m <= 400) {
    // Count subsets of the smaller sample's size by doubled rank sum; the test is symmetric in the choice.
    const bool first = n <= m;
    const std::size_t k_max = first ? n : m;
    long s_small = 0;
    for (std::size_t i = first ? 0 : n; i < (first ? n : total); ++i) s_small += r2[i];
    const long max_sum = std::accumulate(r2.begin(), r2.end(), 0L);
    std::vector<std::vector<double>> ways(k_max + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1;
    for (std::size_t item = 0; item < total; ++item) {
      const long w = r2[item];
      for (std::size_t k = std::min(k_max, item + 1); k >= 1; --k) {
        auto& dst = ways[k];
        const auto& src = ways[k - 1];
        for (long s = max_sum; s >= w; --s) dst[static_cast<std::size_t>(s)] += src[static_cast<std::size_t>(s - w)];
      }
    }
    const long mean2 = static_cast<long>(k_max) * static_cast<long>(total + 1);  // E[doubled rank sum]
    const long dev = std::labs(s_small - mean2);
    double hit = 0, all = 0;
    for (long s = 0; s <= max_sum; ++s) {
      const double c = ways[k_max][static_cast<std::size_t>(s)];
      if (c == 0) continue;
      all += c;
      if (std::labs(s - mean2) >= dev) hit += c;
    }
    out.p = std::min(1.0, hit / all);
    return out;
  }

  // Normal approximation with tie and continuity correction.
  double ties = 0;
  {
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < total;) {
      std::size_t j = i;
      while (j + 1 < total && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      ties += t * t * t - t;
      i = j + 1;
    }
  }
  const double N = static_cast<double>(total);
  const double var = static_cast<double>(n * m) / 12.0 * ((N + 1) - ties / (N * (N - 1)));
  if (var <= 0) {
    out.p = 1.0;
    return out;
  }
  const double u_max = std::max(out.u, static_cast<double>(n * m) - out.u);
  const double z = (u_max - mean_u - 0.5) / std::sqrt(var);
  out.p = std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  return out;
}

double vargha_delaney(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw EmptySample("Vargha-Delaney A needs two non-empty samples");
  // Pairwise counting via sorted b: #{b < x} and #{b == x}.
  std::vector<double> sb(b);
  std::sort(sb.begin(), sb.end());
  double wins = 0;
  for (double x : a) {
    const auto lo = std::lower_bound(sb.begin(), sb.end(), x);
    const auto hi = std::upper_bound(lo, sb.end(), x);
    wins += static_cast<double>(lo - sb.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidConfig("pearson: vectors differ in length");
  if (x.size() < 3) throw InvalidConfig("pearson: needs at least 3 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) throw DegenerateInput("pearson: zero variance");
  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::fabs(c.r) == 1.0) {
    c.p = 0.0;
    return c;
  }
  const double dof = n - 2;
  const double t = c.r * std::sqrt(dof / (1 - c.r * c.r));
  boost::math::students_t dist(dof);
  c.p = std::min(1.0, 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
  return c;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::AOutperforms: return "a";
    case Outcome::BOutperforms: return "b";
    case Outcome::NoSignificant: return "none";
  }
  return "?";
}

Outcome classify(double a_hat, double p, double alpha) {
  if (p < alpha && a_hat > 0.5) return Outcome::AOutperforms;
  if (p < alpha && a_hat < 0.5) return Outcome::BOutperforms;
  return Outcome::NoSignificant;
}

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw InvalidConfig("experiment config must be a JSON object");
    static const std::set<std::string> known = {"subjects",   "algorithms", "strategies",     "repeats",
                                                "budgets",    "base_seed",  "jobs",           "population",
                                                "line_threshold", "comparisons", "subsumption_cache"};
    for (const auto& [k, v] : j.items()) {
      if (!known.count(k)) throw InvalidConfig("unknown config key '" + k + "'");
    }
    for (const auto& s : j.at("subjects")) {
      std::filesystem::path p = s.get<std::string>();
      c.subjects.push_back(p.is_relative() && !base_dir.empty() ? base_dir / p : p);
    }
    if (j.contains("algorithms")) {
      c.algorithms.clear();
      for (const auto& a : j["algorithms"]) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    c.line_threshold = j.value("line_threshold", 8);
    for (const auto& s : j.at("strategies")) c.strategies.push_back(StrategyConfig::parse(s.get<std::string>(), c.line_threshold));
    c.repeats = j.value("repeats", 30);
    if (j.contains("budgets")) c.budgets = j["budgets"].get<std::vector<std::int64_t>>();
    c.base_seed = j.value("base_seed", std::uint64_t{0});
    c.jobs = j.value("jobs", 1);
    c.population = j.value("population", 50);
    if (j.contains("comparisons")) {
      for (const auto& pair : j["comparisons"]) {
        if (!pair.is_array() || pair.size() != 2) throw InvalidConfig("each comparison is a [strategy, strategy] pair");
        c.comparisons.emplace_back(StrategyConfig::parse(pair[0].get<std::string>(), c.line_threshold).name(),
                                   StrategyConfig::parse(pair[1].get<std::string>(), c.line_threshold).name());
      }
    }
    if (j.contains("subsumption_cache")) {
      std::filesystem::path p = j["subsumption_cache"].get<std::string>();
      c.subsumption_cache = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig("config '" + path.string() + "': " + e.what());
  }
  return from_json(j, path.parent_path());
}

void ExperimentConfig::validate() const {
  if (subjects.empty()) throw InvalidConfig("no subjects");
  if (strategies.empty()) throw InvalidConfig("no strategies");
  if (algorithms.empty()) throw InvalidConfig("no algorithms");
  if (budgets.empty()) throw InvalidConfig("no budgets");
  if (repeats < 1) throw InvalidConfig("repeats must be >= 1");
  if (jobs < 1) throw InvalidConfig("jobs must be >= 1");
  for (auto b : budgets) {
    if (b < population) throw InvalidConfig("budget " + std::to_string(b) + " is below the population size");
  }
  std::set<std::string> names;
  for (const auto& s : strategies) {
    if (!names.insert(s.name()).second) throw InvalidConfig("duplicate strategy '" + s.name() + "'");
  }
  for (const auto& [a, b] : comparisons) {
    if (!names.count(a) || !names.count(b)) throw InvalidConfig("comparison names a strategy not in the config");
  }
}

std::uint64_t cell_seed(std::uint64_t base, const std::string& subject, Algorithm algorithm,
                        const std::string& strategy, std::int64_t budget, int repeat) {
  const std::string key = std::to_string(base) + "|" + subject + "|" + std::string(to_string(algorithm)) + "|" +
                          strategy + "|" + std::to_string(budget) + "|" + std::to_string(repeat);
  std::uint64_t h = 14695981039346656037ULL;  // FNV-1a
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  // splitmix64 finalizer
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

// ---------------------------------------------------------------------------
// Running

namespace {

struct Cell {
  std::size_t subject;
  Algorithm algorithm;
  std::size_t strategy;
  std::int64_t budget;
  int repeat;
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  std::vector<Subject> subjects;
  for (const auto& path : config.subjects) {
    try {
      subjects.push_back(Subject::from_file(path.string()));
      report.bands[subjects.back().prog().name] = band_of(subjects.back());
    } catch (const Error& e) {
      report.diagnostics.push_back("subject " + path.string() + ": " + e.what());
    }
  }

  std::vector<Cell> cells;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    for (Algorithm a : config.algorithms) {
      for (std::size_t k = 0; k < config.strategies.size(); ++k) {
        for (auto budget : config.budgets) {
          for (int r = 0; r < config.repeats; ++r) cells.push_back({s, a, k, budget, r});
        }
      }
    }
  }

  SubsumptionCache tables(config.subsumption_cache);
  std::vector<std::optional<RunRecord>> results(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      const Subject& subject = subjects[c.subject];
      const StrategyConfig& strategy = config.strategies[c.strategy];
      RunRecord rec;
      rec.subject = subject.prog().name;
      rec.algorithm = c.algorithm;
      rec.strategy = strategy.name();
      rec.budget = c.budget;
      rec.repeat = c.repeat;
      rec.seed = cell_seed(config.base_seed, rec.subject, c.algorithm, rec.strategy, c.budget, c.repeat);
      SearchBudget budget;
      budget.max_evaluations = c.budget;
      budget.seed = rec.seed;
      budget.population = config.population;
      try {
        rec.result = run_search(subject, strategy, c.algorithm, budget, tables);
        results[i] = std::move(rec);
      } catch (const Error& e) {
        errors[i] = "cell " + rec.subject + "/" + std::string(to_string(c.algorithm)) + "/" + rec.strategy + "/" +
                    std::to_string(c.budget) + "/" + std::to_string(c.repeat) + ": " + e.what();
      }
    }
  };
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.jobs), cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (results[i]) report.runs.push_back(std::move(*results[i]));
    if (!errors[i].empty()) report.diagnostics.push_back(errors[i]);
  }

  std::vector<std::pair<std::string, std::string>> pairs = config.comparisons;
  if (pairs.empty()) {
    for (std::size_t i = 0; i < config.strategies.size(); ++i) {
      for (std::size_t j = i + 1; j < config.strategies.size(); ++j) {
        pairs.emplace_back(config.strategies[i].name(), config.strategies[j].name());
      }
    }
  }
  for (const auto& subject : subjects) {
    const std::string& name = subject.prog().name;
    for (Algorithm algo : config.algorithms) {
      for (auto budget : config.budgets) {
        for (const auto& [sa, sb] : pairs) {
          for (Criterion c : kAllCriteria) {
            const auto a = report.samples(name, algo, sa, budget, c);
            const auto b = report.samples(name, algo, sb, budget, c);
            if (a.empty() || b.empty()) continue;
            ComparisonRecord rec;
            rec.subject = name;
            rec.algorithm = algo;
            rec.budget = budget;
            rec.strategy_a = sa;
            rec.strategy_b = sb;
            rec.criterion = c;
            rec.median_a = median(a);
            rec.median_b = median(b);
            rec.a_hat = vargha_delaney(a, b);
            rec.p = mann_whitney_u(a, b).p;
            rec.outcome = classify(rec.a_hat, rec.p);
            report.comparisons.push_back(rec);
          }
        }
      }
    }
  }
  report.correlations = correlation_matrix(report.runs);
  return report;
}

std::vector<double> ExperimentReport::samples(const std::string& subject, Algorithm algorithm,
                                              const std::string& strategy, std::int64_t budget, Criterion c) const {
  std::vector<double> out;
  for (const auto& r : runs) {
    if (r.subject == subject && r.algorithm == algorithm && r.strategy == strategy && r.budget == budget) {
      out.push_back(r.result.coverage.get(c));
    }
  }
  return out;
}

Tally ExperimentReport::tally(Algorithm algorithm, std::int64_t budget, const std::string& a, const std::string& b,
                              Criterion c, const std::vector<std::string>& subjects) const {
  Tally t;
  for (const auto& rec : comparisons) {
    if (rec.algorithm != algorithm || rec.budget != budget || rec.strategy_a != a || rec.strategy_b != b ||
        rec.criterion != c) {
      continue;
    }
    if (!subjects.empty() && std::find(subjects.begin(), subjects.end(), rec.subject) == subjects.end()) continue;
    switch (rec.outcome) {
      case Outcome::AOutperforms: ++t.a; break;
      case Outcome::BOutperforms: ++t.b; break;
      case Outcome::NoSignificant: ++t.none; break;
    }
  }
  return t;
}

std::pair<double, double> ExperimentReport::correlation_means(Algorithm algorithm) const {
  double within = 0, across = 0;
  int nw = 0, na = 0;
  for (const auto& e : correlations) {
    if (e.algorithm != algorithm || !e.pcc) continue;
    (e.same_group ? within : across) += e.pcc->r;
    ++(e.same_group ? nw : na);
  }
  return {nw ? within / nw : std::nan(""), na ? across / na : std::nan("")};
}

std::vector<CorrelationEntry> correlation_matrix(const std::vector<RunRecord>& runs) {
  std::map<std::string, int> max_ec;
  for (const auto& r : runs) max_ec[r.subject] = std::max(max_ec[r.subject], r.result.coverage.ec);
  auto value = [&](const RunRecord& r, Criterion c) {
    if (c != Criterion::EC) return r.result.coverage.get(c);
    const int m = max_ec[r.subject];
    return m == 0 ? 0.0 : static_cast<double>(r.result.coverage.ec) / m;
  };
  auto group_of = [](Criterion c) {
    const auto groups = group_criteria();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (std::find(groups[g].begin(), groups[g].end(), c) != groups[g].end()) return g;
    }
    return groups.size();
  };

  std::vector<CorrelationEntry> out;
  for (Algorithm algo : {Algorithm::WS, Algorithm::MOSA, Algorithm::DynaMOSA}) {
    for (Criterion guide : kAllCriteria) {
      const std::string name = "single:" + std::string(to_string(guide));
      std::vector<const RunRecord*> sel;
      for (const auto& r : runs) {
        if (r.algorithm == algo && r.strategy == name) sel.push_back(&r);
      }
      if (sel.empty()) continue;
      for (Criterion measured : kAllCriteria) {
        if (measured == guide) continue;
        CorrelationEntry e;
        e.algorithm = algo;
        e.guide = guide;
        e.measured = measured;
        e.same_group = group_of(guide) == group_of(measured);
        e.n = sel.size();
        std::vector<double> x, y;
        for (const auto* r : sel) {
          x.push_back(value(*r, guide));
          y.push_back(value(*r, measured));
        }
        try {
          e.pcc = pearson(x, y);
        } catch (const Error&) {
          e.pcc.reset();
        }
        out.push_back(e);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string file_key(std::string s) {
  for (char& c : s) {
    if (c == ':' || c == ',' || c == '/') c = '-';
  }
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfig("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

void write_reports(const ExperimentReport& report, const ExperimentConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "runs");
  std::map<std::string, std::shared_ptr<Subject>> programs;
  for (const auto& path : config.subjects) {
    try {
      auto s = std::make_shared<Subject>(Subject::from_file(path.string()));
      programs[s->prog().name] = s;
    } catch (const Error&) {
    }
  }
  for (const auto& r : report.runs) {
    auto j = r.result.to_json(programs.count(r.subject) ? &programs[r.subject]->prog() : nullptr);
    j["budget"] = r.budget;
    j["repeat"] = r.repeat;
    const std::string name = file_key(r.subject) + "__" + std::string(to_string(r.algorithm)) + "__" +
                             file_key(r.strategy) + "__" + std::to_string(r.budget) + "__" +
                             std::to_string(r.repeat) + ".json";
    write_file(dir / "runs" / name, j.dump(2) + "\n");
  }

  std::string summary = "subject,algorithm,strategy,budget,criterion,seed,coverage\n";
  for (const auto& r : report.runs) {
    for (Criterion c : kAllCriteria) {
      summary += r.subject + "," + std::string(to_string(r.algorithm)) + "," + r.strategy + "," +
                 std::to_string(r.budget) + "," + std::string(to_string(c)) + "," + std::to_string(r.seed) + "," +
                 num(r.result.coverage.get(c)) + "\n";
    }
  }
  write_file(dir / "summary.csv", summary);

  std::string comps =
      "subject,band,algorithm,budget,strategy_a,strategy_b,criterion,median_a,median_b,a_hat,p,outcome\n";
  for (const auto& c : report.comparisons) {
    const auto band = report.bands.count(c.subject) ? to_string(report.bands.at(c.subject)) : "?";
    comps += c.subject + "," + std::string(band) + "," + std::string(to_string(c.algorithm)) + "," +
             std::to_string(c.budget) + "," + c.strategy_a + "," + c.strategy_b + "," +
             std::string(to_string(c.criterion)) + "," + num(c.median_a) + "," + num(c.median_b) + "," +
             num(c.a_hat) + "," + num(c.p) + "," + std::string(to_string(c.outcome)) + "\n";
  }
  write_file(dir / "comparisons.csv", comps);

  // Tallies per band and over all subjects.
  std::string sig = "band,algorithm,budget,strategy_a,strategy_b,criterion,a_outperforms,b_outperforms,no_significant\n";
  std::vector<std::pair<std::string, std::vector<std::string>>> scopes = {{"all", {}}};
  for (Band b : {Band::Small, Band::Medium, Band::Large}) {
    std::vector<std::string> names;
    for (const auto& [n, band] : report.bands) {
      if (band == b) names.push_back(n);
    }
    if (!names.empty()) scopes.emplace_back(std::string(to_string(b)), names);
  }
  std::vector<std::tuple<Algorithm, std::int64_t, std::string, std::string>> groups;
  for (const auto& c : report.comparisons) {
    std::tuple<Algorithm, std::int64_t, std::string, std::string> key{c.algorithm, c.budget, c.strategy_a, c.strategy_b};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  for (const auto& [scope, names] : scopes) {
    for (const auto& [algo, budget, a, b] : groups) {
      for (Criterion c : kAllCriteria) {
        const Tally t = report.tally(algo, budget, a, b, c, names);
        sig += scope + "," + std::string(to_string(algo)) + "," + std::to_string(budget) + "," + a + "," + b + "," +
               std::string(to_string(c)) + "," + std::to_string(t.a) + "," + std::to_string(t.b) + "," +
               std::to_string(t.none) + "\n";
      }
    }
  }
  write_file(dir / "significant_cases.csv", sig);

  std::string corr = "algorithm,guide,measured,same_group,n,pcc,p\n";
  for (const auto& e : report.correlations) {
    corr += std::string(to_string(e.algorithm)) + "," + std::string(to_string(e.guide)) + "," +
            std::string(to_string(e.measured)) + "," + (e.same_group ? "1" : "0") + "," + std::to_string(e.n) + "," +
            (e.pcc ? num(e.pcc->r) + "," + num(e.pcc->p) : std::string("NA,NA")) + "\n";
  }
  write_file(dir / "correlation_matrix.csv", corr);

  if (!report.diagnostics.empty()) {
    std::string d;
    for (const auto& line : report.diagnostics) d += line + "\n";
    write_file(dir / "diagnostics.txt", d);
  }
}

}  // namespace sbst
