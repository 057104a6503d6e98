#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbst/engine.hpp"
#include "sbst/selection.hpp"

namespace sbst {

// Subject size bands, by branch count (2 per branch site).
inline constexpr int kSmallBandMaxBranches = 14;  // small: < 15 branches
inline constexpr int kLargeBandMinBranches = 40;  // large: >= 40 branches

enum class Band : std::uint8_t { Small, Medium, Large };
Band band_of(const Subject& subject);
std::string_view to_string(Band b);

// ---------------------------------------------------------------------------
// Statistics

struct MannWhitney {
  double u = 0;  // U of the first sample
  double p = 1;  // two-sided
};

// Exact permutation distribution (midranks) when |a|*|b| <= 400, otherwise the
// normal approximation with tie and continuity correction. Throws EmptySample.
MannWhitney mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

// (#{a_i > b_j} + 0.5 #{a_i = b_j}) / (|a| |b|). Throws EmptySample.
double vargha_delaney(const std::vector<double>& a, const std::vector<double>& b);

struct Correlation {
  double r = 0;
  double p = 1;  // two-sided, Student t with n - 2 dof
};

// Throws InvalidConfig when sizes differ or n < 3, DegenerateInput on zero variance.
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);

enum class Outcome : std::uint8_t { AOutperforms, BOutperforms, NoSignificant };
std::string_view to_string(Outcome o);

// A > 0.5 and p < 0.05 -> A; A < 0.5 and p < 0.05 -> B; anything else (incl. A = 0.5) -> none.
Outcome classify(double a_hat, double p, double alpha = 0.05);

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
  std::vector<std::filesystem::path> subjects;
  std::vector<Algorithm> algorithms = {Algorithm::WS, Algorithm::MOSA, Algorithm::DynaMOSA};
  std::vector<StrategyConfig> strategies;
  int repeats = 30;
  std::vector<std::int64_t> budgets = {20'000};
  std::uint64_t base_seed = 0;
  int jobs = 1;
  int population = 50;
  int line_threshold = 8;
  // Strategy name pairs to compare; empty means every pair in config order.
  std::vector<std::pair<std::string, std::string>> comparisons;
  std::optional<std::filesystem::path> subsumption_cache;

  // Relative subject paths resolve against `base_dir`. Throws InvalidConfig.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig from_file(const std::filesystem::path& path);
  void validate() const;
};

// hash(base seed, subject, algorithm, strategy, budget, repeat)
std::uint64_t cell_seed(std::uint64_t base, const std::string& subject, Algorithm algorithm,
                        const std::string& strategy, std::int64_t budget, int repeat);

struct RunRecord {
  std::string subject;
  Algorithm algorithm = Algorithm::WS;
  std::string strategy;
  std::int64_t budget = 0;
  int repeat = 0;
  std::uint64_t seed = 0;
  RunResult result;
};

struct ComparisonRecord {
  std::string subject;
  Algorithm algorithm = Algorithm::WS;
  std::int64_t budget = 0;
  std::string strategy_a, strategy_b;
  Criterion criterion = Criterion::BC;
  double median_a = 0, median_b = 0;
  double a_hat = 0.5;
  double p = 1;
  Outcome outcome = Outcome::NoSignificant;
};

struct Tally {
  int a = 0, b = 0, none = 0;
};

struct CorrelationEntry {
  Algorithm algorithm = Algorithm::WS;
  Criterion guide = Criterion::BC;     // criterion that drove the search
  Criterion measured = Criterion::BC;  // criterion whose coverage is correlated with it
  bool same_group = false;
  std::size_t n = 0;
  std::optional<Correlation> pcc;  // empty when either series has zero variance
};

struct ExperimentReport {
  std::vector<RunRecord> runs;  // cell order: subject, algorithm, strategy, budget, repeat
  std::vector<ComparisonRecord> comparisons;
  std::vector<CorrelationEntry> correlations;
  std::vector<std::string> diagnostics;  // skipped subjects and cells
  std::map<std::string, Band> bands;

  // Per (algorithm, budget, pair, criterion) over the given subjects (all when empty).
  Tally tally(Algorithm algorithm, std::int64_t budget, const std::string& a, const std::string& b, Criterion c,
              const std::vector<std::string>& subjects = {}) const;
  // Coverage samples of one cell group, in repeat order.
  std::vector<double> samples(const std::string& subject, Algorithm algorithm, const std::string& strategy,
                              std::int64_t budget, Criterion c) const;
  // Mean PCC over non-degenerate same-group / cross-group pairs.
  std::pair<double, double> correlation_means(Algorithm algorithm) const;
};

// Runs every cell (worker pool of `config.jobs` threads), then computes comparisons and correlations.
// Unparseable subjects and cells the algorithm rejects are skipped and recorded as diagnostics.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Writes runs/*.json, summary.csv, comparisons.csv, significant_cases.csv and correlation_matrix.csv.
void write_reports(const ExperimentReport& report, const ExperimentConfig& config, const std::filesystem::path& dir);

// RQ4 correlations: for each single-criterion strategy run, the guide criterion's coverage against
// every other criterion's; EC is divided by the subject's maximum EC count over all runs.
std::vector<CorrelationEntry> correlation_matrix(const std::vector<RunRecord>& runs);

}  // namespace sbst
