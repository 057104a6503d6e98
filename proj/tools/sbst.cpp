// Command-line front end: generate, bench, subsume, goals.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sbst/bench.hpp"
#include "sbst/engine.hpp"
#include "sbst/errors.hpp"

using namespace sbst;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSubjectError = 3;

// Every (operator, context) pair that has a subsumption table.
std::vector<std::pair<MutationOperator, std::string>> all_contexts() {
  std::vector<std::pair<MutationOperator, std::string>> out;
  for (const char* op : {"lt", "le", "gt", "ge", "eq", "ne"}) out.emplace_back(MutationOperator::ROR, std::string(op) + ":int");
  for (const char* op : {"eq", "ne"}) out.emplace_back(MutationOperator::ROR, std::string(op) + ":bool");
  for (const char* op : {"add", "sub", "mul", "div", "mod"}) out.emplace_back(MutationOperator::AOR, std::string(op) + ":int");
  for (const char* op : {"and", "or", "xor"}) out.emplace_back(MutationOperator::BOR, std::string(op) + ":int");
  return out;
}

Subject load_subject(const std::string& path) { return Subject::from_file(path); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search-based unit test generation for MiniLang"};
  app.require_subcommand(1);

  std::string subject_path, algo_text = "ws", strategy_text = "smart", out_dir, cache_dir;
  std::uint64_t seed = 0;
  std::int64_t budget = 20'000;
  int population = 50, line_threshold = 8, jobs = 1;

  auto* gen = app.add_subcommand("generate", "Run one search and print the RunResult with its suite");
  gen->add_option("subject", subject_path, "MiniLang source file")->required();
  gen->add_option("--algo,--algorithm", algo_text, "ws | mosa | dynamosa");
  gen->add_option("--strategy", strategy_text, "smart | original | smart-nosub | single:<C> | custom:<C>,<C>");
  gen->add_option("--seed", seed);
  gen->add_option("--budget", budget, "maximum evaluations");
  gen->add_option("--population", population);
  gen->add_option("--line-threshold", line_threshold);
  gen->add_option("--out-dir", out_dir, "also write the result JSON here");
  gen->add_option("--cache-dir", cache_dir, "subsumption table cache");

  std::string config_path;
  auto* bench = app.add_subcommand("bench", "Run an experiment config and write reports");
  bench->add_option("config", config_path, "experiment config (JSON)")->required();
  bench->add_option("--jobs", jobs, "worker threads (overrides the config)");
  bench->add_option("--out-dir", out_dir, "report directory (default: bench-out)");

  std::string op_text, context;
  auto* subsume = app.add_subcommand("subsume", "Derive or inspect mutant subsumption tables");
  subsume->add_option("--op", op_text, "ROR | AOR | BOR");
  subsume->add_option("--context", context, "e.g. lt:int");
  subsume->add_option("--cache-dir", cache_dir, "read/write tables in this directory");

  auto* goals = app.add_subcommand("goals", "Print the goal set a strategy selects");
  goals->add_option("subject", subject_path, "MiniLang source file")->required();
  goals->add_option("--strategy", strategy_text);
  goals->add_option("--algo,--algorithm", algo_text);
  goals->add_option("--line-threshold", line_threshold);
  goals->add_option("--cache-dir", cache_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  auto cache_path = [&]() -> std::optional<std::filesystem::path> {
    if (cache_dir.empty()) return std::nullopt;
    return std::filesystem::path(cache_dir);
  };

  try {
    if (gen->parsed()) {
      const auto strategy = StrategyConfig::parse(strategy_text, line_threshold);
      const auto algorithm = parse_algorithm(algo_text);
      SearchBudget b;
      b.seed = seed;
      b.max_evaluations = budget;
      b.population = population;
      b.validate();
      const Subject subject = load_subject(subject_path);
      SubsumptionCache tables(cache_path());
      const auto result = run_search(subject, strategy, algorithm, b, tables);
      const auto j = result.to_json(&subject.prog());
      std::cout << j.dump(2) << "\n";
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(std::filesystem::path(out_dir) / (subject.prog().name + ".json")) << j.dump(2) << "\n";
      }
    } else if (bench->parsed()) {
      auto config = ExperimentConfig::from_file(config_path);
      if (bench->count("--jobs")) config.jobs = jobs;
      config.validate();
      const auto report = run_experiment(config);
      const std::filesystem::path dir = out_dir.empty() ? "bench-out" : out_dir;
      write_reports(report, config, dir);
      for (const auto& d : report.diagnostics) std::cerr << "skipped: " << d << "\n";
      std::cout << report.runs.size() << " runs written to " << dir.string() << "\n";
      if (report.runs.empty()) return kSubjectError;
    } else if (subsume->parsed()) {
      SubsumptionCache tables(cache_path());
      nlohmann::json out = nlohmann::json::array();
      for (const auto& [op, ctx] : all_contexts()) {
        if (!op_text.empty() && op != parse_operator(op_text)) continue;
        if (!context.empty() && ctx != context) continue;
        out.push_back(tables.get(op, ctx).to_json());
      }
      if (!context.empty() && out.empty()) {
        out.push_back(tables.get(parse_operator(op_text.empty() ? "ROR" : op_text), context).to_json());
      }
      std::cout << out.dump(2) << "\n";
    } else if (goals->parsed()) {
      const auto strategy = StrategyConfig::parse(strategy_text, line_threshold);
      const auto algorithm = parse_algorithm(algo_text);
      const Subject subject = load_subject(subject_path);
      SubsumptionCache tables(cache_path());
      std::cout << build_goalset(subject, strategy, algorithm, tables).to_json(subject).dump(2) << "\n";
    }
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const BudgetTooSmall& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const EmptyObjectives& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const MissingBranchGoals& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const EmptyDomain& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "subject error: " << e.what() << "\n";
    return kSubjectError;
  }
  return kOk;
}
