#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pfnts/agent.hpp"
#include "pfnts/bridge.hpp"
#include "pfnts/environment.hpp"
#include "pfnts/pfnts_agent.hpp"
#include "pfnts/synthetic.hpp"

namespace pfnts::harness {

enum class AgentKind { kPfnTs, kPfnPs, kPfnGreedy, kLinTs, kLinUcb, kUniform, kOracle };
enum class Backend { kConjugate, kBetaBernoulli, kBridge };

struct AgentConfig {
  std::string name;
  AgentKind kind = AgentKind::kPfnTs;
  Backend backend = Backend::kConjugate;
  // PFN-TS family
  double base = 2.0;
  std::size_t warmup = 5;
  double v_floor = 1e-8;
  double v_fallback = 1.0;
  std::vector<std::size_t> switch_times{64, 128, 256, 512, 1024, 2048};
  std::size_t k_threshold = 5;
  EncodingMode encoding = EncodingMode::kAdaptive;
  // conjugate backend
  double prior_precision = 1.0;
  double noise_variance = 1.0;
  // beta-bernoulli backend
  double prior_a = 1.0;
  double prior_b = 1.0;
  // linear baselines
  double nu = 1.0;
  double alpha = 1.0;
  double lambda = 1.0;
};

struct ScenarioConfig {
  std::string name;
  bool classification = false;
  envs::DgpSpec synthetic;  // when !classification
  std::filesystem::path path;
  std::string label;
  std::vector<std::string> categorical;
  std::size_t horizon_cap = 10'000;
};

struct CoverageSection {
  std::string dgp = "Linear";
  std::vector<std::size_t> sizes{16, 64, 256, 1024};
  std::size_t reps = 10;
  std::size_t queries = 50;
  double level = 0.95;
  bool exact = false;  // exact conjugate posterior instead of SubCLT
  double base = 2.0;
  double v_floor = 1e-8;
  double prior_precision = 1.0;
  double noise_variance = 1.0;
};

struct SyntheticLogSection {
  std::size_t users = 349;
  std::size_t days = 30;
  std::vector<double> propensities{0.4, 0.3, 0.3};
  std::size_t covariates = 2;
  bool user_onehot = true;
};

struct OpeSection {
  std::optional<std::filesystem::path> log;
  std::optional<SyntheticLogSection> synthetic;
  std::vector<std::string> estimators{"snips", "dr"};
  std::size_t bootstrap = 30;
  std::size_t draws = 100;
  std::vector<std::size_t> horizons;
  double ridge = 1.0;
  std::size_t folds = 2;
  AgentConfig agent;
};

struct ExperimentConfig {
  std::vector<ScenarioConfig> scenarios;
  std::vector<AgentConfig> agents;
  std::size_t horizon = 10'000;
  std::size_t replications = 5;
  std::uint64_t seed = 42;
  std::filesystem::path output = "results";
  std::size_t thin = 10;
  std::size_t jobs = 1;
  std::optional<BridgeOptions> bridge;
  std::optional<CoverageSection> coverage;
  std::optional<OpeSection> ope;
};

// Strict TOML schema; unknown keys and malformed values raise ConfigError.
// Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Builders shared by the commands and the tests.
std::unique_ptr<Environment> make_environment(const ScenarioConfig& scenario, const SeedSpec& seed);
ModelFactory make_model_factory(const AgentConfig& agent, const std::optional<BridgeOptions>& bridge);
std::unique_ptr<Agent> make_agent(const AgentConfig& agent, std::size_t arms, std::size_t dim,
                                  const std::optional<BridgeOptions>& bridge, Environment* env = nullptr);

// Environment seed for (scenario, rep): shared by every agent in that rep.
SeedSpec environment_seed(std::uint64_t global, const std::string& scenario, std::size_t rep);
SeedSpec agent_seed(std::uint64_t global, const std::string& scenario, const std::string& agent,
                    std::size_t rep);

// Plays one agent against one environment for `horizon` rounds (capped by
// the environment) and returns cumulative regret after each round.
std::vector<double> run_bandit(Environment& env, Agent& agent, std::size_t horizon, Rng& rng,
                               std::vector<std::size_t>* actions = nullptr);

struct CellResult {
  std::string scenario;
  std::string agent;
  std::size_t rep = 0;
  std::vector<double> cum_regret;
};

// Runs every (scenario, agent, rep) cell on `jobs` workers. Output order is
// fixed (scenario, agent, rep) regardless of scheduling.
std::vector<CellResult> run_cells(const ExperimentConfig& config);

// Writes regret.csv (scenario,agent,rep,t,cum_regret) and aggregates.json.
void write_results(const std::vector<CellResult>& cells, const ExperimentConfig& config,
                   const std::filesystem::path& dir);
// Per (scenario, agent): mean, SD and SE of the cumulative regret across
// replications every `thin` rounds, plus the final round.
void write_aggregates(const std::vector<CellResult>& cells, std::size_t thin, const std::filesystem::path& path);
// Inverse of the regret.csv writer; cells keep their file order.
std::vector<CellResult> read_regret_csv(const std::filesystem::path& path);
void run_experiment(const ExperimentConfig& config);

struct RankRow {
  std::string scenario;
  std::string agent;
  std::size_t reps = 0;
  double mean_final = 0.0;
  double sd_final = 0.0;
  double se_final = 0.0;
  double rank = 0.0;
};

struct RankTable {
  std::vector<std::string> scenarios;
  std::vector<std::string> agents;
  std::vector<RankRow> rows;
  std::map<std::string, double> average_rank;
};

// finals[scenario][agent] = final cumulative regret per replication.
using FinalRegrets = std::map<std::string, std::map<std::string, std::vector<double>>>;

// Ranks agents within each scenario by mean final regret (1 = lowest, ties
// share the mean of their ranks) and averages ranks across scenarios.
// IncompleteResults lists every missing (scenario, agent) cell.
RankTable rank_table(const FinalRegrets& finals);
FinalRegrets read_final_regrets(const std::filesystem::path& regret_csv);
void write_rank_table(std::ostream& out, const RankTable& table);

void run_coverage(const ExperimentConfig& config);
void run_ope(const ExperimentConfig& config);
void run_report(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir);

// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
int cli(int argc, const char* const* argv);

}  // namespace pfnts::harness
