#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "pfnts/classification.hpp"
#include "pfnts/conjugate_linear.hpp"
#include "pfnts/errors.hpp"
#include "pfnts/harness.hpp"
#include "pfnts/linear_agents.hpp"

namespace pfnts::harness {

SeedSpec environment_seed(std::uint64_t global, const std::string& scenario, std::size_t rep) {
  return SeedSpec::root(global).child("env", hash64(scenario)).child("rep", rep);
}

SeedSpec agent_seed(std::uint64_t global, const std::string& scenario, const std::string& agent,
                    std::size_t rep) {
  return SeedSpec::root(global).child("agent", hash64(scenario)).child(agent, rep);
}

std::unique_ptr<Environment> make_environment(const ScenarioConfig& scenario, const SeedSpec& seed) {
  if (scenario.classification) {
    auto env = envs::ingest_csv(scenario.path, scenario.label, scenario.categorical, scenario.horizon_cap);
    return std::make_unique<envs::ClassificationEnv>(std::move(env));
  }
  return std::make_unique<envs::SyntheticDgp>(scenario.synthetic, seed);
}

ModelFactory make_model_factory(const AgentConfig& agent, const std::optional<BridgeOptions>& bridge) {
  switch (agent.backend) {
    case Backend::kConjugate: {
      ConjugateLinearModel::Params p{agent.prior_precision, agent.noise_variance};
      return [p](std::size_t dim) { return std::make_unique<ConjugateLinearModel>(dim, p); };
    }
    case Backend::kBetaBernoulli: {
      double a = agent.prior_a, b = agent.prior_b;
      return [a, b](std::size_t) { return std::make_unique<BetaBernoulliModel>(a, b); };
    }
    case Backend::kBridge: {
      if (!bridge) throw ConfigError("bridge backend requires a [bridge] section");
      BridgeOptions opt = *bridge;
      return [opt](std::size_t dim) { return std::make_unique<RemoteModel>(dim, opt); };
    }
  }
  throw ConfigError("unknown backend");
}

std::unique_ptr<Agent> make_agent(const AgentConfig& a, std::size_t arms, std::size_t dim,
                                  const std::optional<BridgeOptions>& bridge, Environment* env) {
  switch (a.kind) {
    case AgentKind::kPfnTs:
    case AgentKind::kPfnPs:
    case AgentKind::kPfnGreedy: {
      PfnTsConfig c;
      c.arms = arms;
      c.dim = dim;
      c.base = a.base;
      c.warmup = a.warmup;
      c.v_floor = a.v_floor;
      c.v_fallback = a.v_fallback;
      c.switch_times = a.switch_times;
      c.k_threshold = a.k_threshold;
      c.encoding = a.encoding;
      // A context-free model cannot tell arms apart inside a shared model.
      if (a.backend == Backend::kBetaBernoulli) c.encoding = EncodingMode::kDisjoint;
      c.rule = a.kind == AgentKind::kPfnTs   ? DecisionRule::kThompson
               : a.kind == AgentKind::kPfnPs ? DecisionRule::kPredictiveSampling
                                             : DecisionRule::kGreedy;
      return std::make_unique<PfnTsAgent>(c, make_model_factory(a, bridge));
    }
    case AgentKind::kLinTs: return std::make_unique<LinTsAgent>(arms, dim, a.nu, a.lambda);
    case AgentKind::kLinUcb: return std::make_unique<LinUcbAgent>(arms, dim, a.alpha, a.lambda);
    case AgentKind::kUniform: return std::make_unique<UniformAgent>(arms);
    case AgentKind::kOracle: {
      if (!env) throw ConfigError("the oracle agent needs an environment");
      return std::make_unique<OracleAgent>(arms, [env](const Context&, std::size_t t) { return env->arm_means(t); });
    }
  }
  throw ConfigError("unknown agent kind");
}

std::vector<double> run_bandit(Environment& env, Agent& agent, std::size_t horizon, Rng& rng,
                               std::vector<std::size_t>* actions) {
  const std::size_t T = std::min(horizon, env.horizon_limit());
  std::vector<double> curve;
  curve.reserve(T);
  double total = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const Context x = env.context(t);
    const auto means = env.arm_means(t);
    const std::size_t arm = agent.act(x, t, rng);
    if (arm >= means.size()) throw ArmIndexError("agent chose arm " + std::to_string(arm));
    const double r = env.reward(t, arm);
    agent.update(x, arm, r, t);
    total += *std::max_element(means.begin(), means.end()) - means[arm];
    curve.push_back(total);
    if (actions) actions->push_back(arm);
  }
  return curve;
}

std::vector<CellResult> run_cells(const ExperimentConfig& config) {
  if (config.scenarios.empty()) throw ConfigError("no scenarios configured");
  if (config.agents.empty()) throw ConfigError("no agents configured");

  // Classification tables are read once and copied into each cell.
  std::map<std::string, std::shared_ptr<const envs::ClassificationEnv>> tables;
  for (const auto& sc : config.scenarios) {
    if (!sc.classification) continue;
    tables[sc.name] = std::make_shared<envs::ClassificationEnv>(
        envs::ingest_csv(sc.path, sc.label, sc.categorical, sc.horizon_cap));
  }

  std::vector<CellResult> cells;
  for (const auto& sc : config.scenarios)
    for (const auto& ag : config.agents)
      for (std::size_t r = 0; r < config.replications; ++r) cells.push_back({sc.name, ag.name, r, {}});

  auto run_one = [&](std::size_t i) {
    const std::size_t per_scenario = config.agents.size() * config.replications;
    const auto& sc = config.scenarios[i / per_scenario];
    const auto& ag = config.agents[(i % per_scenario) / config.replications];
    const std::size_t rep = i % config.replications;
    std::unique_ptr<Environment> env;
    if (sc.classification) {
      env = std::make_unique<envs::ClassificationEnv>(*tables.at(sc.name));
    } else {
      env = make_environment(sc, environment_seed(config.seed, sc.name, rep));
    }
    auto agent = make_agent(ag, env->num_arms(), env->dim(), config.bridge, env.get());
    Rng rng(agent_seed(config.seed, sc.name, ag.name, rep));
    cells[i].cum_regret = run_bandit(*env, *agent, config.horizon, rng);
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, cells.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_one(i);
    return cells;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) {
        try {
          run_one(i);
        } catch (...) {
          std::lock_guard lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          next = cells.size();
        }
      }
    });
  }
  for (auto& th : workers) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return cells;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_results(const std::vector<CellResult>& cells, const ExperimentConfig& config,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "regret.csv");
  if (!out) throw Error("cannot write " + (dir / "regret.csv").string());
  out << "scenario,agent,rep,t,cum_regret\n";
  for (const auto& c : cells) {
    for (std::size_t t = 0; t < c.cum_regret.size(); ++t) {
      out << c.scenario << ',' << c.agent << ',' << c.rep << ',' << (t + 1) << ',' << fmt(c.cum_regret[t]) << '\n';
    }
  }
  write_aggregates(cells, config.thin, dir / "aggregates.json");
}

void write_aggregates(const std::vector<CellResult>& cells, std::size_t thin, const std::filesystem::path& path) {
  if (thin == 0) throw ParamError("thinning stride must be >= 1");

  // Mean, SD and SE across replications at every `thin` rounds and the last.
  nlohmann::json curves = nlohmann::json::array();
  std::size_t i = 0;
  while (i < cells.size()) {
    std::size_t j = i;
    while (j < cells.size() && cells[j].scenario == cells[i].scenario && cells[j].agent == cells[i].agent) ++j;
    std::size_t T = cells[i].cum_regret.size();
    for (std::size_t k = i; k < j; ++k) T = std::min(T, cells[k].cum_regret.size());
    const double R = static_cast<double>(j - i);
    nlohmann::json ts = nlohmann::json::array(), mean = nlohmann::json::array(), sd = nlohmann::json::array(),
                   se = nlohmann::json::array();
    for (std::size_t t = thin; t <= T + thin - 1; t += thin) {
      const std::size_t tt = std::min(t, T);
      double m = 0.0;
      for (std::size_t k = i; k < j; ++k) m += cells[k].cum_regret[tt - 1];
      m /= R;
      double ss = 0.0;
      for (std::size_t k = i; k < j; ++k) ss += (cells[k].cum_regret[tt - 1] - m) * (cells[k].cum_regret[tt - 1] - m);
      const double s = R > 1 ? std::sqrt(ss / (R - 1)) : 0.0;
      ts.push_back(tt);
      mean.push_back(m);
      sd.push_back(s);
      se.push_back(s / std::sqrt(R));
      if (tt == T) break;
    }
    curves.push_back({{"scenario", cells[i].scenario},
                      {"agent", cells[i].agent},
                      {"reps", j - i},
                      {"t", ts},
                      {"mean", mean},
                      {"sd", sd},
                      {"se", se}});
    i = j;
  }
  nlohmann::json agg{{"thin", thin}, {"curves", curves}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << agg.dump(1) << '\n';
}

void run_experiment(const ExperimentConfig& config) {
  const auto cells = run_cells(config);
  write_results(cells, config, config.output);
  FinalRegrets finals;
  for (const auto& c : cells) finals[c.scenario][c.agent].push_back(c.cum_regret.empty() ? 0.0 : c.cum_regret.back());
  if (config.agents.size() >= 2) {
    std::ofstream out(config.output / "rank_table.csv");
    write_rank_table(out, rank_table(finals));
  }
}

}  // namespace pfnts::harness
