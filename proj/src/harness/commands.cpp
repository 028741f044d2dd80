#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfnts/conjugate_linear.hpp"
#include "pfnts/coverage.hpp"
#include "pfnts/errors.hpp"
#include "pfnts/harness.hpp"
#include "pfnts/logged_data.hpp"
#include "pfnts/ope.hpp"

namespace pfnts::harness {

void run_coverage(const ExperimentConfig& config) {
  if (!config.coverage) throw ConfigError("coverage requires a [coverage] section");
  const auto& cov = *config.coverage;
  const auto spec = envs::scenario_spec(cov.dgp);

  ProblemFactory problems = [spec](const SeedSpec& seed) {
    auto dgp = std::make_shared<envs::SyntheticDgp>(spec, seed);
    RegressionProblem p;
    p.dim = spec.dim;
    p.sample_x = [dgp](Rng& rng) { return dgp->sample_context(rng); };
    p.latent_mean = [dgp](const Vector& x) { return dgp->mean(x, 0); };
    p.noise_sd = std::sqrt(dgp->noise_variance(0));
    return p;
  };
  ConjugateLinearModel::Params params{cov.prior_precision, cov.noise_variance};
  ModelFactory models = [params](std::size_t dim) { return std::make_unique<ConjugateLinearModel>(dim, params); };
  IntervalRule rule = cov.exact ? exact_posterior_rule(cov.level) : subclt_interval_rule(cov.base, cov.level, cov.v_floor);

  CoverageConfig cc{cov.dgp, cov.sizes, cov.reps, cov.queries};
  const auto result = coverage_diagnostic(problems, models, rule, cc, SeedSpec::root(config.seed).child("coverage", 0));

  std::filesystem::create_directories(config.output);
  std::ofstream csv(config.output / "coverage.csv");
  if (!csv) throw Error("cannot write " + (config.output / "coverage.csv").string());
  write_coverage_csv(csv, result.rows);

  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : result.summary) {
    summary.push_back({{"n", s.n}, {"coverage", s.coverage}, {"mean_length", s.mean_length}});
    std::cout << "n=" << s.n << " coverage=" << s.coverage << " mean_length=" << s.mean_length << '\n';
  }
  std::ofstream js(config.output / "coverage_summary.json");
  js << nlohmann::json{{"dgp", cov.dgp}, {"level", cov.level}, {"method", cov.exact ? "exact" : "subclt"},
                       {"summary", summary}}
            .dump(1)
     << '\n';
}

void run_ope(const ExperimentConfig& config) {
  if (!config.ope) throw ConfigError("ope requires an [ope] section");
  const auto& o = *config.ope;
  if (o.agent.kind == AgentKind::kOracle) throw ConfigError("the oracle agent cannot be evaluated offline");
  const auto root = SeedSpec::root(config.seed);

  std::vector<LoggedDecision> log;
  if (o.log) {
    log = envs::read_logged_csv(*o.log);
  } else {
    Rng rng(root.child("ope-log", 0));
    const auto& s = *o.synthetic;
    auto dgp = envs::EngagementDgp::sample(rng, s.propensities.size(), s.covariates);
    log = envs::generate_logged_data(dgp, s.propensities, s.users, s.days, rng, s.user_onehot).decisions;
  }
  ope::validate_log(log);
  const std::size_t arms = log.front().propensity.size();
  const std::size_t dim = static_cast<std::size_t>(log.front().context.size());

  auto agent = make_agent(o.agent, arms, dim, config.bridge);
  Rng replay_rng(root.child("replay", 0));
  const auto trace = ope::replay_run(*agent, log, ope::ReplayOptions{o.draws}, replay_rng);

  std::vector<std::size_t> horizons = o.horizons;
  if (horizons.empty()) {
    for (std::size_t k = 1; k <= 10; ++k) horizons.push_back(std::max<std::size_t>(1, log.size() * k / 10));
  }
  for (auto& h : horizons) h = std::min(h, log.size());

  std::filesystem::create_directories(config.output);
  const auto weights = ope::weight_summary(trace, log);
  {
    std::ofstream out(config.output / "weights.csv");
    ope::write_weight_histogram_csv(out, weights);
  }

  nlohmann::json all = nlohmann::json::array();
  for (const auto& name : o.estimators) {
    ope::Estimator est = name == "snips" ? ope::snips_estimator() : ope::dr_estimator({o.ridge, o.folds});
    Rng boot_rng(root.child("bootstrap", hash64(name)));
    const auto boot = ope::cluster_bootstrap(log, trace, est, o.bootstrap, boot_rng);
    Rng curve_rng(root.child("curve", hash64(name)));
    const auto curve = ope::horizon_curve(log, trace, est, horizons, curve_rng);
    auto report = ope::ope_report(name, boot, weights.max_weight, log.size(), curve);
    std::ofstream(config.output / ("ope_" + name + ".json")) << report.dump(1) << '\n';
    std::cout << name << ": " << boot.point << " [" << boot.lo << ", " << boot.hi << "] se=" << boot.se << '\n';
    all.push_back(std::move(report));
  }
  std::ofstream(config.output / "ope_report.json") << all.dump(1) << '\n';
}

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "experiment config (TOML)")->required();
  cmd->add_option("--seed", f.seed, "override the global seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig load_with_overrides(const CommonFlags& f) {
  auto cfg = load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.output = *f.out;
  if (f.jobs) cfg.jobs = *f.jobs;
  return cfg;
}

}  // namespace

int cli(int argc, const char* const* argv) {
  CLI::App app{"Thompson sampling on sequential predictive models"};
  app.name("pfnts");
  app.require_subcommand(1);

  CommonFlags run_f, ope_f, cov_f;
  auto* run = app.add_subcommand("run", "run a bandit experiment");
  add_common(run, run_f);
  auto* ope = app.add_subcommand("ope", "off-policy evaluation on logged data");
  add_common(ope, ope_f);
  auto* cov = app.add_subcommand("coverage", "interval coverage and length diagnostic");
  add_common(cov, cov_f);
  auto* report = app.add_subcommand("report", "rank table and aggregates from a run directory");
  std::string report_in;
  std::optional<std::string> report_out;
  report->add_option("--in", report_in, "completed run directory")->required();
  report->add_option("--out", report_out, "output directory (default: the run directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) {
      run_experiment(load_with_overrides(run_f));
    } else if (*ope) {
      run_ope(load_with_overrides(ope_f));
    } else if (*cov) {
      run_coverage(load_with_overrides(cov_f));
    } else if (*report) {
      run_report(report_in, report_out ? std::filesystem::path(*report_out) : std::filesystem::path(report_in));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pfnts::harness
