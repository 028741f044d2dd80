// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pfnts/conjugate_linear.hpp"
#include "pfnts/coverage.hpp"
#include "pfnts/distribution.hpp"
#include "pfnts/errors.hpp"
#include "pfnts/harness.hpp"
#include "pfnts/logged_data.hpp"
#include "pfnts/ope.hpp"
#include "pfnts/pfnts_agent.hpp"
#include "pfnts/subclt.hpp"
#include "support/oracles.hpp"

using namespace pfnts;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double median(std::vector<double> v) { return oracle::quantile(std::move(v), 0.5); }
double iqr(const std::vector<double>& v) { return oracle::quantile(v, 0.75) - oracle::quantile(v, 0.25); }

// ---- 1 -------------------------------------------------------------------

Outcome grid_exactness() {
  Outcome out;
  std::size_t checked = 0;
  for (double b : {1.5, 2.0, 3.0}) {
    for (std::size_t n = 4; n <= 10000; ++n) {
      // independent iteration
      std::vector<std::size_t> pts;
      std::size_t t = 2;
      for (; t <= n; t = std::max(t + 1, static_cast<std::size_t>(std::floor(b * static_cast<double>(t))))) {
        pts.push_back(t);
      }
      if (pts.size() < 2) {
        // b = 3 with n = 4, 5: the iteration yields a single point, no block
        try {
          geometric_grid(n, b);
          out.pass = false;
        } catch (const GridTooShort&) {
        }
        continue;
      }
      const auto g = geometric_grid(n, b);
      const auto w = block_weights(g);
      bool ok = g.points == pts && g.points.front() == 2 && g.last() <= n && next_grid_point(g.last(), b) > n &&
                w.size() + 1 == pts.size();
      for (std::size_t j = 1; ok && j < pts.size(); ++j) {
        const double a = static_cast<double>(pts[j - 1]), c = static_cast<double>(pts[j]);
        ok = w[j - 1] == c * a / (c - a);
      }
      out.pass = out.pass && ok;
      ++checked;
    }
  }
  out.detail = std::to_string(checked) + " (n, b) grids checked";
  return out;
}

// ---- 2 -------------------------------------------------------------------

Outcome vhat_consistency() {
  const std::size_t d = 5, seeds = 50;
  const double noise = 0.25;
  Rng qrng(SeedSpec::root(2024).child("queries", 0));
  std::vector<Vector> queries;
  for (int i = 0; i < 5; ++i) {
    Vector q(d);
    for (std::size_t j = 0; j < d; ++j) q(static_cast<Eigen::Index>(j)) = qrng.uniform();
    queries.push_back(q);
  }
  std::vector<double> r256, r4096;
  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng(SeedSpec::root(2024).child("seed", s));
    // well-specified: beta from the model's own prior
    Vector beta(d);
    for (std::size_t j = 0; j < d; ++j) beta(static_cast<Eigen::Index>(j)) = rng.normal();
    ConjugateLinearModel model(d, {1.0, noise});
    for (std::size_t i = 0; i < 4096; ++i) {
      Vector x(d);
      for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(j)) = rng.uniform();
      model.fit_append(Sample{x, x.dot(beta) + rng.normal(0.0, std::sqrt(noise))});
    }
    for (const auto& q : queries) {
      for (std::size_t n : {256u, 4096u}) {
        const auto est = subclt_estimate(model, n, q, 2.0);
        const double exact = model.posterior_var(q, est.refresh);
        const double ratio = est.vhat / (static_cast<double>(est.refresh) * exact);
        (n == 256 ? r256 : r4096).push_back(ratio);
      }
    }
  }
  const double med = median(r4096);
  const double iqr_small = iqr(r256), iqr_big = iqr(r4096);
  Outcome out;
  out.pass = med >= 0.6 && med <= 1.6 && iqr_big < iqr_small;
  out.detail = fmt("median ratio at n=4096 %.3f", med) + fmt2(", IQR %.3f (n=4096) vs %.3f (n=256)", iqr_big, iqr_small);
  return out;
}

// ---- 3 -------------------------------------------------------------------

Outcome coverage() {
  const auto spec = envs::scenario_spec("Linear");
  ProblemFactory problems = [spec](const SeedSpec& seed) {
    auto dgp = std::make_shared<envs::SyntheticDgp>(spec, seed);
    RegressionProblem p;
    p.dim = spec.dim;
    p.sample_x = [dgp](Rng& rng) { return dgp->sample_context(rng); };
    p.latent_mean = [dgp](const Vector& x) { return dgp->mean(x, 0); };
    p.noise_sd = std::sqrt(dgp->noise_variance(0));
    return p;
  };
  ModelFactory models = [](std::size_t dim) {
    return std::make_unique<ConjugateLinearModel>(dim, ConjugateLinearModel::Params{1.0, 1.0});
  };
  CoverageConfig cc{"Linear", {16, 64, 256, 1024}, 50, 20};
  const auto res = coverage_diagnostic(problems, models, subclt_interval_rule(2.0, 0.95, 1e-8), cc,
                                       SeedSpec::root(3).child("coverage", 0));
  Outcome out;
  bool monotone = true;
  for (std::size_t i = 1; i < res.summary.size(); ++i) {
    monotone = monotone && res.summary[i].mean_length < res.summary[i - 1].mean_length;
  }
  const double cov = res.summary.back().coverage;
  out.pass = cov >= 0.85 && cov <= 0.99 && monotone;
  out.detail = fmt("coverage at n=1024 %.3f; lengths", cov);
  for (const auto& s : res.summary) out.detail += fmt(" %.4f", s.mean_length);
  return out;
}

// ---- shared bandit runs -----------------------------------------------------

harness::AgentConfig agent_config(harness::AgentKind kind, const std::string& name) {
  harness::AgentConfig a;
  a.kind = kind;
  a.name = name;
  return a;
}

// Mean cumulative regret curve over paired replications.
std::vector<double> mean_regret(const std::string& scenario, const harness::AgentConfig& agent, std::size_t horizon,
                                std::size_t reps, std::uint64_t seed) {
  harness::ScenarioConfig sc;
  sc.name = scenario;
  sc.synthetic = envs::scenario_spec(scenario);
  std::vector<double> mean(horizon, 0.0);
  for (std::size_t r = 0; r < reps; ++r) {
    auto env = harness::make_environment(sc, harness::environment_seed(seed, scenario, r));
    auto ag = harness::make_agent(agent, env->num_arms(), env->dim(), std::nullopt, env.get());
    Rng rng(harness::agent_seed(seed, scenario, agent.name, r));
    const auto curve = harness::run_bandit(*env, *ag, horizon, rng);
    for (std::size_t t = 0; t < horizon; ++t) mean[t] += curve[t] / static_cast<double>(reps);
  }
  return mean;
}

// ---- 4 -------------------------------------------------------------------

Outcome linear_sanity() {
  const std::size_t t_max = 2000, reps = 5;
  const std::uint64_t seed = 4;
  const auto uniform = mean_regret("Linear", agent_config(harness::AgentKind::kUniform, "uniform"), t_max, reps, seed);
  Outcome out;
  for (auto [kind, name] : {std::pair{harness::AgentKind::kPfnTs, "pfn-ts"}, std::pair{harness::AgentKind::kLinTs, "lints"}}) {
    const auto m = mean_regret("Linear", agent_config(kind, name), t_max, reps, seed);
    const double r1 = m[999], r2 = m[1999];
    const bool ok = r2 <= 1.6 * r1 && r2 <= 0.2 * uniform[1999];
    out.pass = out.pass && ok;
    out.detail += std::string(name) + fmt2(" R(1000)=%.2f R(2000)=%.2f", r1, r2) + "; ";
  }
  out.detail += fmt("uniform R(2000)=%.2f", uniform[1999]);
  return out;
}

// ---- 5 -------------------------------------------------------------------

Outcome crps_correctness() {
  Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t bins = 2 + rng.uniform_index(30);
    BinnedPmf pmf;
    double edge = rng.uniform(-3.0, 0.0);
    for (std::size_t j = 0; j < bins; ++j) {
      const double w = rng.uniform(0.05, 0.5);
      pmf.widths.push_back(w);
      pmf.midpoints.push_back(edge + w / 2);
      edge += w;
    }
    pmf.probs = rng.dirichlet(bins, 1.0);
    const double r = rng.uniform(-4.0, 4.0);
    worst = std::max(worst, std::abs(crps_binned(pmf, r) - oracle::crps_steps_integral(pmf.midpoints, pmf.widths,
                                                                                          pmf.probs, r)));
  }
  const double g = crps_gaussian(0.7, 1.0, 0.7);
  const double g_oracle = oracle::crps_gaussian_integral(0.7, 1.0, 0.7);
  Outcome out;
  out.pass = worst <= 1e-6 && std::abs(g - 0.23370) <= 1e-4 && std::abs(g_oracle - 0.23370) <= 1e-4 &&
             std::abs(g - g_oracle) <= 1e-6;
  out.detail = fmt("binned max error %.2e", worst) + fmt2("; gaussian %.6f, oracle %.6f", g, g_oracle);
  return out;
}

// ---- 6 -------------------------------------------------------------------

Outcome encoding_invariant() {
  Outcome out;
  for (const char* scenario : {"Friedman", "Friedman-Sparse-Disjoint"}) {
    harness::ScenarioConfig sc;
    sc.name = scenario;
    sc.synthetic = envs::scenario_spec(scenario);
    auto env = harness::make_environment(sc, harness::environment_seed(6, scenario, 0));
    auto cfg = agent_config(harness::AgentKind::kPfnTs, "pfn-ts");
    auto base = harness::make_agent(cfg, env->num_arms(), env->dim(), std::nullopt, env.get());
    auto& agent = dynamic_cast<PfnTsAgent&>(*base);
    Rng rng(7);
    bool challenger_after = false;
    for (std::size_t t = 1; t <= 3000; ++t) {
      const Context x = env->context(t);
      const std::size_t a = agent.act(x, t, rng);
      agent.update(x, a, env->reward(t, a), t);
      if (t >= 2048 && (agent.has_challenger() || agent.dual_caching())) challenger_after = true;
    }
    bool ok = agent.switch_log().size() == cfg.switch_times.size() && !challenger_after;
    double prev_d = 0.0, prev_o = 0.0;
    std::size_t swaps = 0;
    for (const auto& ev : agent.switch_log()) {
      const double act = ev.after == Encoding::kDisjoint ? ev.disjoint_crps : ev.onehot_crps;
      const double chal = ev.after == Encoding::kDisjoint ? ev.onehot_crps : ev.disjoint_crps;
      ok = ok && act <= chal && (ev.after == ev.before || act < chal);
      ok = ok && ev.disjoint_crps >= prev_d && ev.onehot_crps >= prev_o;
      prev_d = ev.disjoint_crps;
      prev_o = ev.onehot_crps;
      swaps += ev.after != ev.before;
    }
    out.pass = out.pass && ok;
    out.detail += std::string(scenario) + ": " + std::to_string(agent.switch_log().size()) + " switch points, " +
                  std::to_string(swaps) + " swaps, final " + std::string(to_string(agent.active_encoding())) + "; ";
  }
  return out;
}

// ---- 7 -------------------------------------------------------------------

std::vector<double> target_policy(const Context& x) {
  // depends on the first user covariate and the day
  if (x(0) > 0.5) return {0.7, 0.2, 0.1};
  return x(2) > 0.5 ? std::vector<double>{0.1, 0.3, 0.6} : std::vector<double>{0.3, 0.4, 0.3};
}

Outcome ope_correctness() {
  const std::size_t users = 500, days = 100;
  const std::vector<double> prop{0.4, 0.3, 0.3};
  Rng dgp_rng(SeedSpec::root(7).child("dgp", 0));
  const auto dgp = envs::EngagementDgp::sample(dgp_rng);

  // truth: expected reward of the target policy on fresh users
  double truth = 0.0;
  {
    Rng rng(SeedSpec::root(7).child("truth", 0));
    const std::size_t sim_users = 40000;
    for (std::size_t u = 0; u < sim_users; ++u) {
      Vector c(2);
      c << rng.uniform(), rng.uniform();
      const double eta = rng.normal(0.0, dgp.user_sd);
      for (std::size_t d = 1; d <= days; ++d) {
        const double frac = static_cast<double>(d) / static_cast<double>(days);
        Vector x(3);
        x << c(0), c(1), frac;
        const auto pi = target_policy(x);
        for (std::size_t a = 0; a < 3; ++a) truth += pi[a] * dgp.mean(c, frac, eta, a);
      }
    }
    truth /= static_cast<double>(sim_users * days);
  }

  Outcome out;
  std::size_t dr_hits = 0, snips_hits = 0;
  double max_w = 0.0, first_snips = 0.0;
  bool deterministic = true;
  const std::size_t trials = 20;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng(SeedSpec::root(7).child("trial", trial));
    const auto data = envs::generate_logged_data(dgp, prop, users, days, rng, false);
    FixedPolicyAgent agent(3, target_policy, "target");
    const auto trace = ope::replay_run(agent, data.decisions, {}, rng);
    const double v = ope::snips(trace, data.decisions);
    if (trial == 0) first_snips = v;
    snips_hits += std::abs(v - truth) <= 0.02;
    max_w = std::max(max_w, ope::weight_summary(trace, data.decisions).max_weight);

    Rng brng(SeedSpec::root(7).child("bootstrap", trial));
    const auto dr = ope::cluster_bootstrap(data.decisions, trace, ope::dr_estimator(), 30, brng);
    dr_hits += std::abs(dr.point - truth) <= 2.0 * dr.se;

    if (trial == 0) {
      for (const auto& est : {ope::snips_estimator(), ope::dr_estimator()}) {
        Rng a(SeedSpec::root(7).child("repeat", 0)), b(SeedSpec::root(7).child("repeat", 0));
        const auto x = ope::cluster_bootstrap(data.decisions, trace, est, 30, a);
        const auto y = ope::cluster_bootstrap(data.decisions, trace, est, 30, b);
        deterministic = deterministic && x.lo == y.lo && x.hi == y.hi && x.point == y.point && x.values == y.values;
      }
    }
  }
  out.pass = std::abs(first_snips - truth) <= 0.02 && max_w <= 10.0 / 3.0 + 1e-9 && dr_hits >= 16 && deterministic;
  out.detail = fmt2("truth %.4f, SNIPS %.4f", truth, first_snips) + " (" + std::to_string(snips_hits) +
               "/20 within 0.02)" + fmt(", max weight %.4f", max_w) + ", DR within 2 SE in " +
               std::to_string(dr_hits) + "/20, bootstrap " + (deterministic ? "reproducible" : "NOT reproducible");
  return out;
}

// ---- 8 -------------------------------------------------------------------

bool same_dist(const PredictiveDistribution& a, const PredictiveDistribution& b) {
  if (a.index() != b.index()) return false;
  if (const auto* g = std::get_if<GaussianDist>(&a)) {
    const auto& h = std::get<GaussianDist>(b);
    return g->mean == h.mean && g->variance == h.variance;
  }
  const auto& p = std::get<BinnedPmf>(a);
  const auto& q = std::get<BinnedPmf>(b);
  return p.midpoints == q.midpoints && p.widths == q.widths && p.probs == q.probs;
}

Outcome snapshot_determinism() {
  Rng rng(8);
  bool ok = true;
  std::size_t compared = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const bool binary = rep % 4 == 3;
    const std::size_t d = binary ? 0 : 1 + rng.uniform_index(6);
    std::unique_ptr<PredictiveModel> model;
    if (binary) {
      model = std::make_unique<BetaBernoulliModel>(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0));
    } else {
      model = std::make_unique<ConjugateLinearModel>(
          d, ConjugateLinearModel::Params{rng.uniform(0.1, 3.0), rng.uniform(0.1, 2.0)});
    }
    auto row = [&] {
      Vector x(static_cast<Eigen::Index>(d));
      for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(j)) = rng.normal();
      return Sample{x, binary ? (rng.bernoulli(0.3) ? 1.0 : 0.0) : rng.normal()};
    };
    Vector q(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) q(static_cast<Eigen::Index>(j)) = rng.normal();

    const std::size_t n1 = 5 + rng.uniform_index(60);
    for (std::size_t i = 0; i < n1; ++i) model->fit_append(row());
    std::vector<std::size_t> prefixes;
    for (int k = 0; k < 6; ++k) prefixes.push_back(rng.uniform_index(n1 + 1));
    std::vector<double> means;
    std::vector<PredictiveDistribution> dists;
    for (std::size_t p : prefixes) {
      means.push_back(model->predict_mean(q, p));
      dists.push_back(model->predict_dist(q, p));
    }
    const auto snap = model->snapshot(prefixes[0]);
    for (std::size_t i = 0; i < 50; ++i) model->fit_append(row());
    for (std::size_t k = 0; k < prefixes.size(); ++k) {
      ok = ok && model->predict_mean(q, prefixes[k]) == means[k];
      ok = ok && same_dist(model->predict_dist(q, prefixes[k]), dists[k]);
      const auto h = model->snapshot(prefixes[k]);
      ok = ok && h.predict_mean(q) == means[k] && same_dist(h.predict_dist(q), dists[k]);
      ++compared;
    }
    ok = ok && snap.predict_mean(q) == means[0];
  }

  // Thompson means between refresh points
  PfnTsConfig c;
  c.arms = 2;
  c.dim = 3;
  c.encoding = EncodingMode::kDisjoint;
  PfnTsAgent agent(c, [](std::size_t dim) {
    return std::make_unique<ConjugateLinearModel>(dim, ConjugateLinearModel::Params{1.0, 1.0});
  });
  const Vector q = Vector::Constant(3, 0.4);
  std::map<std::pair<std::size_t, std::size_t>, double> seen;
  std::size_t held = 0;
  for (std::size_t t = 1; t <= 1500; ++t) {
    Vector x(3);
    x << rng.uniform(), rng.uniform(), rng.uniform();
    const std::size_t arm = rng.uniform_index(2);
    agent.update(x, arm, rng.normal(), t);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto est = agent.estimate(q, k);
      if (!est) continue;
      auto [it, fresh] = seen.emplace(std::pair{k, est->refresh}, est->mean);
      if (!fresh) {
        ok = ok && it->second == est->mean;
        ++held;
      }
    }
  }
  Outcome out;
  out.pass = ok;
  out.detail = std::to_string(compared) + " prefix predictions compared, " + std::to_string(held) +
               " Thompson means rechecked between refreshes";
  return out;
}

// ---- 9 -------------------------------------------------------------------

Outcome ablation_direction() {
  const std::size_t t_max = 2000, reps = 5;
  const std::uint64_t seed = 9;
  const auto ts = mean_regret("Friedman", agent_config(harness::AgentKind::kPfnTs, "pfn-ts"), t_max, reps, seed);
  const auto ps = mean_regret("Friedman", agent_config(harness::AgentKind::kPfnPs, "pfn-ps"), t_max, reps, seed);
  Outcome out;
  out.pass = ps.back() >= ts.back();
  out.detail = fmt2("PFN-PS %.2f vs PFN-TS %.2f", ps.back(), ts.back());
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
    double budget_s;  // runtime limit, 0 when none is set
  };
  const std::vector<Criterion> criteria{
      {1, "grid and weights exactness", grid_exactness, 1.0},
      {2, "SubCLT variance consistency", vhat_consistency, 120.0},
      {3, "coverage diagnostic", coverage, 180.0},
      {4, "Linear bandit sanity", linear_sanity, 300.0},
      {5, "CRPS correctness", crps_correctness, 0.0},
      {6, "adaptive encoding invariant", encoding_invariant, 0.0},
      {7, "OPE correctness", ope_correctness, 300.0},
      {8, "snapshot and prefix determinism", snapshot_determinism, 0.0},
      {9, "decision-rule ablation direction", ablation_direction, 0.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_s);
    }
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
