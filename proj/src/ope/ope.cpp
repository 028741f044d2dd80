#include "pfnts/ope.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "pfnts/errors.hpp"

namespace pfnts::ope {

namespace {

void check_aligned(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log) {
  if (trace.size() != log.size()) throw ParamError("policy trace and log differ in length");
}

// Linear-interpolation quantile of sorted data (type 7).
double quantile_sorted(const std::vector<double>& v, double p) {
  if (v.empty()) return 0.0;
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

void validate_log(std::span<const LoggedDecision> log) {
  if (log.empty()) return;
  const std::size_t k = log.front().propensity.size();
  if (k == 0) throw SchemaError("logged decision without propensities");
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& d = log[i];
    const std::string where = "decision " + std::to_string(i + 1) + ": ";
    if (d.propensity.size() != k) throw SchemaError(where + "propensity vector length differs");
    double total = 0.0;
    for (double p : d.propensity) {
      if (!(p >= 0.0)) throw SchemaError(where + "propensities must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw SchemaError(where + "propensities must sum to 1");
    if (d.action >= k) throw SchemaError(where + "action out of range");
    if (!(d.propensity[d.action] > 0.0)) throw SchemaError(where + "logged action has zero propensity");
    if (!std::isfinite(d.reward)) throw SchemaError(where + "non-finite reward");
  }
}

PolicyTrace replay_run(Agent& agent, std::span<const LoggedDecision> log, const ReplayOptions& options,
                       Rng& rng) {
  if (options.draws == 0) throw ParamError("replay needs at least one draw per decision");
  validate_log(log);
  const std::size_t k = agent.num_arms();
  PolicyTrace trace;
  trace.reserve(log.size());
  std::size_t round = 1;
  for (const auto& d : log) {
    if (d.propensity.size() != k) throw SchemaError("log and agent disagree on the number of arms");
    PolicyStep step;
    if (auto exact = agent.action_probabilities(d.context, round)) {
      step.probs = std::move(*exact);
    } else {
      step.probs.assign(k, 0.0);
      for (std::size_t m = 0; m < options.draws; ++m) step.probs[agent.act(d.context, round, rng)] += 1.0;
      for (auto& p : step.probs) p /= static_cast<double>(options.draws);
    }
    step.proposal = agent.act(d.context, round, rng);
    step.matched = step.proposal == d.action;
    if (step.matched) {
      agent.update(d.context, d.action, d.reward, round);
      ++round;
    }
    trace.push_back(std::move(step));
  }
  return trace;
}

std::vector<double> importance_weights(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log) {
  check_aligned(trace, log);
  std::vector<double> w(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    w[i] = trace[i].probs.at(log[i].action) / log[i].propensity.at(log[i].action);
  }
  return w;
}

double snips(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log) {
  const auto w = importance_weights(trace, log);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += w[i] * log[i].reward;
    den += w[i];
  }
  if (!(den > 0.0)) throw DegenerateWeights("all importance weights are zero");
  return num / den;
}

double dr_with_outcome(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log,
                       const OutcomeModel& q) {
  check_aligned(trace, log);
  if (log.empty()) throw EmptyLog("doubly robust estimate of an empty log");
  double total = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& d = log[i];
    const auto& pi = trace[i].probs;
    double direct = 0.0;
    for (std::size_t a = 0; a < pi.size(); ++a) {
      if (pi[a] != 0.0) direct += pi[a] * q(d.context, a);
    }
    const double w = pi.at(d.action) / d.propensity.at(d.action);
    total += direct + w * (d.reward - q(d.context, d.action));
  }
  return total / static_cast<double>(log.size());
}

namespace {

struct ArmRidge {
  bool fitted = false;
  Vector coef;
};

Vector with_intercept(const Context& x) {
  Vector z(x.size() + 1);
  z(0) = 1.0;
  z.tail(x.size()) = x;
  return z;
}

}  // namespace

double dr_estimate(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log,
                   const DrOptions& options, Rng& rng) {
  check_aligned(trace, log);
  if (log.empty()) throw EmptyLog("doubly robust estimate of an empty log");
  if (options.folds < 2) throw ParamError("cross-fitting needs at least two folds");

  std::vector<std::int64_t> clusters;
  {
    std::unordered_map<std::int64_t, bool> seen;
    for (const auto& d : log) {
      if (seen.emplace(d.cluster, true).second) clusters.push_back(d.cluster);
    }
  }
  if (clusters.size() < options.folds) throw ParamError("fewer clusters than cross-fitting folds");
  for (std::size_t i = clusters.size(); i > 1; --i) std::swap(clusters[i - 1], clusters[rng.uniform_index(i)]);
  std::unordered_map<std::int64_t, std::size_t> fold_of;
  for (std::size_t i = 0; i < clusters.size(); ++i) fold_of[clusters[i]] = i % options.folds;

  const std::size_t k = log.front().propensity.size();
  const auto p = log.front().context.size() + 1;
  double total = 0.0;
  for (std::size_t f = 0; f < options.folds; ++f) {
    // Slopes are shrunk, the intercept is not.
    Matrix penalty = Matrix::Identity(p, p) * options.ridge;
    penalty(0, 0) = 0.0;
    std::vector<Matrix> gram(k, penalty);
    std::vector<Vector> rhs(k, Vector::Zero(p));
    std::vector<std::size_t> counts(k, 0);
    double reward_sum = 0.0;
    std::size_t train_n = 0;
    for (const auto& d : log) {
      if (fold_of[d.cluster] == f) continue;
      const Vector z = with_intercept(d.context);
      gram[d.action].noalias() += z * z.transpose();
      rhs[d.action].noalias() += d.reward * z;
      ++counts[d.action];
      reward_sum += d.reward;
      ++train_n;
    }
    const double fallback = train_n > 0 ? reward_sum / static_cast<double>(train_n) : 0.0;
    std::vector<ArmRidge> models(k);
    for (std::size_t a = 0; a < k; ++a) {
      if (counts[a] == 0) continue;
      models[a].fitted = true;
      models[a].coef = gram[a].llt().solve(rhs[a]);
    }
    const OutcomeModel q = [&](const Context& x, std::size_t a) {
      return models[a].fitted ? with_intercept(x).dot(models[a].coef) : fallback;
    };
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (fold_of[log[i].cluster] != f) continue;
      total += dr_with_outcome(trace.subspan(i, 1), log.subspan(i, 1), q);
    }
  }
  return total / static_cast<double>(log.size());
}

Estimator snips_estimator() {
  return [](std::span<const LoggedDecision> log, std::span<const PolicyStep> trace, Rng&) {
    return snips(trace, log);
  };
}

Estimator dr_estimator(DrOptions options) {
  return [options](std::span<const LoggedDecision> log, std::span<const PolicyStep> trace, Rng& rng) {
    return dr_estimate(trace, log, options, rng);
  };
}

BootstrapResult cluster_bootstrap(std::span<const LoggedDecision> log, std::span<const PolicyStep> trace,
                                  const Estimator& estimator, std::size_t replicates, Rng& rng) {
  check_aligned(trace, log);
  std::vector<std::int64_t> clusters;
  std::map<std::int64_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < log.size(); ++i) {
    auto& m = members[log[i].cluster];
    if (m.empty()) clusters.push_back(log[i].cluster);
    m.push_back(i);
  }
  if (clusters.size() < 2) throw ClusterError("cluster bootstrap needs at least two clusters");

  const SeedSpec base = SeedSpec::root(rng.engine()());
  BootstrapResult result;
  {
    Rng point_rng(base.child("point", 0));
    result.point = estimator(log, trace, point_rng);
  }
  result.replicates = replicates;
  result.values.reserve(replicates);
  for (std::size_t b = 0; b < replicates; ++b) {
    Rng brng(base.child("replicate", b));
    std::vector<LoggedDecision> sample_log;
    std::vector<PolicyStep> sample_trace;
    sample_log.reserve(log.size());
    sample_trace.reserve(log.size());
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const auto picked = clusters[brng.uniform_index(clusters.size())];
      for (std::size_t i : members[picked]) {
        sample_log.push_back(log[i]);
        sample_log.back().cluster = static_cast<std::int64_t>(c);
        sample_trace.push_back(trace[i]);
      }
    }
    result.values.push_back(estimator(sample_log, sample_trace, brng));
  }
  if (!result.values.empty()) {
    auto sorted = result.values;
    std::sort(sorted.begin(), sorted.end());
    result.lo = quantile_sorted(sorted, 0.025);
    result.hi = quantile_sorted(sorted, 0.975);
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    result.se = sorted.size() > 1 ? std::sqrt(ss / static_cast<double>(sorted.size() - 1)) : 0.0;
  }
  return result;
}

WeightSummary weight_summary(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log,
                             std::size_t bins) {
  if (bins == 0) throw ParamError("histogram needs at least one bin");
  const auto w = importance_weights(trace, log);
  WeightSummary s;
  double min_prop = 1.0;
  for (const auto& d : log) {
    for (double p : d.propensity) {
      if (p > 0.0) min_prop = std::min(min_prop, p);
    }
  }
  s.bound = 1.0 / min_prop;

  double lo = std::numeric_limits<double>::infinity();
  for (double v : w) {
    s.max_weight = std::max(s.max_weight, v);
    if (v > 0.0) {
      lo = std::min(lo, std::log10(v));
    } else {
      ++s.zero_weights;
    }
  }
  if (s.max_weight > s.bound + 1e-9) {
    throw Error("importance weight " + std::to_string(s.max_weight) + " exceeds 1/min propensity " +
                std::to_string(s.bound));
  }
  if (!std::isfinite(lo)) return s;
  double hi = std::log10(s.max_weight);
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  s.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    s.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
  }
  s.counts.assign(bins, 0);
  for (double v : w) {
    if (v <= 0.0) continue;
    auto b = static_cast<std::size_t>((std::log10(v) - lo) / (hi - lo) * static_cast<double>(bins));
    ++s.counts[std::min(b, bins - 1)];
  }
  return s;
}

void write_weight_histogram_csv(std::ostream& out, const WeightSummary& s) {
  out << "log10_lo,log10_hi,count\n" << std::setprecision(17);
  for (std::size_t b = 0; b < s.counts.size(); ++b) {
    out << s.bin_edges[b] << ',' << s.bin_edges[b + 1] << ',' << s.counts[b] << '\n';
  }
}

std::vector<std::pair<std::size_t, double>> horizon_curve(std::span<const LoggedDecision> log,
                                                          std::span<const PolicyStep> trace,
                                                          const Estimator& estimator,
                                                          std::span<const std::size_t> horizons, Rng& rng) {
  check_aligned(trace, log);
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t t : horizons) {
    const std::size_t n = std::min(t, log.size());
    if (n == 0) continue;
    out.emplace_back(n, estimator(log.first(n), trace.first(n), rng));
  }
  return out;
}

nlohmann::json ope_report(const std::string& estimator, const BootstrapResult& boot, double max_weight,
                          std::size_t n, const std::vector<std::pair<std::size_t, double>>& curve) {
  nlohmann::json j;
  j["estimator"] = estimator;
  j["point"] = boot.point;
  j["ci_lo"] = boot.lo;
  j["ci_hi"] = boot.hi;
  j["B"] = boot.replicates;
  j["max_weight"] = max_weight;
  j["n"] = n;
  auto arr = nlohmann::json::array();
  for (const auto& [t, v] : curve) arr.push_back({t, v});
  j["horizon_curve"] = std::move(arr);
  return j;
}

}  // namespace pfnts::ope
