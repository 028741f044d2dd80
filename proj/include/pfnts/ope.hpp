#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pfnts/agent.hpp"
#include "pfnts/random.hpp"
#include "pfnts/types.hpp"

namespace pfnts::ope {

// Target-policy record for one logged decision.
struct PolicyStep {
  std::vector<double> probs;  // estimated pi(. | x_t), sums to 1
  std::size_t proposal = 0;
  bool matched = false;
};

using PolicyTrace = std::vector<PolicyStep>;

// Throws SchemaError unless every decision has a valid action with positive
// propensity, a nonnegative propensity vector of common length summing to 1,
// and a finite reward.
void validate_log(std::span<const LoggedDecision> log);

struct ReplayOptions {
  std::size_t draws = 100;  // Monte Carlo draws per decision for pi(. | x)
};

// Replay simulation: at each logged step, estimate pi(. | x_t) from the
// agent's current (pre-update) state, draw a proposal, and feed the logged
// outcome back only when the proposal matches the logged action. The agent's
// round counter advances with matched updates only. Agents that report exact
// action probabilities skip the Monte Carlo estimate.
PolicyTrace replay_run(Agent& agent, std::span<const LoggedDecision> log, const ReplayOptions& options,
                       Rng& rng);

// w_t = pi(A_t | X_t) / pi_0(A_t)
std::vector<double> importance_weights(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log);

// sum_t w_t R_t / sum_t w_t; DegenerateWeights when every weight is zero.
double snips(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log);

// Outcome model q(x, a).
using OutcomeModel = std::function<double(const Context&, std::size_t)>;

// (1/n) sum_i [ sum_a pi(a|x_i) q(x_i, a) + w_i (r_i - q(x_i, a_i)) ]
double dr_with_outcome(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log,
                       const OutcomeModel& q);

struct DrOptions {
  double ridge = 1.0;
  std::size_t folds = 2;
};

// Doubly robust estimate with cross-fitting: clusters are split into folds
// at random, and each fold is scored with per-arm ridge outcome models (with
// intercept) fit on the remaining folds. An arm absent from the training
// folds predicts their mean reward. EmptyLog for an empty log.
double dr_estimate(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log,
                   const DrOptions& options, Rng& rng);

using Estimator =
    std::function<double(std::span<const LoggedDecision>, std::span<const PolicyStep>, Rng&)>;

Estimator snips_estimator();
Estimator dr_estimator(DrOptions options = {});

struct BootstrapResult {
  double point = 0.0;
  double lo = 0.0;  // 2.5% percentile of the replicates
  double hi = 0.0;  // 97.5% percentile
  double se = 0.0;  // SD of the replicates
  std::size_t replicates = 0;
  std::vector<double> values;
};

// Resamples whole clusters with replacement. Duplicated clusters are
// relabelled so cross-fitting treats each copy as its own cluster. Replicate
// b draws from a stream derived from (rng, b). ClusterError with fewer than
// two clusters.
BootstrapResult cluster_bootstrap(std::span<const LoggedDecision> log, std::span<const PolicyStep> trace,
                                  const Estimator& estimator, std::size_t replicates, Rng& rng);

struct WeightSummary {
  std::vector<double> bin_edges;  // log10(w) edges, size = counts.size() + 1
  std::vector<std::size_t> counts;
  std::size_t zero_weights = 0;
  double max_weight = 0.0;
  double bound = 0.0;  // 1 / smallest positive pi_0(a)
};

// Histogram of positive weights on a log10 scale. Throws Error if a weight
// exceeds the bound by more than 1e-9.
WeightSummary weight_summary(std::span<const PolicyStep> trace, std::span<const LoggedDecision> log,
                             std::size_t bins = 20);

void write_weight_histogram_csv(std::ostream& out, const WeightSummary& summary);

// Estimator applied to the first t decisions for each t in `horizons`.
std::vector<std::pair<std::size_t, double>> horizon_curve(std::span<const LoggedDecision> log,
                                                          std::span<const PolicyStep> trace,
                                                          const Estimator& estimator,
                                                          std::span<const std::size_t> horizons, Rng& rng);

// {estimator, point, ci_lo, ci_hi, B, max_weight, n, horizon_curve: [[t, v], ...]}
nlohmann::json ope_report(const std::string& estimator, const BootstrapResult& boot, double max_weight,
                          std::size_t n, const std::vector<std::pair<std::size_t, double>>& curve);

}  // namespace pfnts::ope
