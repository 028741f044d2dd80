#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "pfnts/random.hpp"
#include "pfnts/types.hpp"

namespace pfnts::envs {

// Synthetic engagement model standing in for a micro-randomized trial:
//   P(R = 1 | user u, day d, arm a)
//     = sigmoid(intercept_a + slope_a' c_u + day_effect_a * d / days + eta_u)
// with static user covariates c_u ~ U[0,1]^q and user effects
// eta_u ~ N(0, user_sd^2).
struct EngagementDgp {
  std::size_t arms = 3;
  std::size_t covariates = 2;
  double user_sd = 0.5;
  std::vector<double> intercept;
  std::vector<Vector> slope;
  std::vector<double> day_effect;

  static EngagementDgp sample(Rng& rng, std::size_t arms = 3, std::size_t covariates = 2);

  double mean(const Vector& covariates_of_user, double day_fraction, double user_effect,
              std::size_t arm) const;
};

struct LoggedDataset {
  std::size_t num_arms = 0;
  std::vector<LoggedDecision> decisions;
  // Bernoulli means of every arm at each decision (ground truth for tests).
  std::vector<std::vector<double>> true_means;
};

// Decisions are ordered day-major: all users on day 1, then day 2, ...
// Context layout: [user covariates, day / days, one-hot user id (optional)].
// Cluster id is the user index.
LoggedDataset generate_logged_data(const EngagementDgp& dgp, std::span<const double> propensities,
                                   std::size_t n_users, std::size_t days, Rng& rng,
                                   bool user_onehot = true);

// Logged-data CSV: cluster_id, t, x0..x{p-1}, action, propensity_0..propensity_{K-1}, reward
void write_logged_csv(const std::filesystem::path& path, std::span<const LoggedDecision> log);
std::vector<LoggedDecision> read_logged_csv(const std::filesystem::path& path);

}  // namespace pfnts::envs
