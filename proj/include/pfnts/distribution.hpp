#pragma once

#include <variant>
#include <vector>

#include "pfnts/random.hpp"

namespace pfnts {

// Predictive law over a discretized response: bin midpoints (strictly
// increasing), bin widths (positive) and probabilities summing to one.
struct BinnedPmf {
  std::vector<double> midpoints;
  std::vector<double> widths;
  std::vector<double> probs;

  // Throws DistributionError when any invariant is violated.
  void validate() const;
  double mean() const;
};

struct GaussianDist {
  double mean = 0.0;
  double variance = 0.0;
};

using PredictiveDistribution = std::variant<BinnedPmf, GaussianDist>;

double mean_of(const PredictiveDistribution& dist);

// Draw one response from the predictive law. Binned laws return a midpoint.
double sample_from(const PredictiveDistribution& dist, Rng& rng);

// Sum over bins of (F(y_j) - 1{y_j >= r})^2 * width_j with F the cumulative
// bin probability. Exact CRPS of the step CDF that the bins define.
double crps_binned(const BinnedPmf& pmf, double r);

// Closed-form CRPS of N(mean, variance); |r - mean| for a point mass.
double crps_gaussian(double mean, double variance, double r);

double crps(const PredictiveDistribution& dist, double r);

}  // namespace pfnts
