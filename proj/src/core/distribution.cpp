#include "pfnts/distribution.hpp"

#include <cmath>
#include <numbers>

#include "pfnts/errors.hpp"
#include "pfnts/normal.hpp"

namespace pfnts {

void BinnedPmf::validate() const {
  const std::size_t n = midpoints.size();
  if (n == 0) throw DistributionError("binned PMF has no bins");
  if (widths.size() != n || probs.size() != n) {
    throw DistributionError("binned PMF arrays differ in length");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(midpoints[j])) throw DistributionError("non-finite bin midpoint");
    if (j > 0 && !(midpoints[j] > midpoints[j - 1])) {
      throw DistributionError("bin midpoints must be strictly increasing");
    }
    if (!(widths[j] > 0.0) || !std::isfinite(widths[j])) {
      throw DistributionError("bin widths must be positive");
    }
    if (!(probs[j] >= 0.0) || !std::isfinite(probs[j])) {
      throw DistributionError("bin probabilities must be nonnegative");
    }
    total += probs[j];
  }
  if (std::abs(total - 1.0) > 1e-9) throw DistributionError("bin probabilities must sum to 1");
}

double BinnedPmf::mean() const {
  double m = 0.0;
  for (std::size_t j = 0; j < midpoints.size(); ++j) m += midpoints[j] * probs[j];
  return m;
}

double mean_of(const PredictiveDistribution& dist) {
  if (const auto* g = std::get_if<GaussianDist>(&dist)) return g->mean;
  return std::get<BinnedPmf>(dist).mean();
}

double sample_from(const PredictiveDistribution& dist, Rng& rng) {
  if (const auto* g = std::get_if<GaussianDist>(&dist)) {
    return rng.normal(g->mean, std::sqrt(g->variance));
  }
  const auto& pmf = std::get<BinnedPmf>(dist);
  return pmf.midpoints[rng.categorical(pmf.probs)];
}

double crps_binned(const BinnedPmf& pmf, double r) {
  pmf.validate();
  double cdf = 0.0;
  double score = 0.0;
  for (std::size_t j = 0; j < pmf.midpoints.size(); ++j) {
    cdf += pmf.probs[j];
    const double diff = cdf - (pmf.midpoints[j] >= r ? 1.0 : 0.0);
    score += diff * diff * pmf.widths[j];
  }
  return score;
}

double crps_gaussian(double mean, double variance, double r) {
  if (!(variance >= 0.0)) throw DistributionError("Gaussian variance must be nonnegative");
  if (variance == 0.0) return std::abs(r - mean);
  const double sigma = std::sqrt(variance);
  const double z = (r - mean) / sigma;
  return sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) -
                  1.0 / std::sqrt(std::numbers::pi));
}

double crps(const PredictiveDistribution& dist, double r) {
  if (const auto* g = std::get_if<GaussianDist>(&dist)) return crps_gaussian(g->mean, g->variance, r);
  return crps_binned(std::get<BinnedPmf>(dist), r);
}

}  // namespace pfnts
