#include "pfnts/subclt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfnts/errors.hpp"
#include "pfnts/normal.hpp"

namespace pfnts {

namespace {

void check_base(double base) {
  if (!(base > 1.0) || !std::isfinite(base)) throw ParamError("grid base must be > 1");
}

}  // namespace

std::size_t next_grid_point(std::size_t t, double base) {
  const auto scaled = static_cast<std::size_t>(std::floor(base * static_cast<double>(t)));
  return std::max(t + 1, scaled);
}

bool is_grid_point(std::size_t prefix, double base) {
  check_base(base);
  std::size_t t = 2;
  while (t < prefix) t = next_grid_point(t, base);
  return t == prefix;
}

std::size_t min_grid_history(double base) {
  check_base(base);
  return next_grid_point(2, base);
}

GeometricGrid geometric_grid(std::size_t n, double base) {
  check_base(base);
  GeometricGrid grid;
  grid.base = base;
  if (n < 2) throw GridTooShort("history of size " + std::to_string(n) + " has no grid point");
  for (std::size_t t = 2; t <= n; t = next_grid_point(t, base)) grid.points.push_back(t);
  if (grid.points.size() < 2) {
    throw GridTooShort("history of size " + std::to_string(n) + " yields fewer than two grid points");
  }
  return grid;
}

std::vector<double> block_weights(const GeometricGrid& grid) {
  std::vector<double> w;
  w.reserve(grid.blocks());
  for (std::size_t j = 1; j < grid.points.size(); ++j) {
    const auto cur = static_cast<double>(grid.points[j]);
    const auto prev = static_cast<double>(grid.points[j - 1]);
    w.push_back(cur * prev / (cur - prev));
  }
  return w;
}

SubCltEstimate subclt_from_means(const GeometricGrid& grid, std::span<const double> means) {
  if (means.size() != grid.points.size() || grid.points.size() < 2) {
    throw ParamError("subclt: need one predictive mean per grid point");
  }
  const auto weights = block_weights(grid);
  double acc = 0.0;
  for (std::size_t j = 1; j < means.size(); ++j) {
    const double d = means[j] - means[j - 1];
    acc += weights[j - 1] * d * d;
  }
  SubCltEstimate est;
  est.mean = means.back();
  est.vhat = acc / static_cast<double>(grid.blocks());
  est.refresh = grid.last();
  est.grid = grid;
  return est;
}

SubCltEstimate subclt_estimate(PredictiveModel& model, std::size_t n, const Vector& query,
                               double base) {
  if (n > model.size()) {
    throw PrefixError("subclt: history size " + std::to_string(n) + " exceeds model size " +
                      std::to_string(model.size()));
  }
  const auto grid = geometric_grid(n, base);
  std::vector<double> means;
  means.reserve(grid.points.size());
  for (std::size_t t : grid.points) means.push_back(model.snapshot(t).predict_mean(query));
  return subclt_from_means(grid, means);
}

double sampling_variance(const SubCltEstimate& est, double v_floor) {
  return std::max(est.vhat, v_floor) / static_cast<double>(est.refresh);
}

double thompson_draw(const SubCltEstimate& est, double v_floor, Rng& rng) {
  return rng.normal(est.mean, std::sqrt(sampling_variance(est, v_floor)));
}

Interval interval(const SubCltEstimate& est, double level, double v_floor) {
  if (!(level > 0.0 && level < 1.0)) throw ParamError("interval level must lie in (0, 1)");
  const double half = normal_quantile(0.5 * (1.0 + level)) * std::sqrt(sampling_variance(est, v_floor));
  return {est.mean - half, est.mean + half};
}

}  // namespace pfnts
