#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "pfnts/predictive_model.hpp"
#include "pfnts/random.hpp"

namespace pfnts {

// Prefix sizes 2 = t_0 < t_1 < ... < t_J <= n with
// t_{j+1} = max(t_j + 1, floor(base * t_j)) and the next point exceeding n.
struct GeometricGrid {
  double base = 2.0;
  std::vector<std::size_t> points;

  std::size_t blocks() const noexcept { return points.empty() ? 0 : points.size() - 1; }
  std::size_t last() const { return points.back(); }
};

// Successor of t under the grid iteration.
std::size_t next_grid_point(std::size_t t, double base);

// True when `prefix` lies on the infinite grid 2, next(2), next(next(2)), ...
bool is_grid_point(std::size_t prefix, double base);

// Smallest history size for which the grid has at least one block.
std::size_t min_grid_history(double base);

// Throws ParamError for base <= 1 and GridTooShort when fewer than two points
// fit below n.
GeometricGrid geometric_grid(std::size_t n, double base);

// w_j = t_j t_{j-1} / (t_j - t_{j-1}), j = 1..J
std::vector<double> block_weights(const GeometricGrid& grid);

struct SubCltEstimate {
  double mean = 0.0;        // snapshot mean m_{t_J}(x)
  double vhat = 0.0;        // (1/J) sum_j w_j D_j^2
  std::size_t refresh = 0;  // s = t_J
  GeometricGrid grid;
};

// Estimator from predictive means already evaluated at every grid point.
SubCltEstimate subclt_from_means(const GeometricGrid& grid, std::span<const double> means);

// Evaluates m(query; D_{1:t_j}) in increasing order of t_j, storing a snapshot
// at each grid point in the model's cache.
SubCltEstimate subclt_estimate(PredictiveModel& model, std::size_t n, const Vector& query,
                               double base);

// One draw from N(mean, max(vhat, v_floor) / s).
double thompson_draw(const SubCltEstimate& est, double v_floor, Rng& rng);

double sampling_variance(const SubCltEstimate& est, double v_floor);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
  bool contains(double v) const noexcept { return lo <= v && v <= hi; }
};

// mean +/- z_{(1+level)/2} sqrt(max(vhat, v_floor) / s). ParamError unless
// 0 < level < 1.
Interval interval(const SubCltEstimate& est, double level, double v_floor);

}  // namespace pfnts
