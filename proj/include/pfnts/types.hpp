#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pfnts {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Feature vector observed before an action. Fixed dimension within one run.
using Context = Vector;

// One bandit transition. `round` is 1-based and strictly increasing within a
// history.
struct Observation {
  Context context;
  std::size_t arm = 0;
  double reward = 0.0;
  std::size_t round = 0;
};

// A (features, target) row as seen by a predictive model.
struct Sample {
  Vector x;
  double y = 0.0;
};

// One logged decision for off-policy evaluation.
struct LoggedDecision {
  Context context;
  std::size_t action = 0;
  std::vector<double> propensity;  // logging policy over all K actions
  double reward = 0.0;
  std::int64_t cluster = 0;        // resampling unit, e.g. user id
};

}  // namespace pfnts
