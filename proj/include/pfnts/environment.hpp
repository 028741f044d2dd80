#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pfnts/types.hpp"

namespace pfnts {

// A reward-generating environment indexed by 1-based round. Everything a
// round produces is a pure function of (environment seed, round, arm), so
// agents facing the same environment see the same contexts and, when they
// pick the same arm, the same noise.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t num_arms() const = 0;
  virtual std::size_t dim() const = 0;
  // Largest playable round; synthetic environments are unbounded.
  virtual std::size_t horizon_limit() const { return static_cast<std::size_t>(-1); }

  virtual Context context(std::size_t t) = 0;
  // True mean reward f0(X_t, a) for every arm.
  virtual std::vector<double> arm_means(std::size_t t) = 0;
  virtual double reward(std::size_t t, std::size_t arm) = 0;
};

}  // namespace pfnts
