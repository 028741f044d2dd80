#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pfnts/random.hpp"
#include "pfnts/types.hpp"

namespace pfnts {

// A contextual bandit policy.
//
// act() proposes an arm for round t and must leave the learning state
// unchanged (internal caches may fill), so it can be called repeatedly to
// estimate the policy's action distribution. All randomness comes from the
// caller's stream.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string name() const = 0;
  virtual std::size_t num_arms() const = 0;

  virtual std::size_t act(const Context& x, std::size_t t, Rng& rng) = 0;
  virtual void update(const Context& x, std::size_t arm, double reward, std::size_t t) = 0;

  // Exact pi(. | x) when the policy can report it; nullopt otherwise.
  virtual std::optional<std::vector<double>> action_probabilities(const Context&, std::size_t) {
    return std::nullopt;
  }
};

class UniformAgent final : public Agent {
 public:
  explicit UniformAgent(std::size_t arms) : arms_(arms) {}

  std::string name() const override { return "uniform"; }
  std::size_t num_arms() const override { return arms_; }
  std::size_t act(const Context&, std::size_t, Rng& rng) override { return rng.uniform_index(arms_); }
  void update(const Context&, std::size_t, double, std::size_t) override {}
  std::optional<std::vector<double>> action_probabilities(const Context&, std::size_t) override {
    return std::vector<double>(arms_, 1.0 / static_cast<double>(arms_));
  }

 private:
  std::size_t arms_;
};

// Plays the arm with the highest true mean. `means(x, t)` supplies f0.
class OracleAgent final : public Agent {
 public:
  using MeanFn = std::function<std::vector<double>(const Context&, std::size_t)>;

  OracleAgent(std::size_t arms, MeanFn means) : arms_(arms), means_(std::move(means)) {}

  std::string name() const override { return "oracle"; }
  std::size_t num_arms() const override { return arms_; }
  std::size_t act(const Context& x, std::size_t t, Rng& rng) override;
  void update(const Context&, std::size_t, double, std::size_t) override {}

 private:
  std::size_t arms_;
  MeanFn means_;
};

// A non-learning stochastic policy with known probabilities.
class FixedPolicyAgent final : public Agent {
 public:
  using PolicyFn = std::function<std::vector<double>(const Context&)>;

  FixedPolicyAgent(std::size_t arms, PolicyFn policy, std::string name = "fixed")
      : arms_(arms), policy_(std::move(policy)), name_(std::move(name)) {}

  std::string name() const override { return name_; }
  std::size_t num_arms() const override { return arms_; }
  std::size_t act(const Context& x, std::size_t, Rng& rng) override { return rng.categorical(policy_(x)); }
  void update(const Context&, std::size_t, double, std::size_t) override {}
  std::optional<std::vector<double>> action_probabilities(const Context& x, std::size_t) override {
    return policy_(x);
  }

 private:
  std::size_t arms_;
  PolicyFn policy_;
  std::string name_;
};

}  // namespace pfnts
