#pragma once

#include <vector>

#include "pfnts/agent.hpp"

namespace pfnts {

// Per-arm ridge statistics A = lambda I + X'X, b = X'r, with a cached
// Cholesky factor of A refreshed on every update.
class RidgeArmState {
 public:
  RidgeArmState(std::size_t dim, double lambda);

  void add(const Vector& x, double r);
  const Matrix& design() const noexcept { return a_; }
  const Vector& response() const noexcept { return b_; }
  const Vector& mean() const noexcept { return mean_; }  // A^{-1} b
  double quad_inverse(const Vector& x) const;              // x' A^{-1} x
  // mean + scale * L^{-T} z with A = L L', i.e. a draw from N(mean, scale^2 A^{-1}).
  Vector sample(double scale, Rng& rng) const;
  std::size_t count() const noexcept { return count_; }

 private:
  void refresh();

  Matrix a_;
  Vector b_;
  Vector mean_;
  Eigen::LLT<Matrix> llt_;
  std::size_t count_ = 0;
};

// Linear Thompson sampling: beta_k ~ N(A_k^{-1} b_k, nu^2 sigma^2 A_k^{-1}) with
// sigma^2 = 1, play argmax x' beta_k.
class LinTsAgent final : public Agent {
 public:
  LinTsAgent(std::size_t arms, std::size_t dim, double nu = 1.0, double lambda = 1.0);

  std::string name() const override { return "lints"; }
  std::size_t num_arms() const override { return arms_.size(); }
  std::size_t act(const Context& x, std::size_t t, Rng& rng) override;
  void update(const Context& x, std::size_t arm, double reward, std::size_t t) override;
  const RidgeArmState& arm(std::size_t k) const { return arms_.at(k); }
  double nu() const noexcept { return nu_; }

 private:
  std::vector<RidgeArmState> arms_;
  double nu_;
};

// LinUCB: argmax x' A_k^{-1} b_k + alpha sqrt(x' A_k^{-1} x).
class LinUcbAgent final : public Agent {
 public:
  LinUcbAgent(std::size_t arms, std::size_t dim, double alpha = 1.0, double lambda = 1.0);

  std::string name() const override { return "linucb"; }
  std::size_t num_arms() const override { return arms_.size(); }
  std::size_t act(const Context& x, std::size_t t, Rng& rng) override;
  void update(const Context& x, std::size_t arm, double reward, std::size_t t) override;
  std::vector<double> scores(const Context& x) const;
  const RidgeArmState& arm(std::size_t k) const { return arms_.at(k); }

 private:
  std::vector<RidgeArmState> arms_;
  double alpha_;
};

}  // namespace pfnts
