#include "pfnts/linear_agents.hpp"

#include <cmath>

#include "pfnts/errors.hpp"

namespace pfnts {

std::size_t OracleAgent::act(const Context& x, std::size_t t, Rng& rng) {
  const auto means = means_(x, t);
  return argmax_random_tie(means, rng);
}

RidgeArmState::RidgeArmState(std::size_t dim, double lambda)
    : a_(Matrix::Identity(dim, dim) * lambda), b_(Vector::Zero(dim)) {
  if (!(lambda > 0.0)) throw ParamError("ridge penalty must be positive");
  refresh();
}

void RidgeArmState::refresh() {
  llt_.compute(a_);
  mean_ = llt_.solve(b_);
}

void RidgeArmState::add(const Vector& x, double r) {
  a_.noalias() += x * x.transpose();
  b_.noalias() += r * x;
  ++count_;
  refresh();
}

double RidgeArmState::quad_inverse(const Vector& x) const {
  const Vector y = llt_.matrixL().solve(x);
  return y.squaredNorm();
}

Vector RidgeArmState::sample(double scale, Rng& rng) const {
  Vector z(mean_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  if (scale == 0.0) return mean_;
  return mean_ + scale * llt_.matrixU().solve(z);
}

LinTsAgent::LinTsAgent(std::size_t arms, std::size_t dim, double nu, double lambda)
    : arms_(arms, RidgeArmState(dim, lambda)), nu_(nu) {
  if (!(nu >= 0.0)) throw ParamError("LinTS exploration must be nonnegative");
}

std::size_t LinTsAgent::act(const Context& x, std::size_t, Rng& rng) {
  std::vector<double> values(arms_.size());
  for (std::size_t k = 0; k < arms_.size(); ++k) values[k] = x.dot(arms_[k].sample(nu_, rng));
  return argmax_random_tie(values, rng);
}

void LinTsAgent::update(const Context& x, std::size_t arm, double reward, std::size_t) {
  if (arm >= arms_.size()) throw ArmIndexError("arm out of range");
  arms_[arm].add(x, reward);
}

LinUcbAgent::LinUcbAgent(std::size_t arms, std::size_t dim, double alpha, double lambda)
    : arms_(arms, RidgeArmState(dim, lambda)), alpha_(alpha) {}

std::vector<double> LinUcbAgent::scores(const Context& x) const {
  std::vector<double> out(arms_.size());
  for (std::size_t k = 0; k < arms_.size(); ++k) {
    out[k] = x.dot(arms_[k].mean()) + alpha_ * std::sqrt(arms_[k].quad_inverse(x));
  }
  return out;
}

std::size_t LinUcbAgent::act(const Context& x, std::size_t, Rng& rng) {
  return argmax_random_tie(scores(x), rng);
}

void LinUcbAgent::update(const Context& x, std::size_t arm, double reward, std::size_t) {
  if (arm >= arms_.size()) throw ArmIndexError("arm out of range");
  arms_[arm].add(x, reward);
}

}  // namespace pfnts
