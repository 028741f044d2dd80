#pragma once

#include "pfnts/predictive_model.hpp"

namespace pfnts {

// Bayesian linear regression with known noise variance:
//   beta ~ N(0, I / prior_precision),  y | x, beta ~ N(x'beta, noise_variance).
// The posterior over f(x) = x'beta is exactly Gaussian at every prefix, and the
// sequence of predictive means is a martingale under the model's own prior.
class ConjugateLinearModel final : public PredictiveModel {
 public:
  struct Params {
    double prior_precision = 1.0;
    double noise_variance = 1.0;
  };

  ConjugateLinearModel(std::size_t dim, Params params);

  std::size_t dim() const override { return dim_; }
  const Params& params() const noexcept { return params_; }

  // q' Sigma_n q, the posterior variance of f(q) given the first `prefix` rows.
  double posterior_var(const Vector& query, std::size_t prefix);
  Vector posterior_mean(std::size_t prefix);
  Matrix posterior_cov(std::size_t prefix);

  class State;

 protected:
  std::shared_ptr<const SnapshotState> build_state(std::size_t prefix, const SnapshotState* base,
                                                   std::size_t base_prefix) override;

 private:
  const State& typed_state(std::size_t prefix);

  std::size_t dim_;
  Params params_;
};

class ConjugateLinearModel::State final : public SnapshotState {
 public:
  State(std::size_t dim, const Params& params);

  double predict_mean(const Vector& query) const override { return query.dot(mean_); }
  PredictiveDistribution predict_dist(const Vector& query) const override;
  double posterior_var(const Vector& query) const { return query.dot(cov_ * query); }

  const Vector& mean() const noexcept { return mean_; }
  const Matrix& cov() const noexcept { return cov_; }

 private:
  friend class ConjugateLinearModel;
  void extend(std::span<const Sample> rows);
  void finalize();

  Params params_;
  Matrix xtx_;
  Vector xty_;
  Vector mean_;
  Matrix cov_;
};

double blr_predict_mean(ConjugateLinearModel& model, const Vector& query, std::size_t prefix);
double blr_posterior_var(ConjugateLinearModel& model, const Vector& query, std::size_t prefix);

// Context-free Beta-Bernoulli model for binary rewards. Queries are ignored.
class BetaBernoulliModel final : public PredictiveModel {
 public:
  BetaBernoulliModel(double prior_a = 1.0, double prior_b = 1.0);

  std::size_t dim() const override { return 0; }
  double prior_a() const noexcept { return prior_a_; }
  double prior_b() const noexcept { return prior_b_; }

 protected:
  std::shared_ptr<const SnapshotState> build_state(std::size_t prefix, const SnapshotState* base,
                                                   std::size_t base_prefix) override;
  void validate_sample(const Sample& sample) const override;

 private:
  double prior_a_;
  double prior_b_;
};

// (a0 + successes) / (a0 + b0 + prefix)
double beta_bernoulli_mean(BetaBernoulliModel& model, std::size_t prefix);

}  // namespace pfnts
