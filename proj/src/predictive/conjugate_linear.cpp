#include "pfnts/conjugate_linear.hpp"

#include <string>

#include "pfnts/errors.hpp"

namespace pfnts {

ConjugateLinearModel::ConjugateLinearModel(std::size_t dim, Params params)
    : dim_(dim), params_(params) {
  if (!(params.prior_precision > 0.0)) throw ParamError("prior precision must be positive");
  if (!(params.noise_variance > 0.0)) throw ParamError("noise variance must be positive");
}

ConjugateLinearModel::State::State(std::size_t dim, const Params& params)
    : params_(params),
      xtx_(Matrix::Zero(dim, dim)),
      xty_(Vector::Zero(dim)),
      mean_(Vector::Zero(dim)),
      cov_(Matrix::Identity(dim, dim) / params.prior_precision) {}

void ConjugateLinearModel::State::extend(std::span<const Sample> rows) {
  // Accumulated row by row in arrival order so that any chain of extensions
  // reproduces the from-scratch sums bit for bit.
  for (const auto& row : rows) {
    xtx_.noalias() += row.x * row.x.transpose();
    xty_.noalias() += row.y * row.x;
  }
}

void ConjugateLinearModel::State::finalize() {
  const auto d = xtx_.rows();
  Matrix precision = xtx_ / params_.noise_variance;
  precision.diagonal().array() += params_.prior_precision;
  Eigen::LLT<Matrix> llt(precision);
  cov_ = llt.solve(Matrix::Identity(d, d));
  cov_ = 0.5 * (cov_ + cov_.transpose());
  mean_ = llt.solve(xty_ / params_.noise_variance);
}

PredictiveDistribution ConjugateLinearModel::State::predict_dist(const Vector& query) const {
  return GaussianDist{predict_mean(query), posterior_var(query) + params_.noise_variance};
}

std::shared_ptr<const SnapshotState> ConjugateLinearModel::build_state(
    std::size_t prefix, const SnapshotState* base, std::size_t base_prefix) {
  auto state = std::make_shared<State>(dim_, params_);
  std::size_t from = 0;
  if (const auto* typed = dynamic_cast<const State*>(base)) {
    state->xtx_ = typed->xtx_;
    state->xty_ = typed->xty_;
    from = base_prefix;
  }
  state->extend(std::span<const Sample>(rows()).subspan(from, prefix - from));
  state->finalize();
  return state;
}

const ConjugateLinearModel::State& ConjugateLinearModel::typed_state(std::size_t prefix) {
  // snapshot() caches, which is what callers asking for posterior quantities
  // at a prefix usually want anyway.
  return static_cast<const State&>(snapshot(prefix).state());
}

double ConjugateLinearModel::posterior_var(const Vector& query, std::size_t prefix) {
  return typed_state(prefix).posterior_var(query);
}

Vector ConjugateLinearModel::posterior_mean(std::size_t prefix) { return typed_state(prefix).mean(); }

Matrix ConjugateLinearModel::posterior_cov(std::size_t prefix) { return typed_state(prefix).cov(); }

double blr_predict_mean(ConjugateLinearModel& model, const Vector& query, std::size_t prefix) {
  return model.predict_mean(query, prefix);
}

double blr_posterior_var(ConjugateLinearModel& model, const Vector& query, std::size_t prefix) {
  return model.posterior_var(query, prefix);
}

namespace {

class BetaBernoulliState final : public SnapshotState {
 public:
  BetaBernoulliState(double a, double b, std::size_t successes, std::size_t total)
      : a_(a), b_(b), successes_(successes), total_(total) {}

  double predict_mean(const Vector&) const override {
    return (a_ + static_cast<double>(successes_)) / (a_ + b_ + static_cast<double>(total_));
  }

  // Bernoulli law as two unit-width bins at 0 and 1; the binned CRPS of this
  // PMF equals the exact CRPS of the Bernoulli forecast.
  PredictiveDistribution predict_dist(const Vector& q) const override {
    const double p = predict_mean(q);
    return BinnedPmf{{0.0, 1.0}, {1.0, 1.0}, {1.0 - p, p}};
  }

  std::size_t successes() const noexcept { return successes_; }

 private:
  double a_;
  double b_;
  std::size_t successes_;
  std::size_t total_;
};

}  // namespace

BetaBernoulliModel::BetaBernoulliModel(double prior_a, double prior_b)
    : prior_a_(prior_a), prior_b_(prior_b) {
  if (!(prior_a > 0.0 && prior_b > 0.0)) throw ParamError("Beta prior counts must be positive");
}

void BetaBernoulliModel::validate_sample(const Sample& sample) const {
  if (sample.y != 0.0 && sample.y != 1.0) throw ParamError("Beta-Bernoulli targets must be 0 or 1");
}

std::shared_ptr<const SnapshotState> BetaBernoulliModel::build_state(std::size_t prefix,
                                                                     const SnapshotState* base,
                                                                     std::size_t base_prefix) {
  std::size_t successes = 0;
  std::size_t from = 0;
  if (const auto* typed = dynamic_cast<const BetaBernoulliState*>(base)) {
    successes = typed->successes();
    from = base_prefix;
  }
  for (std::size_t i = from; i < prefix; ++i) successes += rows()[i].y == 1.0 ? 1 : 0;
  return std::make_shared<BetaBernoulliState>(prior_a_, prior_b_, successes, prefix);
}

double beta_bernoulli_mean(BetaBernoulliModel& model, std::size_t prefix) {
  return model.predict_mean(Vector(), prefix);
}

}  // namespace pfnts
