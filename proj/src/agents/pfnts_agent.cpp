#include "pfnts/pfnts_agent.hpp"

#include <algorithm>
#include <cmath>

#include "pfnts/distribution.hpp"
#include "pfnts/errors.hpp"

namespace pfnts {

PfnTsAgent::PfnTsAgent(PfnTsConfig config, ModelFactory factory)
    : config_(std::move(config)), factory_(std::move(factory)) {
  if (config_.arms == 0) throw ParamError("PFN-TS needs at least one arm");
  if (!(config_.base > 1.0)) throw ParamError("grid base must be > 1");
  if (!(config_.v_floor >= 0.0) || !(config_.v_fallback >= 0.0)) throw ParamError("variances must be >= 0");
  std::sort(config_.switch_times.begin(), config_.switch_times.end());
  config_.switch_times.erase(std::unique(config_.switch_times.begin(), config_.switch_times.end()),
                             config_.switch_times.end());
  states_[0].encoding = Encoding::kDisjoint;
  states_[1].encoding = Encoding::kOneHot;

  switch (config_.encoding) {
    case EncodingMode::kDisjoint:
      active_ = Encoding::kDisjoint;
      break;
    case EncodingMode::kOneHot:
      active_ = Encoding::kOneHot;
      break;
    case EncodingMode::kAdaptive:
      active_ = config_.arms < config_.k_threshold ? Encoding::kDisjoint : Encoding::kOneHot;
      dual_ = !config_.switch_times.empty();
      break;
  }
  build(active_);
  if (dual_) build(other(active_));
}

std::string PfnTsAgent::name() const {
  switch (config_.rule) {
    case DecisionRule::kPredictiveSampling:
      return "pfn-ps";
    case DecisionRule::kGreedy:
      return "pfn-greedy";
    default:
      return "pfn-ts";
  }
}

void PfnTsAgent::build(Encoding e) {
  auto& st = state(e);
  st.models.clear();
  st.crps = 0.0;
  const std::size_t count = e == Encoding::kDisjoint ? config_.arms : 1;
  const std::size_t dim = e == Encoding::kDisjoint ? config_.dim : config_.dim + config_.arms;
  for (std::size_t i = 0; i < count; ++i) {
    st.models.push_back(factory_(dim));
    st.models.back()->snapshot(0);
  }
}

Vector PfnTsAgent::query(Encoding e, const Context& x, std::size_t arm) const {
  if (e == Encoding::kDisjoint) return x;
  return encode_onehot(x, arm, config_.arms).values;
}

std::size_t PfnTsAgent::history_size(Encoding e, std::size_t arm) const {
  const auto& st = state(e);
  if (!st.live()) return 0;
  return st.model_for(arm).size();
}

PredictiveModel& PfnTsAgent::model(Encoding e, std::size_t arm) {
  auto& st = state(e);
  if (!st.live()) throw ParamError("encoding has no live models");
  return st.model_for(arm);
}

std::optional<SubCltEstimate> PfnTsAgent::estimate(const Context& x, std::size_t arm) {
  auto& m = state(active_).model_for(arm);
  const std::size_t n = m.size();
  if (n < min_grid_history(config_.base)) return std::nullopt;
  return subclt_estimate(m, n, query(active_, x, arm), config_.base);
}

double PfnTsAgent::arm_value(const Context& x, std::size_t arm, Rng& rng) {
  auto& m = state(active_).model_for(arm);
  const Vector q = query(active_, x, arm);
  const std::size_t n = m.size();
  switch (config_.rule) {
    case DecisionRule::kGreedy:
      return m.predict_mean(q, n);
    case DecisionRule::kPredictiveSampling:
      return sample_from(m.predict_dist(q, n), rng);
    case DecisionRule::kThompson:
      break;
  }
  if (n < min_grid_history(config_.base)) {
    return rng.normal(m.predict_mean(q, n), std::sqrt(config_.v_fallback));
  }
  return thompson_draw(subclt_estimate(m, n, q, config_.base), config_.v_floor, rng);
}

std::size_t PfnTsAgent::act(const Context& x, std::size_t t, Rng& rng) {
  if (t == 0) throw ParamError("rounds are 1-based");
  if (t <= config_.warmup * config_.arms) return (t - 1) % config_.arms;
  std::vector<double> values(config_.arms);
  for (std::size_t k = 0; k < config_.arms; ++k) values[k] = arm_value(x, k, rng);
  return argmax_random_tie(values, rng);
}

void PfnTsAgent::append(Encoding e, const Context& x, std::size_t arm, double reward) {
  auto& m = state(e).model_for(arm);
  m.fit_append(Sample{query(e, x, arm), reward});
  if (is_grid_point(m.size(), config_.base)) m.snapshot(m.size());
}

void PfnTsAgent::update(const Context& x, std::size_t arm, double reward, std::size_t t) {
  if (arm >= config_.arms) throw ArmIndexError("arm out of range");
  if (dual_) {
    PendingObservation obs{x, arm, reward, {}};
    for (Encoding e : {Encoding::kDisjoint, Encoding::kOneHot}) {
      obs.prefix[static_cast<std::size_t>(e)] = state(e).model_for(arm).size();
    }
    pending_.push_back(std::move(obs));
  }
  append(active_, x, arm, reward);
  if (dual_) append(other(active_), x, arm, reward);

  if (dual_ && std::binary_search(config_.switch_times.begin(), config_.switch_times.end(), t)) {
    crps_switch(t);
  }
}

void PfnTsAgent::crps_switch(std::size_t t) {
  if (!dual_) return;
  for (Encoding e : {Encoding::kDisjoint, Encoding::kOneHot}) {
    auto& st = state(e);
    double interval_score = 0.0;
    for (const auto& obs : pending_) {
      auto& m = st.model_for(obs.arm);
      // Prefix 0 is always cached, so a snapshot is always found.
      const auto snap = m.latest_snapshot_at_most(obs.prefix[static_cast<std::size_t>(e)]);
      interval_score += crps(snap->predict_dist(query(e, obs.x, obs.arm)), obs.reward);
    }
    st.crps += interval_score;
  }

  SwitchEvent event;
  event.round = t;
  event.before = active_;
  event.scored = pending_.size();
  pending_.clear();
  if (state(other(active_)).crps < state(active_).crps) active_ = other(active_);
  event.after = active_;
  event.disjoint_crps = state(Encoding::kDisjoint).crps;
  event.onehot_crps = state(Encoding::kOneHot).crps;
  switch_log_.push_back(event);

  if (t >= config_.switch_times.back()) {
    dual_ = false;
    state(other(active_)).models.clear();
  }
}

}  // namespace pfnts
