#pragma once

#include <array>
#include <memory>
#include <vector>

#include "pfnts/agent.hpp"
#include "pfnts/encoding.hpp"
#include "pfnts/predictive_model.hpp"
#include "pfnts/subclt.hpp"

namespace pfnts {

enum class DecisionRule {
  kThompson,            // draw from the snapshot Gaussian N(m_s, V/s)
  kPredictiveSampling,  // draw a reward from the full-prefix predictive law
  kGreedy,              // full-prefix predictive mean
};

enum class EncodingMode { kAdaptive, kDisjoint, kOneHot };

struct PfnTsConfig {
  std::size_t arms = 2;
  std::size_t dim = 1;
  double base = 2.0;
  std::size_t warmup = 5;  // round-robin pulls per arm
  double v_floor = 1e-8;
  double v_fallback = 1.0;  // variance used while a history is below the first block
  std::vector<std::size_t> switch_times{64, 128, 256, 512, 1024, 2048};
  std::size_t k_threshold = 5;  // start one-hot when arms >= k_threshold
  EncodingMode encoding = EncodingMode::kAdaptive;
  DecisionRule rule = DecisionRule::kThompson;
};

// Thompson sampling on a sequential predictive model.
//
// Each encoding keeps its own models: one per arm (disjoint) or a single
// shared model queried at (x, e_k) (one-hot). Snapshots are stored at prefix 0
// and at every grid point as histories grow. In adaptive mode both encodings
// receive every observation until the last switch time; at each switch time
// the observations since the previous switch are scored by CRPS against the
// latest snapshot that precedes them, and the encoding with the lower running
// total becomes active (ties keep the incumbent). The challenger is dropped
// at the last switch time.
class PfnTsAgent final : public Agent {
 public:
  struct SwitchEvent {
    std::size_t round = 0;
    Encoding before = Encoding::kDisjoint;
    Encoding after = Encoding::kDisjoint;
    double disjoint_crps = 0.0;  // cumulative totals after scoring this interval
    double onehot_crps = 0.0;
    std::size_t scored = 0;
  };

  PfnTsAgent(PfnTsConfig config, ModelFactory factory);

  std::string name() const override;
  std::size_t num_arms() const override { return config_.arms; }
  std::size_t act(const Context& x, std::size_t t, Rng& rng) override;
  void update(const Context& x, std::size_t arm, double reward, std::size_t t) override;

  // Scores pending observations and possibly swaps roles. Called by update()
  // at switch times; exposed for tests.
  void crps_switch(std::size_t t);

  // SubCLT estimate for arm k under the active encoding, or nullopt while
  // the relevant history is below the first block.
  std::optional<SubCltEstimate> estimate(const Context& x, std::size_t arm);

  const PfnTsConfig& config() const noexcept { return config_; }
  Encoding active_encoding() const noexcept { return active_; }
  bool dual_caching() const noexcept { return dual_; }
  bool has_challenger() const noexcept { return state(other(active_)).live(); }
  double cumulative_crps(Encoding e) const { return state(e).crps; }
  std::size_t history_size(Encoding e, std::size_t arm) const;
  std::size_t pending() const noexcept { return pending_.size(); }
  const std::vector<SwitchEvent>& switch_log() const noexcept { return switch_log_; }
  PredictiveModel& model(Encoding e, std::size_t arm);

 private:
  struct EncodingState {
    Encoding encoding = Encoding::kDisjoint;
    std::vector<std::unique_ptr<PredictiveModel>> models;  // K or 1
    double crps = 0.0;

    bool live() const noexcept { return !models.empty(); }
    PredictiveModel& model_for(std::size_t arm) {
      return *models[encoding == Encoding::kDisjoint ? arm : 0];
    }
    const PredictiveModel& model_for(std::size_t arm) const {
      return *models[encoding == Encoding::kDisjoint ? arm : 0];
    }
  };

  struct PendingObservation {
    Context x;
    std::size_t arm = 0;
    double reward = 0.0;
    std::array<std::size_t, 2> prefix{};  // history size before append, per encoding
  };

  EncodingState& state(Encoding e) { return states_[static_cast<std::size_t>(e)]; }
  const EncodingState& state(Encoding e) const { return states_[static_cast<std::size_t>(e)]; }
  void build(Encoding e);
  Vector query(Encoding e, const Context& x, std::size_t arm) const;
  void append(Encoding e, const Context& x, std::size_t arm, double reward);
  double arm_value(const Context& x, std::size_t arm, Rng& rng);

  PfnTsConfig config_;
  ModelFactory factory_;
  std::array<EncodingState, 2> states_;
  Encoding active_ = Encoding::kDisjoint;
  bool dual_ = false;
  std::vector<PendingObservation> pending_;
  std::vector<SwitchEvent> switch_log_;
};

}  // namespace pfnts
