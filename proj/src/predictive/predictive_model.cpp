#include "pfnts/predictive_model.hpp"

#include <cmath>
#include <string>

#include "pfnts/errors.hpp"

namespace pfnts {

void PredictiveModel::validate_sample(const Sample& sample) const {
  if (dim() != 0 && static_cast<std::size_t>(sample.x.size()) != dim()) {
    throw ParamError("sample has dimension " + std::to_string(sample.x.size()) +
                     ", model expects " + std::to_string(dim()));
  }
  if (!std::isfinite(sample.y)) throw ParamError("non-finite target");
}

void PredictiveModel::fit_append(std::span<const Sample> samples) {
  for (const auto& s : samples) validate_sample(s);
  rows_.insert(rows_.end(), samples.begin(), samples.end());
}

std::optional<SnapshotHandle> PredictiveModel::latest_snapshot_at_most(std::size_t prefix) const {
  auto it = cache_.upper_bound(prefix);
  if (it == cache_.begin()) return std::nullopt;
  --it;
  return SnapshotHandle(it->first, it->second);
}

std::shared_ptr<const SnapshotState> PredictiveModel::state_at(std::size_t prefix) {
  if (prefix > rows_.size()) {
    throw PrefixError("prefix " + std::to_string(prefix) + " exceeds history size " +
                      std::to_string(rows_.size()));
  }
  if (auto it = cache_.find(prefix); it != cache_.end()) return it->second;
  if (tail_ && tail_prefix_ == prefix) return tail_;

  const SnapshotState* base = nullptr;
  std::size_t base_prefix = 0;
  if (auto it = cache_.upper_bound(prefix); it != cache_.begin()) {
    --it;
    base = it->second.get();
    base_prefix = it->first;
  }
  if (tail_ && tail_prefix_ < prefix && tail_prefix_ >= base_prefix) {
    base = tail_.get();
    base_prefix = tail_prefix_;
  }
  auto state = build_state(prefix, base, base_prefix);
  tail_ = state;
  tail_prefix_ = prefix;
  return state;
}

double PredictiveModel::predict_mean(const Vector& query, std::size_t prefix) {
  return state_at(prefix)->predict_mean(query);
}

PredictiveDistribution PredictiveModel::predict_dist(const Vector& query, std::size_t prefix) {
  return state_at(prefix)->predict_dist(query);
}

SnapshotHandle PredictiveModel::snapshot(std::size_t prefix) {
  auto state = state_at(prefix);
  cache_.emplace(prefix, state);
  return SnapshotHandle(prefix, std::move(state));
}

}  // namespace pfnts
