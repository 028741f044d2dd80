#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pfnts/distribution.hpp"
#include "pfnts/types.hpp"

namespace pfnts {

// Model state conditioned on a fixed dataset prefix.
class SnapshotState {
 public:
  virtual ~SnapshotState() = default;
  virtual double predict_mean(const Vector& query) const = 0;
  virtual PredictiveDistribution predict_dist(const Vector& query) const = 0;
};

// Cheap re-prediction at a stored prefix. Predictions through a handle are
// bit-identical to predictions made by the owning model at the same prefix.
class SnapshotHandle {
 public:
  SnapshotHandle(std::size_t prefix, std::shared_ptr<const SnapshotState> state)
      : prefix_(prefix), state_(std::move(state)) {}

  std::size_t prefix() const noexcept { return prefix_; }
  double predict_mean(const Vector& query) const { return state_->predict_mean(query); }
  PredictiveDistribution predict_dist(const Vector& query) const {
    return state_->predict_dist(query);
  }
  const SnapshotState& state() const noexcept { return *state_; }

 private:
  std::size_t prefix_;
  std::shared_ptr<const SnapshotState> state_;
};

// A sequential predictive model: m_i(x) = m(x; D_{1:i}) for any prefix i of
// the observations appended so far, in arrival order.
//
// Contract: predictions at (query, prefix) depend only on the first `prefix`
// rows and the query, so appending data never changes them. Subclasses build
// snapshot states, optionally extending the nearest cached state below the
// requested prefix. Snapshots are never evicted; memory grows as
// O(#snapshots x state size).
class PredictiveModel {
 public:
  virtual ~PredictiveModel() = default;

  PredictiveModel() = default;
  PredictiveModel(const PredictiveModel&) = delete;
  PredictiveModel& operator=(const PredictiveModel&) = delete;

  // Feature dimension expected from queries and rows; 0 means context-free.
  virtual std::size_t dim() const = 0;

  std::size_t size() const noexcept { return rows_.size(); }
  const std::vector<Sample>& rows() const noexcept { return rows_; }

  void fit_append(std::span<const Sample> samples);
  void fit_append(const Sample& sample) { fit_append(std::span<const Sample>(&sample, 1)); }

  // Throws PrefixError if prefix > size().
  double predict_mean(const Vector& query, std::size_t prefix);
  PredictiveDistribution predict_dist(const Vector& query, std::size_t prefix);

  // Creates (or returns) the cached snapshot at `prefix`.
  SnapshotHandle snapshot(std::size_t prefix);
  bool has_snapshot(std::size_t prefix) const { return cache_.count(prefix) != 0; }
  // Largest cached snapshot with prefix <= `prefix`, if any.
  std::optional<SnapshotHandle> latest_snapshot_at_most(std::size_t prefix) const;
  std::size_t snapshot_count() const noexcept { return cache_.size(); }

 protected:
  // Build the state at `prefix`. `base`, when non-null, is a state at
  // `base_prefix` < `prefix` that may be extended with rows
  // [base_prefix, prefix). Results must not depend on which base was used.
  virtual std::shared_ptr<const SnapshotState> build_state(std::size_t prefix,
                                                           const SnapshotState* base,
                                                           std::size_t base_prefix) = 0;

  virtual void validate_sample(const Sample& sample) const;

 private:
  std::shared_ptr<const SnapshotState> state_at(std::size_t prefix);

  std::vector<Sample> rows_;
  std::map<std::size_t, std::shared_ptr<const SnapshotState>> cache_;
  // Most recent uncached state, kept so repeated full-prefix queries are cheap.
  std::size_t tail_prefix_ = 0;
  std::shared_ptr<const SnapshotState> tail_;
};

using ModelFactory = std::function<std::unique_ptr<PredictiveModel>(std::size_t dim)>;

}  // namespace pfnts
