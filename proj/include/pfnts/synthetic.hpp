#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pfnts/bart.hpp"
#include "pfnts/environment.hpp"
#include "pfnts/friedman.hpp"
#include "pfnts/random.hpp"

namespace pfnts::envs {

enum class DgpKind { kLinear, kFriedman1, kFriedman2, kFriedman3, kSynBart };

struct DgpSpec {
  std::string name = "Linear";
  DgpKind kind = DgpKind::kLinear;
  Arm2Variant variant = Arm2Variant::kShared;  // Friedman family only
  std::size_t dim = 10;
  std::size_t arms = 3;
  double noise_variance = 1.0;
  bool heteroscedastic = false;  // per-arm 10^U, U ~ Unif(-1, 1)
  BartPriorSpec bart;
};

// Built-in scenarios: Linear, Friedman, Friedman2, Friedman3, Friedman-Disjoint,
// Friedman-Sparse, Friedman-Sparse-Disjoint, Friedman-Heteroscedastic, SynBART.
// Throws ConfigError for unknown names.
DgpSpec scenario_spec(std::string_view name);
std::vector<std::string> scenario_names();

// Per-arm coefficient vectors with iid N(0, 1) entries.
std::vector<Vector> sample_linear_coefficients(Rng& rng, std::size_t dim, std::size_t arms);

// sigma_a^2 = 10^{U_a}, U_a ~ Unif(-1, 1), one per arm.
std::vector<double> hetero_noise(Rng& rng, std::size_t arms);
inline double hetero_variance(double u) { return std::pow(10.0, u); }

// Synthetic contextual bandit with iid Uniform[0,1]^P contexts. Parameters
// are drawn once from seed.child("params", 0); contexts and noise are
// counter-based in (round) and (round, arm).
class SyntheticDgp final : public Environment {
 public:
  SyntheticDgp(DgpSpec spec, const SeedSpec& seed);

  std::string name() const override { return spec_.name; }
  std::size_t num_arms() const override { return spec_.arms; }
  std::size_t dim() const override { return spec_.dim; }

  Context context(std::size_t t) override;
  std::vector<double> arm_means(std::size_t t) override;
  double reward(std::size_t t, std::size_t arm) override;

  // f0(x, a)
  double mean(const Context& x, std::size_t arm) const;
  double noise_variance(std::size_t arm) const { return noise_var_[arm]; }
  std::size_t oracle_arm(const Context& x) const;

  const DgpSpec& spec() const noexcept { return spec_; }
  const std::vector<Vector>& linear_coefficients() const noexcept { return beta_; }
  const std::vector<BartFunction>& bart_functions() const noexcept { return bart_; }

  // Fresh iid draw not tied to the round stream (offline diagnostics).
  Context sample_context(Rng& rng) const;

 private:
  DgpSpec spec_;
  std::uint64_t context_key_;
  std::uint64_t noise_key_;
  std::vector<double> noise_var_;
  std::vector<Vector> beta_;
  std::vector<BartFunction> bart_;
};

SyntheticDgp sample_linear_dgp(const SeedSpec& seed, std::size_t dim = 10, std::size_t arms = 3);

}  // namespace pfnts::envs
