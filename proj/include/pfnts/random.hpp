#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pfnts {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// 64-bit FNV-1a over the UTF-8 bytes of `label`.
std::uint64_t hash64(std::string_view label) noexcept;

// A reproducible position in the seed tree. The root carries the global seed;
// every child is mixed from its parent's state with splitmix64, so the same
// (global seed, path) produces the same stream on every platform.
struct SeedSpec {
  struct Step {
    std::string label;
    std::uint64_t index = 0;
    bool operator==(const Step&) const = default;
  };

  std::uint64_t global = 0;
  std::vector<Step> path;
  std::uint64_t state = 0;

  static SeedSpec root(std::uint64_t global_seed) { return {global_seed, {}, global_seed}; }

  SeedSpec child(std::string_view label, std::uint64_t index) const;

  bool operator==(const SeedSpec&) const = default;
};

// state' = splitmix64(state ^ hash64(label) ^ (index + 1))
SeedSpec derive_seed(const SeedSpec& spec, std::string_view label, std::uint64_t index);

// Random stream backed by mt19937_64 with Boost.Random distributions, which
// (unlike <random> distributions) have a fixed algorithm on every standard
// library.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  explicit Rng(const SeedSpec& spec) : engine_(spec.state) {}

  double uniform();                          // [0, 1)
  double uniform(double lo, double hi);      // [lo, hi)
  double normal(double mean = 0.0, double sd = 1.0);
  double gamma(double shape);                // unit scale
  bool bernoulli(double p);
  std::size_t uniform_index(std::size_t n);  // {0, ..., n-1}
  std::size_t categorical(std::span<const double> probs);
  std::vector<double> dirichlet(std::size_t dim, double concentration);

  engine_type& engine() noexcept { return engine_; }

 private:
  engine_type engine_;
};

// Stateless standard normal keyed by a 64-bit counter (Box-Muller on two
// splitmix64 outputs). Used where draws must not depend on consumption order.
double counter_normal(std::uint64_t key) noexcept;
double counter_uniform(std::uint64_t key) noexcept;

// Index of the maximum; ties broken uniformly at random. The stream is only
// consumed when there is more than one maximizer.
std::size_t argmax_random_tie(std::span<const double> values, Rng& rng);

}  // namespace pfnts
