#include "pfnts/random.hpp"

#include <cmath>
#include <numbers>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "pfnts/errors.hpp"

namespace pfnts {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash64(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SeedSpec SeedSpec::child(std::string_view label, std::uint64_t index) const {
  return derive_seed(*this, label, index);
}

SeedSpec derive_seed(const SeedSpec& spec, std::string_view label, std::uint64_t index) {
  SeedSpec out = spec;
  out.path.push_back({std::string(label), index});
  out.state = splitmix64(spec.state ^ hash64(label) ^ (index + 1));
  return out;
}

double Rng::uniform() { return boost::random::uniform_01<double>()(engine_); }

double Rng::uniform(double lo, double hi) {
  return boost::random::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal(double mean, double sd) {
  if (sd == 0.0) return mean;
  return boost::random::normal_distribution<double>(mean, sd)(engine_);
}

double Rng::gamma(double shape) {
  return boost::random::gamma_distribution<double>(shape, 1.0)(engine_);
}

bool Rng::bernoulli(double p) {
  return boost::random::bernoulli_distribution<double>(p)(engine_);
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw ParamError("uniform_index: empty range");
  return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

std::size_t Rng::categorical(std::span<const double> probs) {
  if (probs.empty()) throw ParamError("categorical: empty probability vector");
  double total = 0.0;
  for (double p : probs) total += p;
  const double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding can leave u == total; return the last index with positive mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

std::vector<double> Rng::dirichlet(std::size_t dim, double concentration) {
  std::vector<double> out(dim);
  double total = 0.0;
  for (auto& v : out) {
    v = gamma(concentration);
    total += v;
  }
  for (auto& v : out) v /= total;
  return out;
}

double counter_uniform(std::uint64_t key) noexcept {
  // 53 high bits -> (0, 1); the half-ulp offset keeps log() finite.
  return (static_cast<double>(splitmix64(key) >> 11) + 0.5) * 0x1.0p-53;
}

double counter_normal(std::uint64_t key) noexcept {
  const double u1 = counter_uniform(key);
  const double u2 = counter_uniform(key ^ 0xd1b54a32d192ed03ULL);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t argmax_random_tie(std::span<const double> values, Rng& rng) {
  if (values.empty()) throw ParamError("argmax over empty set");
  double best = values[0];
  std::size_t count = 1;
  std::size_t first = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > best) {
      best = values[i];
      first = i;
      count = 1;
    } else if (values[i] == best) {
      ++count;
    }
  }
  if (count == 1) return first;
  std::size_t pick = rng.uniform_index(count);
  for (std::size_t i = first; i < values.size(); ++i) {
    if (values[i] == best) {
      if (pick == 0) return i;
      --pick;
    }
  }
  return first;
}

}  // namespace pfnts
