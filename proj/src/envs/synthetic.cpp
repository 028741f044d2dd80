#include "pfnts/synthetic.hpp"

#include <algorithm>

#include "pfnts/errors.hpp"

namespace pfnts::envs {

namespace {

DgpSpec friedman(std::string name, DgpKind kind, Arm2Variant variant, std::size_t dim) {
  DgpSpec s;
  s.name = std::move(name);
  s.kind = kind;
  s.variant = variant;
  s.dim = dim;
  s.arms = 2;
  s.noise_variance = 1.0;
  return s;
}

}  // namespace

DgpSpec scenario_spec(std::string_view name) {
  if (name == "Linear") return DgpSpec{};
  if (name == "Friedman") return friedman("Friedman", DgpKind::kFriedman1, Arm2Variant::kShared, 5);
  if (name == "Friedman2") return friedman("Friedman2", DgpKind::kFriedman2, Arm2Variant::kShared, 5);
  if (name == "Friedman3") return friedman("Friedman3", DgpKind::kFriedman3, Arm2Variant::kShared, 5);
  if (name == "Friedman-Disjoint") {
    return friedman("Friedman-Disjoint", DgpKind::kFriedman1, Arm2Variant::kDisjoint, 5);
  }
  if (name == "Friedman-Sparse") {
    return friedman("Friedman-Sparse", DgpKind::kFriedman1, Arm2Variant::kShared, 20);
  }
  if (name == "Friedman-Sparse-Disjoint") {
    return friedman("Friedman-Sparse-Disjoint", DgpKind::kFriedman1, Arm2Variant::kDisjoint, 20);
  }
  if (name == "Friedman-Heteroscedastic") {
    auto s = friedman("Friedman-Heteroscedastic", DgpKind::kFriedman1, Arm2Variant::kShared, 5);
    s.heteroscedastic = true;
    return s;
  }
  if (name == "SynBART") {
    DgpSpec s;
    s.name = "SynBART";
    s.kind = DgpKind::kSynBart;
    s.dim = s.bart.dim;
    s.arms = s.bart.arms;
    s.noise_variance = s.bart.noise_variance;
    return s;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

std::vector<std::string> scenario_names() {
  return {"Linear",          "Friedman",        "Friedman2",
          "Friedman3",       "Friedman-Disjoint", "Friedman-Sparse",
          "Friedman-Sparse-Disjoint", "Friedman-Heteroscedastic", "SynBART"};
}

std::vector<Vector> sample_linear_coefficients(Rng& rng, std::size_t dim, std::size_t arms) {
  std::vector<Vector> beta(arms, Vector(dim));
  for (auto& b : beta) {
    for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = rng.normal();
  }
  return beta;
}

std::vector<double> hetero_noise(Rng& rng, std::size_t arms) {
  std::vector<double> out(arms);
  for (auto& v : out) v = hetero_variance(rng.uniform(-1.0, 1.0));
  return out;
}

SyntheticDgp::SyntheticDgp(DgpSpec spec, const SeedSpec& seed)
    : spec_(std::move(spec)),
      context_key_(seed.child("context", 0).state),
      noise_key_(seed.child("noise", 0).state) {
  if (spec_.arms == 0) throw ParamError("environment needs at least one arm");
  const bool friedman_family = spec_.kind == DgpKind::kFriedman1 || spec_.kind == DgpKind::kFriedman2 ||
                               spec_.kind == DgpKind::kFriedman3;
  if (friedman_family) {
    if (spec_.arms != 2) throw ParamError("Friedman scenarios have exactly two arms");
    if (spec_.dim < 5) throw ParamError("Friedman scenarios need P >= 5");
  }
  if (spec_.kind == DgpKind::kSynBart) {
    spec_.bart.dim = spec_.dim;
    spec_.bart.arms = spec_.arms;
  }

  Rng rng(seed.child("params", 0));
  switch (spec_.kind) {
    case DgpKind::kLinear:
      beta_ = sample_linear_coefficients(rng, spec_.dim, spec_.arms);
      break;
    case DgpKind::kSynBart: {
      const auto probs = rng.dirichlet(spec_.dim, spec_.bart.dirichlet_concentration);
      for (std::size_t a = 0; a < spec_.arms; ++a) bart_.push_back(sample_bart_function(spec_.bart, probs, rng));
      break;
    }
    default:
      break;
  }
  noise_var_ = spec_.heteroscedastic ? hetero_noise(rng, spec_.arms)
                                     : std::vector<double>(spec_.arms, spec_.noise_variance);
}

Context SyntheticDgp::context(std::size_t t) {
  const std::uint64_t round_key = splitmix64(context_key_ ^ (t + 1));
  Context x(spec_.dim);
  for (std::size_t j = 0; j < spec_.dim; ++j) {
    x(static_cast<Eigen::Index>(j)) = counter_uniform(round_key + 0x9e3779b97f4a7c15ULL * (j + 1));
  }
  return x;
}

Context SyntheticDgp::sample_context(Rng& rng) const {
  Context x(spec_.dim);
  for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = rng.uniform();
  return x;
}

double SyntheticDgp::mean(const Context& x, std::size_t arm) const {
  if (arm >= spec_.arms) throw ArmIndexError("arm out of range");
  switch (spec_.kind) {
    case DgpKind::kLinear:
      return beta_[arm].dot(x);
    case DgpKind::kSynBart:
      return bart_[arm](x);
    case DgpKind::kFriedman1:
    case DgpKind::kFriedman2:
    case DgpKind::kFriedman3: {
      const auto xs = as_span(x);
      if (arm == 1) return arm2_mean(spec_.variant, xs);
      if (spec_.kind == DgpKind::kFriedman2) return friedman2(xs);
      if (spec_.kind == DgpKind::kFriedman3) return friedman3(xs);
      return friedman1(xs);
    }
  }
  return 0.0;
}

std::vector<double> SyntheticDgp::arm_means(std::size_t t) {
  const auto x = context(t);
  std::vector<double> out(spec_.arms);
  for (std::size_t a = 0; a < spec_.arms; ++a) out[a] = mean(x, a);
  return out;
}

double SyntheticDgp::reward(std::size_t t, std::size_t arm) {
  const auto x = context(t);
  const std::uint64_t key = splitmix64(noise_key_ ^ (t + 1)) + 0x9e3779b97f4a7c15ULL * (arm + 1);
  return mean(x, arm) + std::sqrt(noise_var_[arm]) * counter_normal(key);
}

std::size_t SyntheticDgp::oracle_arm(const Context& x) const {
  std::size_t best = 0;
  for (std::size_t a = 1; a < spec_.arms; ++a) {
    if (mean(x, a) > mean(x, best)) best = a;
  }
  return best;
}

SyntheticDgp sample_linear_dgp(const SeedSpec& seed, std::size_t dim, std::size_t arms) {
  DgpSpec spec;
  spec.dim = dim;
  spec.arms = arms;
  return SyntheticDgp(spec, seed);
}

}  // namespace pfnts::envs
