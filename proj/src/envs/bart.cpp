#include "pfnts/bart.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "pfnts/errors.hpp"

namespace pfnts::envs {

double BartPriorSpec::leaf_sd() const { return 0.5 / (kappa * std::sqrt(static_cast<double>(trees))); }

double RegressionTree::evaluate(const Vector& x) const {
  if (nodes_.empty()) return 0.0;
  int i = 0;
  while (nodes_[i].var >= 0) {
    const auto& n = nodes_[i];
    i = x(n.var) < n.threshold ? n.left : n.right;
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::split_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.var >= 0; }));
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::function<std::size_t(int)> rec = [&](int i) -> std::size_t {
    if (nodes_[i].var < 0) return 0;
    return 1 + std::max(rec(nodes_[i].left), rec(nodes_[i].right));
  };
  return rec(0);
}

double BartFunction::operator()(const Vector& x) const {
  double s = 0.0;
  for (const auto& t : trees_) s += t.evaluate(x);
  return s;
}

std::size_t BartFunction::total_splits() const {
  std::size_t s = 0;
  for (const auto& t : trees_) s += t.split_count();
  return s;
}

RegressionTree sample_bart_tree(const BartPriorSpec& spec, std::span<const double> split_probs, Rng& rng) {
  if (split_probs.size() != spec.dim) throw ParamError("split probabilities must have one entry per feature");
  if (!(spec.split_alpha > 0.0 && spec.split_alpha < 1.0)) throw ParamError("split alpha must lie in (0, 1)");
  std::vector<TreeNode> nodes;
  std::vector<double> lo(spec.dim, 0.0);
  std::vector<double> hi(spec.dim, 1.0);
  const double leaf_sd = spec.leaf_sd();

  // Depth-first; children are appended after their parent.
  std::function<int(std::size_t)> grow = [&](std::size_t depth) -> int {
    const int index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const double p_split = std::pow(spec.split_alpha, static_cast<double>(depth + 1));
    if (!rng.bernoulli(p_split)) {
      nodes[index].value = rng.normal(0.0, leaf_sd);
      return index;
    }
    const std::size_t var = rng.categorical(split_probs);
    const double threshold = rng.uniform(lo[var], hi[var]);
    nodes[index].var = static_cast<int>(var);
    nodes[index].threshold = threshold;

    const double saved_hi = hi[var];
    hi[var] = threshold;
    const int left = grow(depth + 1);
    hi[var] = saved_hi;

    const double saved_lo = lo[var];
    lo[var] = threshold;
    const int right = grow(depth + 1);
    lo[var] = saved_lo;

    nodes[index].left = left;
    nodes[index].right = right;
    return index;
  };
  grow(0);
  return RegressionTree(std::move(nodes));
}

BartFunction sample_bart_function(const BartPriorSpec& spec, std::span<const double> split_probs, Rng& rng) {
  std::vector<RegressionTree> trees;
  trees.reserve(spec.trees);
  for (std::size_t i = 0; i < spec.trees; ++i) trees.push_back(sample_bart_tree(spec, split_probs, rng));
  return BartFunction(std::move(trees));
}

BartFunction sample_bart_function(const BartPriorSpec& spec, Rng& rng) {
  const auto probs = rng.dirichlet(spec.dim, spec.dirichlet_concentration);
  return sample_bart_function(spec, probs, rng);
}

}  // namespace pfnts::envs
