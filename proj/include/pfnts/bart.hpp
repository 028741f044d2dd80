#pragma once

#include <cstddef>
#include <vector>

#include "pfnts/random.hpp"
#include "pfnts/types.hpp"

namespace pfnts::envs {

// Prior used to draw SynBART mean functions.
//   - a node at depth d splits with probability split_alpha^(d+1)
//   - split variables follow one Dirichlet(c,...,c)-drawn probability vector
//     per replication (c = 1: flat)
//   - thresholds are uniform on the node's admissible interval
//   - leaves are N(0, sigma_mu^2) with sigma_mu = 0.5 / (kappa sqrt(trees))
struct BartPriorSpec {
  std::size_t trees = 100;
  double split_alpha = 0.45;
  double kappa = 2.0;
  double dirichlet_concentration = 1.0;
  double noise_variance = 0.01;
  std::size_t dim = 4;
  std::size_t arms = 3;

  double leaf_sd() const;
};

struct TreeNode {
  int var = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;
  int left = -1;
  int right = -1;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  // x[var] < threshold goes left.
  double evaluate(const Vector& x) const;
  std::size_t split_count() const;
  std::size_t depth() const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

// Sum-of-trees mean function.
class BartFunction {
 public:
  BartFunction() = default;
  explicit BartFunction(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {}

  double operator()(const Vector& x) const;
  std::size_t total_splits() const;
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

 private:
  std::vector<RegressionTree> trees_;
};

RegressionTree sample_bart_tree(const BartPriorSpec& spec, std::span<const double> split_probs, Rng& rng);

BartFunction sample_bart_function(const BartPriorSpec& spec, std::span<const double> split_probs, Rng& rng);

// Draws the split-variable probabilities and then the function.
BartFunction sample_bart_function(const BartPriorSpec& spec, Rng& rng);

}  // namespace pfnts::envs
