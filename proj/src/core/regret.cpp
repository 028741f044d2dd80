#include "pfnts/regret.hpp"

#include <algorithm>

#include "pfnts/errors.hpp"

namespace pfnts {

std::vector<double> cumulative_regret(std::span<const std::vector<double>> true_means,
                                      std::span<const std::size_t> actions) {
  if (true_means.size() != actions.size()) {
    throw ParamError("cumulative_regret: means and actions differ in length");
  }
  std::vector<double> out;
  out.reserve(actions.size());
  double total = 0.0;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const auto& row = true_means[t];
    if (actions[t] >= row.size()) throw ParamError("cumulative_regret: action out of range");
    const double best = *std::max_element(row.begin(), row.end());
    total += best - row[actions[t]];
    out.push_back(total);
  }
  return out;
}

}  // namespace pfnts
