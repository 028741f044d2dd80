#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pfnts {

// Partial sums of max_a f0(X_t, a) - f0(X_t, A_t). `true_means[t]` holds the
// per-arm mean rewards at round t. Throws ParamError on length mismatch or an
// out-of-range action.
std::vector<double> cumulative_regret(std::span<const std::vector<double>> true_means,
                                      std::span<const std::size_t> actions);

}  // namespace pfnts
