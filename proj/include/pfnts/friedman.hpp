#pragma once

#include <span>

#include "pfnts/types.hpp"

namespace pfnts::envs {

// 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5 on the first five coords.
double friedman1(std::span<const double> x);

// Both rescale x1' = 100 x1, x2' = 40 pi + 520 pi x2, x3' = x3, x4' = 1 + 10 x4.
double friedman2(std::span<const double> x);
// At x1' = 0 the arctan is replaced by its limit sign(numerator) * pi/2,
// and by 0 when the numerator is also exactly 0.
double friedman3(std::span<const double> x);

enum class Arm2Variant { kShared, kDisjoint };

// Second-arm mean for the Friedman scenarios:
//   shared:   friedman1(x) + 5 sin(pi x1 x2)
//   disjoint: friedman1 applied to the reversed feature vector.
double arm2_mean(Arm2Variant variant, std::span<const double> x);

inline std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace pfnts::envs
