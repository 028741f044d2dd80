#include "pfnts/friedman.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "pfnts/errors.hpp"

namespace pfnts::envs {

namespace {

constexpr double kPi = std::numbers::pi;

void require(std::span<const double> x, std::size_t n) {
  if (x.size() < n) throw ParamError("Friedman function needs at least " + std::to_string(n) + " coordinates");
}

struct Rescaled {
  double x1, x2, x3, x4;
};

Rescaled rescale(std::span<const double> x) {
  require(x, 4);
  return {100.0 * x[0], 40.0 * kPi + 520.0 * kPi * x[1], x[2], 1.0 + 10.0 * x[3]};
}

double inner(const Rescaled& r) { return r.x2 * r.x3 - 1.0 / (r.x2 * r.x4); }

}  // namespace

double friedman1(std::span<const double> x) {
  require(x, 5);
  const double c = x[2] - 0.5;
  return 10.0 * std::sin(kPi * x[0] * x[1]) + 20.0 * c * c + 10.0 * x[3] + 5.0 * x[4];
}

double friedman2(std::span<const double> x) {
  const auto r = rescale(x);
  const double v = inner(r);
  return std::sqrt(r.x1 * r.x1 + v * v) / 125.0;
}

double friedman3(std::span<const double> x) {
  const auto r = rescale(x);
  const double num = inner(r);
  if (r.x1 == 0.0) {
    if (num == 0.0) return 0.0;
    return (num > 0.0 ? kPi / 2.0 : -kPi / 2.0) / 0.1;
  }
  return std::atan(num / r.x1) / 0.1;
}

double arm2_mean(Arm2Variant variant, std::span<const double> x) {
  if (variant == Arm2Variant::kShared) {
    require(x, 5);
    return friedman1(x) + 5.0 * std::sin(kPi * x[0] * x[1]);
  }
  std::vector<double> reversed(x.rbegin(), x.rend());
  return friedman1(reversed);
}

}  // namespace pfnts::envs
