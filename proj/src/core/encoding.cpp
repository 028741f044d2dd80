#include "pfnts/encoding.hpp"

#include <string>

#include "pfnts/errors.hpp"

namespace pfnts {

std::string_view to_string(Encoding e) noexcept {
  return e == Encoding::kDisjoint ? "disjoint" : "onehot";
}

Encoding other(Encoding e) noexcept {
  return e == Encoding::kDisjoint ? Encoding::kOneHot : Encoding::kDisjoint;
}

EncodedPoint encode_onehot(const Context& x, std::size_t k, std::size_t num_arms) {
  if (k >= num_arms) {
    throw ArmIndexError("arm " + std::to_string(k) + " out of range for K=" +
                        std::to_string(num_arms));
  }
  EncodedPoint out;
  out.tag = Encoding::kOneHot;
  out.values = Vector::Zero(x.size() + static_cast<Eigen::Index>(num_arms));
  out.values.head(x.size()) = x;
  out.values(x.size() + static_cast<Eigen::Index>(k)) = 1.0;
  return out;
}

EncodedPoint encode_disjoint(const Context& x) { return {x, Encoding::kDisjoint}; }

}  // namespace pfnts
