#pragma once

#include <cstddef>
#include <string_view>

#include "pfnts/types.hpp"

namespace pfnts {

// How arm identity enters a predictive model's input.
//   kDisjoint: one model per arm, features are the raw context.
//   kOneHot:   one shared model, features are (x, e_k).
enum class Encoding { kDisjoint, kOneHot };

std::string_view to_string(Encoding e) noexcept;
Encoding other(Encoding e) noexcept;

struct EncodedPoint {
  Vector values;
  Encoding tag = Encoding::kDisjoint;
};

// (x, e_k) of length P + K. Throws ArmIndexError unless k < K.
EncodedPoint encode_onehot(const Context& x, std::size_t k, std::size_t num_arms);

EncodedPoint encode_disjoint(const Context& x);

}  // namespace pfnts
