#pragma once

namespace landing {

/// H(x) on F: identity, Dc Dc*ᵍ (gram_g) or Dc Dc*ᴱ (gram_euclid), times scale.
enum class NormalOperatorKind { identity, gram_g, gram_euclid };

struct NormalOperatorChoice {
  NormalOperatorKind kind = NormalOperatorKind::identity;
  double scale = 1.0;
};

}  // namespace landing
