#pragma once

#include "casc/common.hpp"
#include "casc/rng.hpp"

namespace casc {

enum class RndKind { half, proportional };

// Coin-flip baselines: `half` fires each entry with probability 0.5,
// `proportional` with the fraction of active users in the presented window.
inline BinVec rnd_predict(RndKind kind, const BinVec& tau, Rng& rng) {
  double p = 0.5;
  if (kind == RndKind::proportional) {
    std::size_t ones = 0;
    for (Index i = 0; i < tau.size(); ++i) ones += tau[i];
    p = tau.size() > 0
            ? static_cast<double>(ones) / static_cast<double>(tau.size())
            : 0.0;
  }
  BinVec out(tau.size());
  for (Index i = 0; i < tau.size(); ++i) out[i] = rng.bernoulli(p) ? 1 : 0;
  return out;
}

}  // namespace casc
