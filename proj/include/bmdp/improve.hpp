#pragma once

#include <cstddef>
#include <vector>

#include "bmdp/counts.hpp"

namespace bmdp {

/// Latent kernels estimated from context counts under a labeling. Both use
/// the [s][a][s'] layout:
///   forward(s, a, s')  = N(f^-1 s, a, f^-1 s') / (1 v N(f^-1 s, a))
///   backward(s, a, s') = N(f^-1 s, a, f^-1 s') / (1 v N^to(f^-1 s'))
struct LatentKernels {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> forward;
  std::vector<double> backward;

  double p(std::size_t s, std::size_t a, std::size_t s_next) const {
    return forward[(s * n_actions + a) * n_states + s_next];
  }
  double p_bwd(std::size_t s, std::size_t a, std::size_t s_next) const {
    return backward[(s * n_actions + a) * n_states + s_next];
  }
};

LatentKernels estimate_latent_kernels(const TransitionCounts& counts, const std::vector<std::size_t>& labels,
                                      std::size_t n_states);

/// Number of improvement sweeps, ceil(ln n).
std::size_t improvement_iterations(std::size_t n_contexts);

/// Likelihood reassignment: each sweep re-estimates the kernels and moves
/// every context x to argmax_s' L(x, s'), where
///   L(x, s') = sum_{a,s} N(x, a, f^-1 s) ln p(s | s', a)
///            + N(f^-1 s, a, x) ln p_bwd(s, a | s').
/// Zero counts contribute 0; a positive count against a zero probability
/// rules the label out. Ties keep the current label, otherwise the lowest
/// index wins; if every label is ruled out the context keeps its label.
DecodingEstimate improve_clusters(const TransitionCounts& counts, const DecodingEstimate& initial, std::size_t n_states);

}  // namespace bmdp
