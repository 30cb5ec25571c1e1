#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace bmdp {

struct Misclassification {
  std::size_t count = 0;
  /// permutation[s] = estimated label matched to true state s.
  std::vector<std::size_t> permutation;
};

/// Minimum over label permutations gamma of
///   | union_{s in subset} (est^-1(gamma(s)) \ truth^-1(s)) |,
/// solved as an assignment problem on the S x S confusion matrix. An empty
/// subset means all states.
Misclassification misclassification(const std::vector<std::size_t>& estimate, const std::vector<std::size_t>& truth,
                                    std::size_t n_states, const std::vector<std::size_t>& subset = {});

/// Minimum-cost perfect matching on a square cost matrix (row-major);
/// returns assignment[row] = column.
std::vector<std::size_t> hungarian(const std::vector<std::int64_t>& cost, std::size_t size);

}  // namespace bmdp
