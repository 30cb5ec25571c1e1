#include "bmdp/misclassification.hpp"

#include <limits>
#include <stdexcept>

namespace bmdp {

// Shortest augmenting path with potentials (Kuhn-Munkres), O(size^3).
std::vector<std::size_t> hungarian(const std::vector<std::int64_t>& cost, std::size_t m) {
  if (cost.size() != m * m) throw std::invalid_argument("hungarian: cost matrix is not square");
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  // One-based internals; column 0 is the virtual source.
  std::vector<std::int64_t> u(m + 1, 0), v(m + 1, 0);
  std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<std::int64_t> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      std::int64_t delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(m);
  for (std::size_t j = 1; j <= m; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

Misclassification misclassification(const std::vector<std::size_t>& estimate, const std::vector<std::size_t>& truth,
                                    std::size_t S, const std::vector<std::size_t>& subset) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("misclassification: label vectors differ in length");
  std::vector<std::int64_t> confusion(S * S, 0);  // [true s][estimated j]
  std::vector<std::int64_t> est_size(S, 0);
  for (std::size_t x = 0; x < truth.size(); ++x) {
    if (estimate[x] >= S || truth[x] >= S) throw std::invalid_argument("misclassification: label out of range");
    ++confusion[truth[x] * S + estimate[x]];
    ++est_size[estimate[x]];
  }
  std::vector<bool> in_subset(S, subset.empty());
  for (std::size_t s : subset) {
    if (s >= S) throw std::invalid_argument("misclassification: subset state out of range");
    in_subset[s] = true;
  }
  // Cost of matching true s to estimated j: contexts labeled j that are not in s.
  std::vector<std::int64_t> cost(S * S, 0);
  for (std::size_t s = 0; s < S; ++s) {
    if (!in_subset[s]) continue;
    for (std::size_t j = 0; j < S; ++j) cost[s * S + j] = est_size[j] - confusion[s * S + j];
  }
  Misclassification result;
  result.permutation = hungarian(cost, S);
  for (std::size_t s = 0; s < S; ++s) result.count += static_cast<std::size_t>(cost[s * S + result.permutation[s]]);
  return result;
}

}  // namespace bmdp
