#include "bmdp/improve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bmdp {

LatentKernels estimate_latent_kernels(const TransitionCounts& counts, const std::vector<std::size_t>& labels,
                                      std::size_t S) {
  const std::size_t n = counts.n_contexts(), A = counts.n_actions();
  if (labels.size() != n) throw std::invalid_argument("estimate_latent_kernels: label count differs from n");
  for (std::size_t l : labels) {
    if (l >= S) throw std::invalid_argument("estimate_latent_kernels: label out of range");
  }
  std::vector<Count> pair(S * A * S, 0);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t x = 0; x < n; ++x) {
      const Count* row = counts.row(a, x);
      Count* dst = &pair[(labels[x] * A + a) * S];
      for (std::size_t y = 0; y < n; ++y) dst[labels[y]] += row[y];
    }
  }
  std::vector<Count> out(S * A, 0), in(S, 0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t t = 0; t < S; ++t) {
        const Count c = pair[(s * A + a) * S + t];
        out[s * A + a] += c;
        in[t] += c;
      }
    }
  }
  LatentKernels k{S, A, std::vector<double>(S * A * S, 0.0), std::vector<double>(S * A * S, 0.0)};
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t t = 0; t < S; ++t) {
        const double c = static_cast<double>(pair[(s * A + a) * S + t]);
        k.forward[(s * A + a) * S + t] = c / static_cast<double>(std::max<Count>(1, out[s * A + a]));
        k.backward[(s * A + a) * S + t] = c / static_cast<double>(std::max<Count>(1, in[t]));
      }
    }
  }
  return k;
}

std::size_t improvement_iterations(std::size_t n) {
  if (n <= 1) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(n))));
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double term(Count count, double prob) {
  if (count == 0) return 0.0;
  return prob > 0.0 ? static_cast<double>(count) * std::log(prob) : kNegInf;
}

}  // namespace

DecodingEstimate improve_clusters(const TransitionCounts& counts, const DecodingEstimate& initial, std::size_t S) {
  const std::size_t n = counts.n_contexts(), A = counts.n_actions();
  DecodingEstimate est = initial;
  est.method = DecodingMethod::improved;
  est.iterations = improvement_iterations(n);

  // out_to[(x * A + a) * S + s] = N(x, a, f^-1 s); in_from likewise for N(f^-1 s, a, x).
  std::vector<Count> out_to(n * A * S), in_from(n * A * S);
  std::vector<std::size_t> next(n);
  std::vector<double> value(S);
  for (std::size_t iter = 0; iter < est.iterations; ++iter) {
    const LatentKernels k = estimate_latent_kernels(counts, est.labels, S);
    std::fill(out_to.begin(), out_to.end(), 0);
    std::fill(in_from.begin(), in_from.end(), 0);
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t x = 0; x < n; ++x) {
        const Count* row = counts.row(a, x);
        for (std::size_t y = 0; y < n; ++y) {
          if (row[y] == 0) continue;
          out_to[(x * A + a) * S + est.labels[y]] += row[y];
          in_from[(y * A + a) * S + est.labels[x]] += row[y];
        }
      }
    }
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t incumbent = est.labels[x];
      std::size_t best = incumbent;
      double best_value = kNegInf;
      for (std::size_t cand = 0; cand < S; ++cand) {
        double total = 0.0;
        for (std::size_t a = 0; a < A && total != kNegInf; ++a) {
          for (std::size_t s = 0; s < S; ++s) {
            total += term(out_to[(x * A + a) * S + s], k.p(cand, a, s));
            total += term(in_from[(x * A + a) * S + s], k.p_bwd(s, a, cand));
          }
        }
        value[cand] = total;
      }
      if (value[incumbent] != kNegInf) best_value = value[incumbent];
      for (std::size_t cand = 0; cand < S; ++cand) {
        if (value[cand] > best_value) {
          best_value = value[cand];
          best = cand;
        }
      }
      next[x] = best;
    }
    est.labels = next;
  }
  return est;
}

}  // namespace bmdp
