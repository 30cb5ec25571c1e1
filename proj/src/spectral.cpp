#include "bmdp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bmdp/rng.hpp"

namespace bmdp {

std::size_t trim_count(std::size_t T, std::size_t n, std::size_t A) {
  const double x = static_cast<double>(T) / static_cast<double>(n * A);
  if (x < 1.0) return 0;
  const double raw = std::floor(static_cast<double>(n) * std::exp(-x * std::log(x)));
  return static_cast<std::size_t>(std::min(raw, static_cast<double>(n)));
}

TrimResult trim(const TransitionCounts& counts, std::size_t T, std::uint64_t seed) {
  const std::size_t n = counts.n_contexts(), A = counts.n_actions();
  TrimResult out;
  out.removed_per_action = trim_count(T, n, A);
  out.kept.assign(A, std::vector<bool>(n, true));
  out.matrices.reserve(A);
  Rng rng(seed);
  std::vector<std::size_t> ties;
  for (std::size_t a = 0; a < A; ++a) {
    auto& kept = out.kept[a];
    for (std::size_t step = 0; step < out.removed_per_action; ++step) {
      Count best = -1;
      ties.clear();
      for (std::size_t y = 0; y < n; ++y) {
        if (!kept[y]) continue;
        const Count c = counts.out_by_action(y, a);
        if (c > best) {
          best = c;
          ties.assign(1, y);
        } else if (c == best) {
          ties.push_back(y);
        }
      }
      kept[ties[static_cast<std::size_t>(rng.below(ties.size()))]] = false;
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t x = 0; x < n; ++x) {
      if (!kept[x]) continue;
      const Count* row = counts.row(a, x);
      for (std::size_t y = 0; y < n; ++y) {
        if (kept[y]) m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = static_cast<double>(row[y]);
      }
    }
    out.matrices.push_back(std::move(m));
  }
  return out;
}

Eigen::MatrixXd rank_s_approx(const Eigen::MatrixXd& matrix, std::size_t S) {
  const auto rank = static_cast<Eigen::Index>(S);
  if (rank >= std::min(matrix.rows(), matrix.cols())) return matrix;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw ConvergenceError("rank_s_approx: SVD did not converge");
  return svd.matrixU().leftCols(rank) * svd.singularValues().head(rank).asDiagonal() *
         svd.matrixV().leftCols(rank).transpose();
}

namespace {

double l1(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) s += std::abs(a[j] - b[j]);
  return s;
}

struct LloydRun {
  std::vector<std::size_t> labels;
  RowMatrix centers;
  double objective = std::numeric_limits<double>::infinity();
};

LloydRun lloyd(const RowMatrix& points, std::size_t k, Rng& rng, std::size_t max_iterations) {
  const std::size_t m = static_cast<std::size_t>(points.rows());
  const std::size_t d = static_cast<std::size_t>(points.cols());
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first k entries are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
    std::swap(order[i], order[j]);
  }
  LloydRun run;
  run.centers.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  for (std::size_t c = 0; c < k; ++c) run.centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(order[c]));
  run.labels.assign(m, k);

  std::vector<double> column;
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double* p = points.row(static_cast<Eigen::Index>(i)).data();
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dist = l1(p, run.centers.row(static_cast<Eigen::Index>(c)).data(), d);
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      objective += best_d;
      if (run.labels[i] != best) {
        run.labels[i] = best;
        changed = true;
      }
    }
    run.objective = objective;
    if (!changed) break;

    for (auto& g : members) g.clear();
    for (std::size_t i = 0; i < m; ++i) members[run.labels[i]].push_back(i);
    for (std::size_t c = 0; c < k; ++c) {
      const auto& g = members[c];
      if (g.empty()) continue;  // empty cluster keeps its center
      column.resize(g.size());
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t t = 0; t < g.size(); ++t) column[t] = points(static_cast<Eigen::Index>(g[t]), static_cast<Eigen::Index>(j));
        const std::size_t mid = column.size() / 2;
        std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid), column.end());
        double med = column[mid];
        if (column.size() % 2 == 0) {
          const double lower = *std::max_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid));
          med = 0.5 * (med + lower);
        }
        run.centers(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = med;
      }
    }
  }
  // Objective for the final centers and labels.
  double objective = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    objective += l1(points.row(static_cast<Eigen::Index>(i)).data(),
                    run.centers.row(static_cast<Eigen::Index>(run.labels[i])).data(), d);
  }
  run.objective = objective;
  return run;
}

}  // namespace

KMediansResult k_medians(const RowMatrix& points, std::size_t k, std::uint64_t seed, const KMediansOptions& options) {
  if (k == 0) throw std::invalid_argument("k_medians: k must be positive");
  const std::size_t m = static_cast<std::size_t>(points.rows());
  KMediansResult best;
  if (m <= k) {
    best.labels.resize(m);
    std::iota(best.labels.begin(), best.labels.end(), 0);
    best.centers = points;
    return best;
  }
  best.objective = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(options.restarts, 1); ++r) {
    Rng rng = Rng::stream(seed, r);
    LloydRun run = lloyd(points, k, rng, options.max_iterations);
    if (run.objective < best.objective) {
      best.objective = run.objective;
      best.labels = std::move(run.labels);
      best.centers = std::move(run.centers);
    }
  }
  return best;
}

SpectralResult spectral_cluster(const TransitionCounts& counts, std::size_t T, std::size_t S, std::uint64_t seed,
                                const KMediansOptions& options) {
  const std::size_t n = counts.n_contexts(), A = counts.n_actions();
  if (S == 0 || S > n) throw std::invalid_argument("spectral_cluster: need 1 <= S <= n");
  const auto ni = static_cast<Eigen::Index>(n);

  TrimResult trimmed = trim(counts, T, Rng::stream(seed, 0x7472696d).next_u64());
  RowMatrix fat(ni, static_cast<Eigen::Index>(2 * A * n));
  for (std::size_t a = 0; a < A; ++a) {
    const Eigen::MatrixXd approx = rank_s_approx(trimmed.matrices[a], S);
    fat.block(0, static_cast<Eigen::Index>(a * n), ni, ni) = approx.transpose();
    fat.block(0, static_cast<Eigen::Index>((A + a) * n), ni, ni) = approx;
  }

  SpectralResult out;
  out.removed_per_action = trimmed.removed_per_action;
  std::vector<std::size_t> active;
  for (std::size_t x = 0; x < n; ++x) {
    const double norm = fat.row(static_cast<Eigen::Index>(x)).lpNorm<1>();
    if (norm > 0.0) {
      fat.row(static_cast<Eigen::Index>(x)) /= norm;
      active.push_back(x);
    } else {
      out.degenerate.push_back(x);
    }
  }

  out.estimate.labels.assign(n, 0);
  out.estimate.method = DecodingMethod::spectral;
  out.estimate.iterations = 0;
  if (!active.empty()) {
    RowMatrix points(static_cast<Eigen::Index>(active.size()), fat.cols());
    for (std::size_t i = 0; i < active.size(); ++i) points.row(static_cast<Eigen::Index>(i)) = fat.row(static_cast<Eigen::Index>(active[i]));
    const KMediansResult km = k_medians(points, S, Rng::stream(seed, 0x6b6d6564).next_u64(), options);
    for (std::size_t i = 0; i < active.size(); ++i) out.estimate.labels[active[i]] = km.labels[i];
    out.kmedians_objective = km.objective;
  }
  return out;
}

}  // namespace bmdp
