#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bmdp/counts.hpp"

namespace bmdp {

/// SVD did not converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// floor(n exp(-x ln x)) with x = T / (nA); zero when T < nA, at most n.
std::size_t trim_count(std::size_t T, std::size_t n, std::size_t A);

struct TrimResult {
  std::size_t removed_per_action = 0;
  /// kept[a][x] is true iff x is in Gamma_a.
  std::vector<std::vector<bool>> kept;
  /// N_a with rows and columns outside Gamma_a zeroed.
  std::vector<Eigen::MatrixXd> matrices;
};

/// Removes, for each action, the trim_count(T, n, A) contexts with the
/// largest out-count sum_z N_a(y, z), one at a time, breaking ties uniformly
/// at random from the seed.
TrimResult trim(const TransitionCounts& counts, std::size_t T, std::uint64_t seed);

/// Best rank-S approximation in Frobenius norm (truncated SVD). Throws
/// ConvergenceError if the SVD fails.
Eigen::MatrixXd rank_s_approx(const Eigen::MatrixXd& matrix, std::size_t S);

struct KMediansOptions {
  std::size_t restarts = 50;
  std::size_t max_iterations = 100;
};

struct KMediansResult {
  std::vector<std::size_t> labels;
  RowMatrix centers;
  double objective = 0.0;
};

/// Lloyd-style K-medians under the L1 distance: alternate nearest-center
/// assignment and coordinate-wise median centers, restarting from random
/// distinct data rows and keeping the lowest total distance.
KMediansResult k_medians(const RowMatrix& points, std::size_t k, std::uint64_t seed,
                         const KMediansOptions& options = {});

struct SpectralResult {
  DecodingEstimate estimate;
  /// Contexts whose row of the fat matrix was all zero; labeled 0.
  std::vector<std::size_t> degenerate;
  std::size_t removed_per_action = 0;
  double kmedians_objective = 0.0;
};

/// Trim, per-action rank-S approximation, the n x 2An matrix
/// [R_1^T .. R_A^T R_1 .. R_A] with L1-normalized rows, then K-medians.
SpectralResult spectral_cluster(const TransitionCounts& counts, std::size_t T, std::size_t S, std::uint64_t seed,
                                const KMediansOptions& options = {});

}  // namespace bmdp
