#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bmdp/counts.hpp"
#include "bmdp/model.hpp"
#include "bmdp/model_io.hpp"
#include "bmdp/rng.hpp"

namespace bmdp {

enum class Algorithm { bucbvi, ucbvi_ch, ucbvi_bf, uniform };

/// Config spelling: "bucbvi", "ucbvi_ch", "ucbvi_bf", "uniform".
std::string to_string(Algorithm algorithm);
/// Output file prefix: "BUCBVI", "UCBVI-CH", "UCBVI-BF", "Uniform".
std::string display_name(Algorithm algorithm);
/// Throws std::invalid_argument on an unknown name.
Algorithm parse_algorithm(std::string_view name);

struct LearnerConfig {
  /// Transition budget of the uniform exploration phase (bucbvi only).
  std::uint64_t theta_clust = 0;
  Algorithm algorithm = Algorithm::bucbvi;
  double bonus_scale = 1.0;
  std::uint64_t seed = 0;
  /// Bernstein baseline: c1 sqrt(L Var / N) + c2 H L / N.
  double bf_c1 = 2.8284271247461903;
  double bf_c2 = 14.0 / 3.0;

  bool operator==(const LearnerConfig&) const = default;
};

void check_config(const LearnerConfig& config);
Json config_to_json(const LearnerConfig& config);
LearnerConfig config_from_json(const Json& doc);

/// n S^3 A ln^2 n, rounded up to a multiple of H.
std::uint64_t default_theta_clust(std::size_t n, std::size_t S, std::size_t A, std::size_t H);

/// Context-level counters plus latent aggregates under the current labeling.
class RunningCounts {
 public:
  RunningCounts(std::size_t n_contexts, std::size_t n_actions);

  void add(std::size_t x, std::size_t a, std::size_t y);
  void add_episode(const EpisodeTrajectory& episode);

  /// Installs a labeling and recomputes the latent aggregates from scratch.
  void relabel(const std::vector<std::size_t>& labels, std::size_t n_states);

  std::size_t n_contexts() const { return context_.n_contexts(); }
  std::size_t n_actions() const { return context_.n_actions(); }
  std::size_t n_states() const { return S_; }
  const std::vector<std::size_t>& labels() const { return labels_; }
  bool labeled() const { return S_ > 0; }

  const TransitionCounts& context() const { return context_; }
  Count context_in(std::size_t y) const { return context_.in_degree(y); }
  Count context_out(std::size_t x, std::size_t a) const { return context_.out_by_action(x, a); }
  /// N_a(x, .) as doubles, for matrix-vector products in the baselines.
  const Eigen::MatrixXd& pair_matrix(std::size_t a) const { return pair_dense_[a]; }

  Count latent_out(std::size_t s, std::size_t a) const { return latent_out_[s * n_actions() + a]; }
  Count latent_pair(std::size_t s, std::size_t a, std::size_t t) const {
    return latent_pair_[(s * n_actions() + a) * S_ + t];
  }
  Count latent_in(std::size_t s) const { return latent_in_[s]; }

  /// Recomputes the latent aggregates from the context counters and compares.
  bool consistent() const;

 private:
  TransitionCounts context_;
  std::vector<Eigen::MatrixXd> pair_dense_;
  std::size_t S_ = 0;
  std::vector<std::size_t> labels_;
  std::vector<Count> latent_out_;
  std::vector<Count> latent_pair_;
  std::vector<Count> latent_in_;
};

/// p_hat [s][a][s'] and q_hat [y] = q_hat(y | label(y)).
struct BlockKernelEstimate {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> p;
  std::vector<double> q;

  double p_at(std::size_t s, std::size_t a, std::size_t t) const { return p[(s * n_actions + a) * n_states + t]; }
};

BlockKernelEstimate estimate_block_kernel(const RunningCounts& counts);

struct BonusOptions {
  double scale = 1.0;
  /// Include the second (next-state) term of the latent bonus.
  bool transition_term = true;
};

/// Latent bonus b(s, a) at elapsed time T.
double bonus(const RunningCounts& counts, const BlockKernelEstimate& estimate, std::size_t s, std::size_t a,
             std::uint64_t T, std::size_t H, const BonusOptions& options = {});
/// Context-level Hoeffding bonus sqrt(H^2 ln(2 H n A T^2) / (1 v N(x, a))).
double context_bonus(Count visits, std::size_t n, std::size_t A, std::uint64_t T, std::size_t H, double scale);

struct OptimisticValues {
  ValueTable values;
  TabularPolicy policy;
};

/// Backward value iteration with latent bonuses, next values through
/// w(s) = sum_{y in f^-1 s} q_hat(y|s) V(y). rewards is [h][x][a].
OptimisticValues compute_q_values(const RunningCounts& counts, const std::vector<double>& rewards, std::size_t H,
                                  std::uint64_t T, const BonusOptions& options = {});

/// Same recursion on the context-level empirical kernel with a Hoeffding
/// (ucbvi_ch) or Bernstein (ucbvi_bf) bonus.
OptimisticValues baseline_q_values(const RunningCounts& counts, const std::vector<double>& rewards, std::size_t H,
                                   std::uint64_t T, const LearnerConfig& config);

enum class Phase { explore, exploit };

struct EpisodeRecord {
  std::uint64_t episode = 0;
  std::uint64_t elapsed = 0;
  double regret = 0.0;
  double cumulative = 0.0;
  Phase phase = Phase::explore;
  /// Estimated decoding equals the truth up to relabeling; false before clustering.
  bool clustering_exact = false;
  /// Sampled return of the played episode (diagnostic only).
  double sampled_return = 0.0;

  bool operator==(const EpisodeRecord&) const = default;
};

/// Count of (k, h, x) with V_bar_h(x) < V*_h(x) - 1e-9, over optimistic
/// episodes (for bucbvi, only those with an exact decoding).
struct OptimismStats {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;

  double fraction() const { return checked ? static_cast<double>(violations) / static_cast<double>(checked) : 0.0; }
  bool operator==(const OptimismStats&) const = default;
};

/// One learning run. Holds non-owning pointers to the model and its optimal
/// values; both must outlive the learner.
class Learner {
 public:
  Learner(const Bmdp& model, const ValueTable& optimal, LearnerConfig config);

  /// Plays the next episode and returns its record.
  const EpisodeRecord& step();

  std::uint64_t episode() const { return k_; }
  Phase phase() const;
  const LearnerConfig& config() const { return config_; }
  const std::vector<EpisodeRecord>& records() const { return records_; }
  const OptimismStats& optimism() const { return optimism_; }
  const std::optional<DecodingEstimate>& decoding() const { return decoding_; }
  const RunningCounts& counts() const { return counts_; }
  /// Set when improvement failed and the spectral labels were kept.
  const std::string& clustering_note() const { return note_; }

  Json checkpoint() const;
  static Learner restore(const Bmdp& model, const ValueTable& optimal, const Json& doc);

 private:
  void cluster();
  TabularPolicy play_policy(double& regret);

  const Bmdp* model_;
  const ValueTable* optimal_;
  LearnerConfig config_;
  Rng rng_;
  RunningCounts counts_;
  std::uint64_t k_ = 0;
  double uniform_regret_ = 0.0;
  std::optional<DecodingEstimate> decoding_;
  bool exact_ = false;
  std::string note_;
  std::vector<EpisodeRecord> records_;
  OptimismStats optimism_;
};

struct RunResult {
  std::vector<EpisodeRecord> records;
  OptimismStats optimism;
  std::optional<DecodingEstimate> decoding;
  std::string clustering_note;
};

RunResult run_learner(const Bmdp& model, const LearnerConfig& config, std::size_t K);

std::string to_string(Phase phase);

}  // namespace bmdp
