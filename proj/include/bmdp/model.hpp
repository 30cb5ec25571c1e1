#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bmdp/rng.hpp"

namespace bmdp {

/// Tolerance for "sums to one" at construction time.
inline constexpr double kConstructionTol = 1e-12;
/// Tolerance for "sums to one" after arithmetic on probabilities.
inline constexpr double kArithmeticTol = 1e-9;
/// Relative tolerance used to decide argmax ties between Q values.
inline constexpr double kTieTol = 1e-12;

/// Tabular block MDP. All indices are zero-based; round h = 0 is the first
/// step of an episode.
///
/// Layouts (row-major):
///   latent_kernel  [s][a][s']   p(s' | s, a)
///   emission       [s][y]       q(y | s), zero unless decoding[y] == s
///   rewards        [h][x][a]    r_h(x, a) in [0, 1]
struct Bmdp {
  std::size_t n_contexts = 0;
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t horizon = 0;
  std::vector<std::size_t> decoding;
  std::vector<double> latent_kernel;
  std::vector<double> emission;
  std::vector<double> initial_dist;
  std::vector<double> rewards;

  double p(std::size_t s, std::size_t a, std::size_t s_next) const {
    return latent_kernel[(s * n_actions + a) * n_states + s_next];
  }
  double q(std::size_t s, std::size_t y) const { return emission[s * n_contexts + y]; }
  double r(std::size_t h, std::size_t x, std::size_t a) const {
    return rewards[(h * n_contexts + x) * n_actions + a];
  }
  /// q(y | f(y)); the only nonzero emission entry in column y.
  double q_own(std::size_t y) const { return q(decoding[y], y); }

  bool operator==(const Bmdp&) const = default;
};

/// pi_h(a | x), layout [h][x][a].
struct TabularPolicy {
  std::size_t horizon = 0;
  std::size_t n_contexts = 0;
  std::size_t n_actions = 0;
  std::vector<double> probs;

  double operator()(std::size_t h, std::size_t x, std::size_t a) const {
    return probs[(h * n_contexts + x) * n_actions + a];
  }
  double& at(std::size_t h, std::size_t x, std::size_t a) {
    return probs[(h * n_contexts + x) * n_actions + a];
  }

  static TabularPolicy uniform(std::size_t horizon, std::size_t n_contexts, std::size_t n_actions);
};

/// One episode: contexts x_1..x_{H+1} and actions a_1..a_H.
struct EpisodeTrajectory {
  std::vector<std::size_t> contexts;
  std::vector<std::size_t> actions;

  bool operator==(const EpisodeTrajectory&) const = default;
};

/// v has H + 1 rows (the last is identically zero); q is [h][x][a].
struct ValueTable {
  std::size_t horizon = 0;
  std::size_t n_contexts = 0;
  std::size_t n_actions = 0;
  std::vector<double> v;
  std::vector<double> q;

  double value(std::size_t h, std::size_t x) const { return v[h * n_contexts + x]; }
  double qvalue(std::size_t h, std::size_t x, std::size_t a) const {
    return q[(h * n_contexts + x) * n_actions + a];
  }
};

struct Violation {
  std::string field;
  std::vector<std::size_t> indices;
  double magnitude = 0.0;
  std::string message;
};

/// Reports every broken model invariant; empty iff the model is well formed.
std::vector<Violation> validate(const Bmdp& model);

/// Throws std::invalid_argument listing the first violations, if any.
void require_valid(const Bmdp& model);

/// P(. | x, a) over all n contexts.
std::vector<double> full_kernel(const Bmdp& model, std::size_t x, std::size_t a);

/// Draws x' ~ P(. | x, a) by sampling the latent state and then the emission.
std::size_t sample_transition(const Bmdp& model, std::size_t x, std::size_t a, Rng& rng);

EpisodeTrajectory sample_episode(const Bmdp& model, const TabularPolicy& policy, Rng& rng);

/// Exact V^pi and Q^pi by backward recursion from V_{H+1} = 0.
ValueTable evaluate_policy(const Bmdp& model, const TabularPolicy& policy);

struct OptimalSolution {
  ValueTable values;
  TabularPolicy policy;
};

/// Backward value iteration; the returned policy is uniform over the argmax
/// set (ties within kTieTol relative).
OptimalSolution optimal_values(const Bmdp& model);

/// sum_x mu(x) (V*_1(x) - V^pi_1(x)), the expected regret of one episode.
double expected_regret_of(const Bmdp& model, const TabularPolicy& policy);
double expected_regret_of(const Bmdp& model, const ValueTable& optimal, const TabularPolicy& policy);

/// Uniform distribution over argmax_a of q[0..A), written into out.
void greedy_row(const double* q, std::size_t n_actions, double* out);

}  // namespace bmdp
