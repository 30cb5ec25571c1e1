#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bmdp/model.hpp"

namespace bmdp {

/// Raised when generator parameters break their documented constraints.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Random instance with near-equal latent states (sizes differ by at most
/// one, larger states first), Dirichlet latent
/// transitions and emissions, and i.i.d. Uniform[0,1] rewards.
struct DirichletSpec {
  std::size_t n = 100;
  std::size_t S = 3;
  std::size_t A = 3;
  std::size_t H = 20;
  double p_alpha = 1.0;
  /// <= 0 means sqrt(n).
  double q_alpha = 0.0;
  std::uint64_t seed = 0;

  double effective_q_alpha() const;
  bool operator==(const DirichletSpec&) const = default;
};

/// Draw order (fixed, so a seed reproduces the instance): p rows for
/// s = 0..S-1, a = 0..A-1; then q rows for s = 0..S-1; then rewards for
/// h, x, a in row-major order.
Bmdp gen_dirichlet(const DirichletSpec& spec);

/// Member of the hard-to-learn class: one action per state is eps-better at
/// reaching the rewarding half S_1 = {S/2, ..., S-1}.
struct HardInstanceSpec {
  std::size_t n = 0;
  std::size_t S = 0;
  std::size_t A = 0;
  std::size_t H = 0;
  double eps0 = 0.0;
  double eps1 = 0.0;
  double kappa = 0.0;
  /// a*_s for every s; distinct on S_1. Drawn from the seed when empty.
  std::vector<std::size_t> optimal_actions;
  std::uint64_t seed = 0;

  double eps_max() const { return eps0 > eps1 ? eps0 : eps1; }
  bool operator==(const HardInstanceSpec&) const = default;
};

/// Throws SpecError if the spec breaks a class constraint.
void check_hard_spec(const HardInstanceSpec& spec);

struct PartitionSizes {
  std::size_t s_minus = 0;
  std::size_t s_zero = 0;
  std::size_t s_plus = 0;

  bool operator==(const PartitionSizes&) const = default;
};

/// Numbers of states in one half with floor(n_i / (S/2)) - 1, + 0 and + 1
/// contexts, following the constructive case split on
/// r_i = n_i - floor(2 n_i / S) S / 2.
PartitionSizes partition_sizes(std::size_t n_i, std::size_t S);

/// Decoding in the hard class: contexts [0, floor(n/2)) go to S_0, the rest
/// to S_1; which states get which size is drawn from the seed.
std::vector<std::size_t> build_decoding(std::size_t n, std::size_t S, std::uint64_t seed);

/// Packing vectors v*(. | s) in [-1, 1]^{S/2}, one per state, each summing to
/// zero. Explicit construction for S/4 < 12, random balanced sign vectors
/// with pairwise inner products <= sqrt(3 S ln S) otherwise.
struct Packing {
  std::vector<std::vector<double>> vectors;
  std::size_t draws = 0;
  bool randomized = false;
};
Packing packing_vectors(std::size_t S, std::uint64_t seed, std::size_t draw_budget = 10000);

Bmdp build_hard_bmdp(const HardInstanceSpec& spec);

/// (1 + 2 eps)(1 + kappa) / ((1 - 2 eps)(1 - kappa)), the reachability
/// constant the hard construction is designed around.
double hard_eta_closed_form(double eps_max, double kappa);

/// Inverse of hard_eta_closed_form in kappa for a target eta.
double kappa_for_eta(double eta, double eps_max);

/// Index set of the rewarding half: true for s >= S/2.
inline bool in_rewarding_half(std::size_t s, std::size_t S) { return s >= S / 2; }

}  // namespace bmdp
