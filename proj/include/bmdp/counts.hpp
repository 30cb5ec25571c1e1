#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmdp/model.hpp"
#include "bmdp/model_io.hpp"

namespace bmdp {

using EpisodeHistory = std::vector<EpisodeTrajectory>;
using Count = std::int64_t;

/// Context-level transition tallies N_a(x, y).
class TransitionCounts {
 public:
  TransitionCounts() = default;
  TransitionCounts(std::size_t n_contexts, std::size_t n_actions);

  std::size_t n_contexts() const { return n_; }
  std::size_t n_actions() const { return A_; }

  void add(std::size_t x, std::size_t a, std::size_t y, Count times = 1);
  void add_episode(const EpisodeTrajectory& episode);

  /// N_a(x, y)
  Count pair(std::size_t a, std::size_t x, std::size_t y) const { return per_action_[(a * n_ + x) * n_ + y]; }
  /// Row N_a(x, .) as a contiguous span of length n.
  const Count* row(std::size_t a, std::size_t x) const { return &per_action_[(a * n_ + x) * n_]; }
  /// N^to(y) = sum_a sum_x N_a(x, y)
  Count in_degree(std::size_t y) const { return in_degree_[y]; }
  /// N(x, a) = sum_y N_a(x, y)
  Count out_by_action(std::size_t x, std::size_t a) const { return out_by_action_[x * A_ + a]; }
  Count total() const { return total_; }

  const std::vector<Count>& per_action() const { return per_action_; }

  TransitionCounts& operator+=(const TransitionCounts& other);
  bool operator==(const TransitionCounts&) const = default;

  /// Rebuilds from a raw [a][x][y] array; marginals are recomputed.
  static TransitionCounts from_per_action(std::size_t n_contexts, std::size_t n_actions, std::vector<Count> per_action);

 private:
  std::size_t n_ = 0;
  std::size_t A_ = 0;
  std::vector<Count> per_action_;
  std::vector<Count> in_degree_;
  std::vector<Count> out_by_action_;
  Count total_ = 0;
};

TransitionCounts accumulate(const EpisodeHistory& history, std::size_t n_contexts, std::size_t n_actions);

enum class DecodingMethod { spectral, improved };

struct DecodingEstimate {
  std::vector<std::size_t> labels;
  DecodingMethod method = DecodingMethod::spectral;
  std::size_t iterations = 0;

  bool operator==(const DecodingEstimate&) const = default;
};

std::string to_string(DecodingMethod method);
Json decoding_to_json(const DecodingEstimate& estimate);
DecodingEstimate decoding_from_json(const Json& doc);

}  // namespace bmdp
