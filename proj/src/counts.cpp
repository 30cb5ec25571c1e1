#include "bmdp/counts.hpp"

#include <stdexcept>

namespace bmdp {

TransitionCounts::TransitionCounts(std::size_t n_contexts, std::size_t n_actions)
    : n_(n_contexts),
      A_(n_actions),
      per_action_(n_actions * n_contexts * n_contexts, 0),
      in_degree_(n_contexts, 0),
      out_by_action_(n_contexts * n_actions, 0) {}

void TransitionCounts::add(std::size_t x, std::size_t a, std::size_t y, Count times) {
  if (x >= n_ || y >= n_ || a >= A_) throw std::out_of_range("TransitionCounts::add: index out of range");
  per_action_[(a * n_ + x) * n_ + y] += times;
  in_degree_[y] += times;
  out_by_action_[x * A_ + a] += times;
  total_ += times;
}

void TransitionCounts::add_episode(const EpisodeTrajectory& ep) {
  if (ep.contexts.size() != ep.actions.size() + 1) throw std::invalid_argument("malformed trajectory");
  for (std::size_t h = 0; h < ep.actions.size(); ++h) add(ep.contexts[h], ep.actions[h], ep.contexts[h + 1]);
}

TransitionCounts& TransitionCounts::operator+=(const TransitionCounts& other) {
  if (other.n_ != n_ || other.A_ != A_) throw std::invalid_argument("TransitionCounts: shape mismatch");
  for (std::size_t i = 0; i < per_action_.size(); ++i) per_action_[i] += other.per_action_[i];
  for (std::size_t i = 0; i < in_degree_.size(); ++i) in_degree_[i] += other.in_degree_[i];
  for (std::size_t i = 0; i < out_by_action_.size(); ++i) out_by_action_[i] += other.out_by_action_[i];
  total_ += other.total_;
  return *this;
}

TransitionCounts TransitionCounts::from_per_action(std::size_t n, std::size_t A, std::vector<Count> per_action) {
  if (per_action.size() != A * n * n) throw std::invalid_argument("TransitionCounts: per_action has wrong size");
  TransitionCounts c(n, A);
  c.per_action_ = std::move(per_action);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        const Count v = c.per_action_[(a * n + x) * n + y];
        if (v < 0) throw std::invalid_argument("TransitionCounts: negative count");
        c.in_degree_[y] += v;
        c.out_by_action_[x * A + a] += v;
        c.total_ += v;
      }
    }
  }
  return c;
}

TransitionCounts accumulate(const EpisodeHistory& history, std::size_t n_contexts, std::size_t n_actions) {
  TransitionCounts counts(n_contexts, n_actions);
  for (const auto& ep : history) counts.add_episode(ep);
  return counts;
}

std::string to_string(DecodingMethod method) {
  return method == DecodingMethod::spectral ? "spectral" : "improved";
}

Json decoding_to_json(const DecodingEstimate& e) {
  return Json{{"labels", e.labels}, {"method", to_string(e.method)}, {"iterations", e.iterations}};
}

DecodingEstimate decoding_from_json(const Json& doc) {
  DecodingEstimate e;
  e.labels = doc.at("labels").get<std::vector<std::size_t>>();
  const auto method = doc.at("method").get<std::string>();
  if (method == "spectral") {
    e.method = DecodingMethod::spectral;
  } else if (method == "improved") {
    e.method = DecodingMethod::improved;
  } else {
    throw std::invalid_argument("unknown decoding method '" + method + "'");
  }
  e.iterations = doc.at("iterations").get<std::size_t>();
  return e;
}

}  // namespace bmdp
