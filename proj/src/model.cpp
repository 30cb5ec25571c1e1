#include "bmdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bmdp {

TabularPolicy TabularPolicy::uniform(std::size_t horizon, std::size_t n_contexts, std::size_t n_actions) {
  TabularPolicy pi{horizon, n_contexts, n_actions, {}};
  pi.probs.assign(horizon * n_contexts * n_actions, 1.0 / static_cast<double>(n_actions));
  return pi;
}

namespace {

void check_row_sum(std::vector<Violation>& out, const std::string& field, std::vector<std::size_t> idx,
                   double sum) {
  const double deficit = 1.0 - sum;
  if (!(std::abs(deficit) <= kConstructionTol)) {
    std::ostringstream msg;
    msg << field << " row sums to " << sum << " (deficit " << deficit << ")";
    out.push_back({field, std::move(idx), deficit, msg.str()});
  }
}

void check_nonneg(std::vector<Violation>& out, const std::string& field, std::vector<std::size_t> idx,
                  double value) {
  if (!(value >= 0.0)) {
    std::ostringstream msg;
    msg << field << " entry " << value << " is negative or NaN";
    out.push_back({field, std::move(idx), value, msg.str()});
  }
}

}  // namespace

std::vector<Violation> validate(const Bmdp& m) {
  std::vector<Violation> out;
  const std::size_t n = m.n_contexts, S = m.n_states, A = m.n_actions, H = m.horizon;
  if (n == 0 || S == 0 || A == 0 || H == 0) {
    out.push_back({"dimensions", {n, S, A, H}, 0.0, "n, S, A and H must all be positive"});
    return out;
  }
  if (S > n) out.push_back({"dimensions", {n, S}, static_cast<double>(S - n), "more states than contexts"});

  auto shape = [&](const char* field, std::size_t got, std::size_t want) {
    if (got != want) {
      std::ostringstream msg;
      msg << field << " has " << got << " entries, expected " << want;
      out.push_back({field, {got, want}, static_cast<double>(got) - static_cast<double>(want), msg.str()});
      return false;
    }
    return true;
  };
  bool shapes_ok = shape("f", m.decoding.size(), n);
  shapes_ok &= shape("p", m.latent_kernel.size(), S * A * S);
  shapes_ok &= shape("q", m.emission.size(), S * n);
  shapes_ok &= shape("mu", m.initial_dist.size(), n);
  shapes_ok &= shape("r", m.rewards.size(), H * n * A);
  if (!shapes_ok) return out;

  std::vector<std::size_t> state_size(S, 0);
  for (std::size_t y = 0; y < n; ++y) {
    if (m.decoding[y] >= S) {
      out.push_back({"f", {y}, static_cast<double>(m.decoding[y]), "decoding maps context outside [S]"});
    } else {
      ++state_size[m.decoding[y]];
    }
  }
  for (std::size_t s = 0; s < S; ++s) {
    if (state_size[s] == 0) out.push_back({"f", {s}, 0.0, "latent state has no contexts"});
  }

  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      double sum = 0.0;
      for (std::size_t t = 0; t < S; ++t) {
        check_nonneg(out, "p", {s, a, t}, m.p(s, a, t));
        sum += m.p(s, a, t);
      }
      check_row_sum(out, "p", {s, a}, sum);
    }
  }

  for (std::size_t s = 0; s < S; ++s) {
    double sum = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const double value = m.q(s, y);
      check_nonneg(out, "q", {s, y}, value);
      if (m.decoding[y] != s && value != 0.0) {
        std::ostringstream msg;
        msg << "q(" << y << "|" << s << ") = " << value << " but f(" << y << ") = " << m.decoding[y];
        out.push_back({"q", {s, y}, value, msg.str()});
      }
      sum += value;
    }
    check_row_sum(out, "q", {s}, sum);
  }

  double mu_sum = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    check_nonneg(out, "mu", {x}, m.initial_dist[x]);
    mu_sum += m.initial_dist[x];
  }
  check_row_sum(out, "mu", {}, mu_sum);

  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t a = 0; a < A; ++a) {
        const double value = m.r(h, x, a);
        if (!(value >= 0.0 && value <= 1.0)) {
          std::ostringstream msg;
          msg << "reward r_" << h << "(" << x << "," << a << ") = " << value << " outside [0,1]";
          out.push_back({"r", {h, x, a}, value, msg.str()});
        }
      }
    }
  }
  return out;
}

void require_valid(const Bmdp& model) {
  const auto violations = validate(model);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid BMDP (" << violations.size() << " violations)";
  for (std::size_t i = 0; i < std::min<std::size_t>(violations.size(), 5); ++i) {
    msg << "; " << violations[i].message;
  }
  throw std::invalid_argument(msg.str());
}

std::vector<double> full_kernel(const Bmdp& m, std::size_t x, std::size_t a) {
  if (x >= m.n_contexts || a >= m.n_actions) throw std::out_of_range("full_kernel: index out of range");
  const std::size_t s = m.decoding[x];
  std::vector<double> out(m.n_contexts);
  for (std::size_t y = 0; y < m.n_contexts; ++y) {
    const std::size_t t = m.decoding[y];
    out[y] = m.p(s, a, t) * m.q(t, y);
  }
  return out;
}

std::size_t sample_transition(const Bmdp& m, std::size_t x, std::size_t a, Rng& rng) {
  const std::size_t s = m.decoding[x];
  const double* row = &m.latent_kernel[(s * m.n_actions + a) * m.n_states];
  const std::size_t next_state = rng.categorical({row, m.n_states});
  return rng.categorical({&m.emission[next_state * m.n_contexts], m.n_contexts});
}

EpisodeTrajectory sample_episode(const Bmdp& m, const TabularPolicy& policy, Rng& rng) {
  EpisodeTrajectory ep;
  ep.contexts.reserve(m.horizon + 1);
  ep.actions.reserve(m.horizon);
  std::size_t x = rng.categorical(m.initial_dist);
  ep.contexts.push_back(x);
  for (std::size_t h = 0; h < m.horizon; ++h) {
    const double* row = &policy.probs[(h * m.n_contexts + x) * m.n_actions];
    const std::size_t a = rng.categorical({row, m.n_actions});
    x = sample_transition(m, x, a, rng);
    ep.actions.push_back(a);
    ep.contexts.push_back(x);
  }
  return ep;
}

namespace {

// w(s) = sum_{y in f^{-1}(s)} q(y|s) v(y)
void emission_weighted(const Bmdp& m, const double* v, std::vector<double>& w) {
  std::fill(w.begin(), w.end(), 0.0);
  for (std::size_t y = 0; y < m.n_contexts; ++y) w[m.decoding[y]] += m.q_own(y) * v[y];
}

ValueTable make_table(const Bmdp& m) {
  ValueTable t{m.horizon, m.n_contexts, m.n_actions, {}, {}};
  t.v.assign((m.horizon + 1) * m.n_contexts, 0.0);
  t.q.assign(m.horizon * m.n_contexts * m.n_actions, 0.0);
  return t;
}

// Q_h(x, a) = r_h(x, a) + sum_s p(s | f(x), a) w(s)
void bellman_q(const Bmdp& m, std::size_t h, const std::vector<double>& w, ValueTable& t) {
  const std::size_t n = m.n_contexts, A = m.n_actions, S = m.n_states;
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t s = m.decoding[x];
    for (std::size_t a = 0; a < A; ++a) {
      const double* prow = &m.latent_kernel[(s * A + a) * S];
      double next = 0.0;
      for (std::size_t t2 = 0; t2 < S; ++t2) next += prow[t2] * w[t2];
      t.q[(h * n + x) * A + a] = m.r(h, x, a) + next;
    }
  }
}

}  // namespace

ValueTable evaluate_policy(const Bmdp& m, const TabularPolicy& policy) {
  ValueTable t = make_table(m);
  const std::size_t n = m.n_contexts, A = m.n_actions;
  std::vector<double> w(m.n_states);
  for (std::size_t h = m.horizon; h-- > 0;) {
    emission_weighted(m, &t.v[(h + 1) * n], w);
    bellman_q(m, h, w, t);
    for (std::size_t x = 0; x < n; ++x) {
      double v = 0.0;
      for (std::size_t a = 0; a < A; ++a) v += policy(h, x, a) * t.q[(h * n + x) * A + a];
      t.v[h * n + x] = v;
    }
  }
  return t;
}

void greedy_row(const double* q, std::size_t n_actions, double* out) {
  double best = q[0];
  for (std::size_t a = 1; a < n_actions; ++a) best = std::max(best, q[a]);
  const double tol = kTieTol * std::max(1.0, std::abs(best));
  std::size_t count = 0;
  for (std::size_t a = 0; a < n_actions; ++a) count += (q[a] >= best - tol) ? 1 : 0;
  const double mass = 1.0 / static_cast<double>(count);
  for (std::size_t a = 0; a < n_actions; ++a) out[a] = (q[a] >= best - tol) ? mass : 0.0;
}

OptimalSolution optimal_values(const Bmdp& m) {
  OptimalSolution sol{make_table(m), TabularPolicy{m.horizon, m.n_contexts, m.n_actions, {}}};
  sol.policy.probs.assign(m.horizon * m.n_contexts * m.n_actions, 0.0);
  ValueTable& t = sol.values;
  const std::size_t n = m.n_contexts, A = m.n_actions;
  std::vector<double> w(m.n_states);
  for (std::size_t h = m.horizon; h-- > 0;) {
    emission_weighted(m, &t.v[(h + 1) * n], w);
    bellman_q(m, h, w, t);
    for (std::size_t x = 0; x < n; ++x) {
      const double* qrow = &t.q[(h * n + x) * A];
      t.v[h * n + x] = *std::max_element(qrow, qrow + A);
      greedy_row(qrow, A, &sol.policy.probs[(h * n + x) * A]);
    }
  }
  return sol;
}

double expected_regret_of(const Bmdp& m, const ValueTable& optimal, const TabularPolicy& policy) {
  const ValueTable played = evaluate_policy(m, policy);
  double regret = 0.0;
  for (std::size_t x = 0; x < m.n_contexts; ++x) {
    regret += m.initial_dist[x] * (optimal.value(0, x) - played.value(0, x));
  }
  // Rounding can leave -1e-16 for an optimal policy.
  if (regret < 0.0 && regret > -kArithmeticTol) regret = 0.0;
  return regret;
}

double expected_regret_of(const Bmdp& m, const TabularPolicy& policy) {
  return expected_regret_of(m, optimal_values(m).values, policy);
}

}  // namespace bmdp
