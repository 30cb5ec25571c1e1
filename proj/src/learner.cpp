#include "bmdp/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bmdp/improve.hpp"
#include "bmdp/misclassification.hpp"
#include "bmdp/spectral.hpp"

namespace bmdp {

namespace {

constexpr std::uint64_t kClusterStream = 0x636c7573;
constexpr std::uint64_t kConsistencyEvery = 1000;
constexpr double kOptimismSlack = 1e-9;

double guard(Count c) { return static_cast<double>(std::max<Count>(1, c)); }

// Fills V_h and the greedy policy row for every context from q[h][x][.].
void finish_round(std::size_t h, std::size_t n, std::size_t A, OptimisticValues& out) {
  for (std::size_t x = 0; x < n; ++x) {
    const double* qrow = &out.values.q[(h * n + x) * A];
    out.values.v[h * n + x] = *std::max_element(qrow, qrow + A);
    greedy_row(qrow, A, &out.policy.probs[(h * n + x) * A]);
  }
}

OptimisticValues blank(std::size_t H, std::size_t n, std::size_t A) {
  OptimisticValues out;
  out.values.horizon = H;
  out.values.n_contexts = n;
  out.values.n_actions = A;
  out.values.v.assign((H + 1) * n, 0.0);
  out.values.q.assign(H * n * A, 0.0);
  out.policy.horizon = H;
  out.policy.n_contexts = n;
  out.policy.n_actions = A;
  out.policy.probs.assign(H * n * A, 0.0);
  return out;
}

void check_rewards(const std::vector<double>& rewards, std::size_t H, std::size_t n, std::size_t A) {
  if (rewards.size() != H * n * A) throw std::invalid_argument("reward table has wrong size");
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::bucbvi: return "bucbvi";
    case Algorithm::ucbvi_ch: return "ucbvi_ch";
    case Algorithm::ucbvi_bf: return "ucbvi_bf";
    case Algorithm::uniform: return "uniform";
  }
  return "?";
}

std::string display_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::bucbvi: return "BUCBVI";
    case Algorithm::ucbvi_ch: return "UCBVI-CH";
    case Algorithm::ucbvi_bf: return "UCBVI-BF";
    case Algorithm::uniform: return "Uniform";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::bucbvi, Algorithm::ucbvi_ch, Algorithm::ucbvi_bf, Algorithm::uniform}) {
    if (name == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string to_string(Phase phase) { return phase == Phase::explore ? "explore" : "exploit"; }

void check_config(const LearnerConfig& c) {
  if (!(c.bonus_scale > 0.0) || !std::isfinite(c.bonus_scale)) throw std::invalid_argument("bonus_scale must be positive");
  if (!(c.bf_c1 >= 0.0) || !(c.bf_c2 >= 0.0)) throw std::invalid_argument("Bernstein constants must be nonnegative");
}

Json config_to_json(const LearnerConfig& c) {
  return Json{{"algorithm", to_string(c.algorithm)}, {"theta_clust", c.theta_clust}, {"bonus_scale", c.bonus_scale},
              {"seed", c.seed}, {"bf_c1", c.bf_c1}, {"bf_c2", c.bf_c2}};
}

LearnerConfig config_from_json(const Json& doc) {
  LearnerConfig c;
  c.algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
  c.theta_clust = doc.at("theta_clust").get<std::uint64_t>();
  c.bonus_scale = doc.at("bonus_scale").get<double>();
  c.seed = doc.at("seed").get<std::uint64_t>();
  c.bf_c1 = doc.at("bf_c1").get<double>();
  c.bf_c2 = doc.at("bf_c2").get<double>();
  check_config(c);
  return c;
}

std::uint64_t default_theta_clust(std::size_t n, std::size_t S, std::size_t A, std::size_t H) {
  const double ln = std::log(static_cast<double>(n));
  const double raw = static_cast<double>(n) * std::pow(static_cast<double>(S), 3) * static_cast<double>(A) * ln * ln;
  const auto h = static_cast<double>(H);
  return static_cast<std::uint64_t>(std::ceil(raw / h) * h);
}

// ---------------------------------------------------------------------------
// RunningCounts

RunningCounts::RunningCounts(std::size_t n, std::size_t A)
    : context_(n, A), pair_dense_(A, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))) {}

void RunningCounts::add(std::size_t x, std::size_t a, std::size_t y) {
  context_.add(x, a, y);
  pair_dense_[a](static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) += 1.0;
  if (S_ > 0) {
    const std::size_t s = labels_[x], t = labels_[y];
    ++latent_out_[s * n_actions() + a];
    ++latent_pair_[(s * n_actions() + a) * S_ + t];
    ++latent_in_[t];
  }
}

void RunningCounts::add_episode(const EpisodeTrajectory& ep) {
  for (std::size_t h = 0; h < ep.actions.size(); ++h) add(ep.contexts[h], ep.actions[h], ep.contexts[h + 1]);
}

void RunningCounts::relabel(const std::vector<std::size_t>& labels, std::size_t S) {
  const std::size_t n = n_contexts(), A = n_actions();
  if (labels.size() != n || S == 0) throw std::invalid_argument("relabel: bad labeling");
  for (std::size_t l : labels) {
    if (l >= S) throw std::invalid_argument("relabel: label out of range");
  }
  S_ = S;
  labels_ = labels;
  latent_out_.assign(S * A, 0);
  latent_pair_.assign(S * A * S, 0);
  latent_in_.assign(S, 0);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t x = 0; x < n; ++x) {
      const Count* row = context_.row(a, x);
      Count* dst = &latent_pair_[(labels[x] * A + a) * S];
      for (std::size_t y = 0; y < n; ++y) dst[labels[y]] += row[y];
      latent_out_[labels[x] * A + a] += context_.out_by_action(x, a);
    }
  }
  for (std::size_t y = 0; y < n; ++y) latent_in_[labels[y]] += context_.in_degree(y);
}

bool RunningCounts::consistent() const {
  if (S_ == 0) return true;
  RunningCounts fresh(0, 0);
  fresh.context_ = context_;
  fresh.pair_dense_.clear();
  fresh.relabel(labels_, S_);
  return fresh.latent_out_ == latent_out_ && fresh.latent_pair_ == latent_pair_ && fresh.latent_in_ == latent_in_;
}

// ---------------------------------------------------------------------------
// Estimates and bonuses

BlockKernelEstimate estimate_block_kernel(const RunningCounts& c) {
  if (!c.labeled()) throw std::logic_error("estimate_block_kernel: counts carry no labeling");
  const std::size_t S = c.n_states(), A = c.n_actions(), n = c.n_contexts();
  BlockKernelEstimate e{S, A, std::vector<double>(S * A * S), std::vector<double>(n)};
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const double den = guard(c.latent_out(s, a));
      for (std::size_t t = 0; t < S; ++t) e.p[(s * A + a) * S + t] = static_cast<double>(c.latent_pair(s, a, t)) / den;
    }
  }
  for (std::size_t y = 0; y < n; ++y) {
    e.q[y] = static_cast<double>(c.context_in(y)) / guard(c.latent_in(c.labels()[y]));
  }
  return e;
}

double bonus(const RunningCounts& c, const BlockKernelEstimate& e, std::size_t s, std::size_t a, std::uint64_t T,
             std::size_t H, const BonusOptions& options) {
  const double h2 = static_cast<double>(H) * static_cast<double>(H);
  const double S = static_cast<double>(c.n_states()), A = static_cast<double>(c.n_actions());
  const double T2 = static_cast<double>(T) * static_cast<double>(T);
  double b = std::sqrt(h2 * std::log(2.0 * static_cast<double>(H) * S * A * T2) / guard(c.latent_out(s, a)));
  if (options.transition_term) {
    const double log_in = std::log(2.0 * static_cast<double>(H) * S * T2);
    for (std::size_t t = 0; t < c.n_states(); ++t) {
      const double p = e.p_at(s, a, t);
      if (p > 0.0) b += p * std::sqrt(h2 * log_in / guard(c.latent_in(t)));
    }
  }
  return options.scale * b;
}

double context_bonus(Count visits, std::size_t n, std::size_t A, std::uint64_t T, std::size_t H, double scale) {
  const double h = static_cast<double>(H);
  const double T2 = static_cast<double>(T) * static_cast<double>(T);
  const double L = std::log(2.0 * h * static_cast<double>(n) * static_cast<double>(A) * T2);
  return scale * std::sqrt(h * h * L / guard(visits));
}

OptimisticValues compute_q_values(const RunningCounts& c, const std::vector<double>& rewards, std::size_t H,
                                  std::uint64_t T, const BonusOptions& options) {
  const std::size_t n = c.n_contexts(), A = c.n_actions(), S = c.n_states();
  check_rewards(rewards, H, n, A);
  if (T == 0) throw std::invalid_argument("compute_q_values: T must be positive");
  const BlockKernelEstimate e = estimate_block_kernel(c);
  const auto& labels = c.labels();

  std::vector<double> b(S * A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) b[s * A + a] = bonus(c, e, s, a, T, H, options);
  }

  OptimisticValues out = blank(H, n, A);
  std::vector<double> w(S), pw(S * A);
  for (std::size_t hh = H; hh-- > 0;) {
    const double* r = &rewards[hh * n * A];
    double* q = &out.values.q[hh * n * A];
    if (hh + 1 == H) {
      std::copy(r, r + n * A, q);
    } else {
      const double* v_next = &out.values.v[(hh + 1) * n];
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t y = 0; y < n; ++y) w[labels[y]] += e.q[y] * v_next[y];
      for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
          double acc = 0.0;
          for (std::size_t t = 0; t < S; ++t) acc += e.p_at(s, a, t) * w[t];
          pw[s * A + a] = acc;
        }
      }
      for (std::size_t x = 0; x < n; ++x) {
        const std::size_t s = labels[x];
        for (std::size_t a = 0; a < A; ++a) {
          q[x * A + a] = std::min(1.0, r[x * A + a] + b[s * A + a]) + pw[s * A + a];
        }
      }
    }
    finish_round(hh, n, A, out);
  }
  return out;
}

OptimisticValues baseline_q_values(const RunningCounts& c, const std::vector<double>& rewards, std::size_t H,
                                   std::uint64_t T, const LearnerConfig& config) {
  if (config.algorithm != Algorithm::ucbvi_ch && config.algorithm != Algorithm::ucbvi_bf) {
    throw std::invalid_argument("baseline_q_values: not a baseline algorithm");
  }
  const std::size_t n = c.n_contexts(), A = c.n_actions();
  check_rewards(rewards, H, n, A);
  if (T == 0) throw std::invalid_argument("baseline_q_values: T must be positive");
  const bool bernstein = config.algorithm == Algorithm::ucbvi_bf;
  const double h = static_cast<double>(H);
  const double T2 = static_cast<double>(T) * static_cast<double>(T);
  const double L = std::log(2.0 * h * static_cast<double>(n) * static_cast<double>(A) * T2);

  OptimisticValues out = blank(H, n, A);
  Eigen::VectorXd v_next(static_cast<Eigen::Index>(n)), v_sq(static_cast<Eigen::Index>(n));
  Eigen::VectorXd mean(static_cast<Eigen::Index>(n)), second(static_cast<Eigen::Index>(n));
  for (std::size_t hh = H; hh-- > 0;) {
    const double* r = &rewards[hh * n * A];
    double* q = &out.values.q[hh * n * A];
    if (hh + 1 == H) {
      std::copy(r, r + n * A, q);
    } else {
      for (std::size_t y = 0; y < n; ++y) v_next[static_cast<Eigen::Index>(y)] = out.values.v[(hh + 1) * n + y];
      if (bernstein) v_sq = v_next.cwiseProduct(v_next);
      for (std::size_t a = 0; a < A; ++a) {
        mean.noalias() = c.pair_matrix(a) * v_next;
        if (bernstein) second.noalias() = c.pair_matrix(a) * v_sq;
        for (std::size_t x = 0; x < n; ++x) {
          const double N = guard(c.context_out(x, a));
          const double pv = mean[static_cast<Eigen::Index>(x)] / N;
          double b;
          if (bernstein) {
            const double var = std::max(0.0, second[static_cast<Eigen::Index>(x)] / N - pv * pv);
            b = config.bonus_scale * (config.bf_c1 * std::sqrt(L * var / N) + config.bf_c2 * h * L / N);
          } else {
            b = config.bonus_scale * std::sqrt(h * h * L / N);
          }
          q[x * A + a] = std::min(1.0, r[x * A + a] + b) + pv;
        }
      }
    }
    finish_round(hh, n, A, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Learner

Learner::Learner(const Bmdp& model, const ValueTable& optimal, LearnerConfig config)
    : model_(&model),
      optimal_(&optimal),
      config_(config),
      rng_(config.seed),
      counts_(model.n_contexts, model.n_actions) {
  check_config(config_);
  uniform_regret_ = expected_regret_of(model, optimal,
                                       TabularPolicy::uniform(model.horizon, model.n_contexts, model.n_actions));
}

Phase Learner::phase() const {
  if (config_.algorithm == Algorithm::uniform) return Phase::explore;
  if (config_.algorithm == Algorithm::bucbvi && !decoding_) return Phase::explore;
  return Phase::exploit;
}

void Learner::cluster() {
  const Bmdp& m = *model_;
  const std::uint64_t seed = Rng::stream(config_.seed, kClusterStream).next_u64();
  const std::size_t T = k_ * m.horizon;
  const SpectralResult spectral = spectral_cluster(counts_.context(), T, m.n_states, seed);
  try {
    decoding_ = improve_clusters(counts_.context(), spectral.estimate, m.n_states);
  } catch (const std::exception& e) {
    note_ = std::string("improvement failed, keeping spectral labels: ") + e.what();
    decoding_ = spectral.estimate;
  }
  counts_.relabel(decoding_->labels, m.n_states);
  exact_ = misclassification(decoding_->labels, m.decoding, m.n_states).count == 0;
}

TabularPolicy Learner::play_policy(double& regret) {
  const Bmdp& m = *model_;
  const std::uint64_t k = k_ + 1;
  const std::uint64_t T = k * m.horizon;
  bool optimistic = false;
  OptimisticValues ov;
  switch (config_.algorithm) {
    case Algorithm::uniform:
      break;
    case Algorithm::bucbvi:
      if (T <= config_.theta_clust) break;
      if (!decoding_) cluster();
      ov = compute_q_values(counts_, m.rewards, m.horizon, T, BonusOptions{config_.bonus_scale, true});
      optimistic = true;
      break;
    case Algorithm::ucbvi_ch:
    case Algorithm::ucbvi_bf:
      ov = baseline_q_values(counts_, m.rewards, m.horizon, T, config_);
      optimistic = true;
      break;
  }
  if (!optimistic) {
    regret = uniform_regret_;
    return TabularPolicy::uniform(m.horizon, m.n_contexts, m.n_actions);
  }
  if (config_.algorithm != Algorithm::bucbvi || exact_) {
    const std::size_t cells = m.horizon * m.n_contexts;
    optimism_.checked += cells;
    for (std::size_t i = 0; i < cells; ++i) {
      if (ov.values.v[i] < optimal_->v[i] - kOptimismSlack) ++optimism_.violations;
    }
  }
  regret = expected_regret_of(m, *optimal_, ov.policy);
  return std::move(ov.policy);
}

const EpisodeRecord& Learner::step() {
  const Bmdp& m = *model_;
  EpisodeRecord rec;
  const TabularPolicy policy = play_policy(rec.regret);
  const EpisodeTrajectory ep = sample_episode(m, policy, rng_);
  for (std::size_t h = 0; h < m.horizon; ++h) rec.sampled_return += m.r(h, ep.contexts[h], ep.actions[h]);
  counts_.add_episode(ep);
  ++k_;
  if (k_ % kConsistencyEvery == 0 && !counts_.consistent()) {
    throw std::logic_error("latent counts drifted from context counts");
  }
  rec.episode = k_;
  rec.elapsed = k_ * m.horizon;
  rec.cumulative = (records_.empty() ? 0.0 : records_.back().cumulative) + rec.regret;
  rec.phase = (config_.algorithm == Algorithm::uniform ||
               (config_.algorithm == Algorithm::bucbvi && rec.elapsed <= config_.theta_clust))
                  ? Phase::explore
                  : Phase::exploit;
  rec.clustering_exact = exact_;
  records_.push_back(rec);
  return records_.back();
}

RunResult run_learner(const Bmdp& model, const LearnerConfig& config, std::size_t K) {
  if (K == 0) throw std::invalid_argument("run_learner: K must be positive");
  require_valid(model);
  const ValueTable optimal = optimal_values(model).values;
  Learner learner(model, optimal, config);
  for (std::size_t k = 0; k < K; ++k) learner.step();
  return RunResult{learner.records(), learner.optimism(), learner.decoding(), learner.clustering_note()};
}

}  // namespace bmdp
