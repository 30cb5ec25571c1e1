#include "bmdp/instance_gen.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace bmdp {

double DirichletSpec::effective_q_alpha() const {
  return q_alpha > 0.0 ? q_alpha : std::sqrt(static_cast<double>(n));
}

Bmdp gen_dirichlet(const DirichletSpec& spec) {
  if (spec.n == 0 || spec.S == 0 || spec.A == 0 || spec.H == 0) throw SpecError("dirichlet: sizes must be positive");
  if (spec.S > spec.n) throw SpecError("dirichlet: need S <= n");
  if (!(spec.p_alpha > 0.0)) throw SpecError("dirichlet: p_alpha must be positive");
  const double q_alpha = spec.effective_q_alpha();
  if (!(q_alpha > 0.0)) throw SpecError("dirichlet: q_alpha must be positive");

  const std::size_t n = spec.n, S = spec.S, A = spec.A, H = spec.H;
  // Contiguous blocks; the first n mod S states take one extra context.
  std::vector<std::size_t> first(S + 1, 0);
  for (std::size_t s = 0; s < S; ++s) first[s + 1] = first[s] + n / S + (s < n % S ? 1 : 0);
  Rng rng(spec.seed);

  Bmdp m;
  m.n_contexts = n;
  m.n_states = S;
  m.n_actions = A;
  m.horizon = H;
  m.decoding.resize(n);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t y = first[s]; y < first[s + 1]; ++y) m.decoding[y] = s;
  }

  m.latent_kernel.resize(S * A * S);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const auto row = rng.dirichlet(spec.p_alpha, S);
      std::copy(row.begin(), row.end(), m.latent_kernel.begin() + static_cast<std::ptrdiff_t>((s * A + a) * S));
    }
  }
  m.emission.assign(S * n, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t size = first[s + 1] - first[s];
    const auto row = rng.dirichlet(q_alpha, size);
    for (std::size_t j = 0; j < size; ++j) m.emission[s * n + first[s] + j] = row[j];
  }
  m.initial_dist.assign(n, 1.0 / static_cast<double>(n));
  m.rewards.resize(H * n * A);
  for (auto& r : m.rewards) r = rng.uniform();
  return m;
}

namespace {

void check_class_sizes(std::size_t S) {
  if (S % 4 != 0 || S / 4 < 2) throw SpecError("hard class requires S/4 to be an integer >= 2");
}

}  // namespace

void check_hard_spec(const HardInstanceSpec& spec) {
  check_class_sizes(spec.S);
  std::ostringstream err;
  if (spec.A < spec.S / 2) err << "A >= S/2 required; ";
  if (spec.H < 2) err << "H >= 2 required; ";
  if (spec.S * 4 > spec.n) err << "S <= n/4 required; ";
  for (double e : {spec.eps0, spec.eps1}) {
    if (!(e >= 0.0 && e <= 0.5)) err << "eps must lie in [0, 1/2]; ";
  }
  if (!(spec.kappa > 0.0 && spec.kappa < 1.0)) err << "kappa must lie in (0, 1); ";
  if (!spec.optimal_actions.empty()) {
    if (spec.optimal_actions.size() != spec.S) {
      err << "optimal_actions needs one entry per state; ";
    } else {
      std::vector<bool> used(spec.A, false);
      for (std::size_t s = 0; s < spec.S; ++s) {
        const std::size_t a = spec.optimal_actions[s];
        if (a >= spec.A) {
          err << "optimal action out of range; ";
          break;
        }
        if (in_rewarding_half(s, spec.S)) {
          if (used[a]) err << "optimal actions must be distinct on S_1; ";
          used[a] = true;
        }
      }
    }
  }
  const std::string msg = err.str();
  if (!msg.empty()) throw SpecError("hard instance: " + msg.substr(0, msg.size() - 2));
}

PartitionSizes partition_sizes(std::size_t n_i, std::size_t S) {
  check_class_sizes(S);
  const std::size_t half = S / 2;
  const std::size_t r = n_i - (2 * n_i / S) * half;
  if (36 * r >= S) return {0, half - r, r};
  const std::size_t sixth = S / 6;
  return {sixth, half - 2 * sixth - r, r + sixth};
}

std::vector<std::size_t> build_decoding(std::size_t n, std::size_t S, std::uint64_t seed) {
  check_class_sizes(S);
  if (S * 4 > n) throw SpecError("build_decoding: S <= n/4 required");
  const std::size_t half = S / 2;
  std::vector<std::size_t> f(n);
  Rng rng(seed);
  std::size_t next_context = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t n_i = (i == 0) ? n / 2 : n - n / 2;
    const std::size_t base = n_i / half;
    const PartitionSizes ps = partition_sizes(n_i, S);
    std::vector<std::size_t> sizes;
    sizes.insert(sizes.end(), ps.s_minus, base - 1);
    sizes.insert(sizes.end(), ps.s_zero, base);
    sizes.insert(sizes.end(), ps.s_plus, base + 1);
    rng.shuffle(sizes);
    for (std::size_t j = 0; j < half; ++j) {
      const std::size_t state = i * half + j;
      for (std::size_t c = 0; c < sizes[j]; ++c) f[next_context++] = state;
    }
  }
  return f;
}

Packing packing_vectors(std::size_t S, std::uint64_t seed, std::size_t draw_budget) {
  check_class_sizes(S);
  const std::size_t half = S / 2;
  Packing out;
  out.vectors.assign(S, std::vector<double>(half, 0.0));
  if (S / 4 < 12) {
    const double off = 1.0 / static_cast<double>(half - 1);
    for (std::size_t s = 0; s < S; ++s) {
      const bool upper = in_rewarding_half(s, S);
      const std::size_t pivot = upper ? s - half : s;
      for (std::size_t j = 0; j < half; ++j) {
        if (upper) {
          out.vectors[s][j] = (j == pivot) ? -1.0 : off;
        } else {
          out.vectors[s][j] = (j == pivot) ? 1.0 : -off;
        }
      }
    }
    return out;
  }

  out.randomized = true;
  const double threshold = std::sqrt(3.0 * static_cast<double>(S) * std::log(static_cast<double>(S)));
  Rng rng(seed);
  std::vector<double> candidate(half);
  for (std::size_t j = 0; j < half; ++j) candidate[j] = (j < half / 2) ? 1.0 : -1.0;
  for (std::size_t s = 0; s < S;) {
    if (out.draws >= draw_budget) {
      throw std::runtime_error("packing_vectors: draw budget exhausted after " + std::to_string(out.draws) +
                               " draws (" + std::to_string(s) + " of " + std::to_string(S) + " accepted)");
    }
    rng.shuffle(candidate);
    ++out.draws;
    bool ok = true;
    for (std::size_t t = 0; t < s && ok; ++t) {
      const double ip = std::inner_product(candidate.begin(), candidate.end(), out.vectors[t].begin(), 0.0);
      ok = ip <= threshold;
    }
    if (ok) out.vectors[s++] = candidate;
  }
  return out;
}

Bmdp build_hard_bmdp(const HardInstanceSpec& spec) {
  check_hard_spec(spec);
  const std::size_t n = spec.n, S = spec.S, A = spec.A, H = spec.H, half = S / 2;

  std::vector<std::size_t> a_star = spec.optimal_actions;
  if (a_star.empty()) {
    Rng rng = Rng::stream(spec.seed, 3);
    std::vector<std::size_t> actions(A);
    std::iota(actions.begin(), actions.end(), 0);
    rng.shuffle(actions);
    a_star.resize(S);
    for (std::size_t s = 0; s < half; ++s) a_star[s] = static_cast<std::size_t>(rng.below(A));
    for (std::size_t s = half; s < S; ++s) a_star[s] = actions[s - half];
  }
  const Packing packing = packing_vectors(S, Rng::stream(spec.seed, 2).next_u64());

  Bmdp m;
  m.n_contexts = n;
  m.n_states = S;
  m.n_actions = A;
  m.horizon = H;
  m.decoding = build_decoding(n, S, Rng::stream(spec.seed, 1).next_u64());

  // tilde_p_i(s' | s) = (2/S)(1 + kappa v(s' - i S/2 | s)) on half i.
  auto tilde_p = [&](std::size_t s, std::size_t s_next) {
    const std::size_t j = in_rewarding_half(s_next, S) ? s_next - half : s_next;
    return (2.0 / static_cast<double>(S)) * (1.0 + spec.kappa * packing.vectors[s][j]);
  };
  m.latent_kernel.resize(S * A * S);
  for (std::size_t s = 0; s < S; ++s) {
    const double eps = in_rewarding_half(s, S) ? spec.eps1 : spec.eps0;
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t t = 0; t < S; ++t) {
        double factor = 0.5;
        if (a == a_star[s]) factor = in_rewarding_half(t, S) ? 0.5 * (1.0 + 2.0 * eps) : 0.5 * (1.0 - 2.0 * eps);
        m.latent_kernel[(s * A + a) * S + t] = factor * tilde_p(s, t);
      }
    }
  }

  std::vector<std::size_t> size(S, 0);
  for (auto s : m.decoding) ++size[s];
  m.emission.assign(S * n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    const std::size_t s = m.decoding[y];
    m.emission[s * n + y] = 1.0 / static_cast<double>(size[s]);
  }
  m.initial_dist.assign(n, 1.0 / static_cast<double>(n));
  m.rewards.resize(H * n * A);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t x = 0; x < n; ++x) {
      const double r = in_rewarding_half(m.decoding[x], S) ? 1.0 : 0.0;
      for (std::size_t a = 0; a < A; ++a) m.rewards[(h * n + x) * A + a] = r;
    }
  }
  return m;
}

double hard_eta_closed_form(double eps_max, double kappa) {
  return (1.0 + 2.0 * eps_max) * (1.0 + kappa) / ((1.0 - 2.0 * eps_max) * (1.0 - kappa));
}

double kappa_for_eta(double eta, double eps_max) {
  const double lo = eta * (1.0 - 2.0 * eps_max);
  const double hi = 1.0 + 2.0 * eps_max;
  return (lo - hi) / (lo + hi);
}

}  // namespace bmdp
