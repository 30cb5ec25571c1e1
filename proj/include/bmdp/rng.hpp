#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace bmdp {

/// xoshiro256** (Blackman & Vigna) seeded through SplitMix64.
///
/// All samplers below are implemented here rather than through <random>
/// distributions, whose algorithms differ between standard libraries, so a
/// seed reproduces the same stream on every platform.
class Rng {
 public:
  using result_type = std::uint64_t;
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0);

  static Rng from_state(const State& state);
  const State& state() const { return state_; }

  /// Independent child stream: SplitMix64(seed ^ mix(stream)). Deterministic
  /// in (seed, stream) and does not advance the parent.
  static Rng stream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  std::uint64_t operator()() { return next_u64(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on {0, ..., bound - 1}; unbiased (Lemire's method).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller (no cached spare, so the state alone
  /// determines the stream).
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the
  /// U^(1/shape) boost.
  double gamma(double shape);
  /// Symmetric Dirichlet(alpha, ..., alpha) of dimension k via normalized
  /// Gamma draws.
  std::vector<double> dirichlet(double alpha, std::size_t k);
  /// Index drawn with probability proportional to weights (need not be
  /// normalized). Falls back to the last positive entry on rounding.
  std::size_t categorical(std::span<const double> weights);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  State state_{};
};

std::uint64_t splitmix64(std::uint64_t& x);

}  // namespace bmdp
