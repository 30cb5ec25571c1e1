#define BOOST_TEST_MODULE model
#include <boost/test/unit_test.hpp>

#include <cmath>
#include <filesystem>

#include "bmdp/instance_gen.hpp"
#include "bmdp/model.hpp"
#include "bmdp/model_io.hpp"
#include "oracles/random_models.hpp"
#include "oracles/trajectory_enumeration.hpp"

using namespace bmdp;

namespace {

// Two states, identity decoding on four contexts split 2/2.
Bmdp two_state_model() {
  Bmdp m;
  m.n_contexts = 4;
  m.n_states = 2;
  m.n_actions = 2;
  m.horizon = 3;
  m.decoding = {0, 0, 1, 1};
  m.latent_kernel = {0.9, 0.1, 0.2, 0.8, 0.5, 0.5, 0.3, 0.7};
  m.emission = {0.25, 0.75, 0, 0, 0, 0, 0.6, 0.4};
  m.initial_dist = {0.25, 0.25, 0.25, 0.25};
  m.rewards.assign(3 * 4 * 2, 0.0);
  for (std::size_t x = 0; x < 4; ++x) {
    for (std::size_t h = 0; h < 3; ++h) m.rewards[(h * 4 + x) * 2 + 1] = x >= 2 ? 1.0 : 0.2;
  }
  return m;
}

}  // namespace

BOOST_AUTO_TEST_SUITE(validation)

BOOST_AUTO_TEST_CASE(well_formed_model_has_no_violations) { BOOST_TEST(validate(two_state_model()).empty()); }

BOOST_AUTO_TEST_CASE(emission_outside_block_is_reported) {
  Bmdp m = two_state_model();
  m.emission[0 * 4 + 2] = 0.1;
  m.emission[0 * 4 + 1] = 0.65;
  const auto v = validate(m);
  BOOST_REQUIRE_EQUAL(v.size(), 1u);
  BOOST_TEST(v[0].field == "q");
  BOOST_TEST(v[0].indices == std::vector<std::size_t>({0, 2}), boost::test_tools::per_element());
}

BOOST_AUTO_TEST_CASE(short_row_reports_deficit) {
  Bmdp m = two_state_model();
  m.latent_kernel[1] = 0.08;
  const auto v = validate(m);
  BOOST_REQUIRE_EQUAL(v.size(), 1u);
  BOOST_TEST(v[0].field == "p");
  BOOST_TEST(v[0].magnitude == 0.02, boost::test_tools::tolerance(1e-12));
}

BOOST_AUTO_TEST_CASE(reward_out_of_range_and_empty_state) {
  Bmdp m = two_state_model();
  m.rewards[0] = 1.5;
  BOOST_TEST(validate(m).size() == 1u);
  m = two_state_model();
  m.decoding = {0, 0, 0, 0};
  m.emission = {0.25, 0.25, 0.25, 0.25, 0, 0, 0, 0};
  bool empty_state = false;
  for (const auto& v : validate(m)) empty_state |= v.field == "f";
  BOOST_TEST(empty_state);
  BOOST_CHECK_THROW(require_valid(m), std::invalid_argument);
}

BOOST_AUTO_TEST_SUITE_END()

BOOST_AUTO_TEST_SUITE(kernel)

BOOST_AUTO_TEST_CASE(single_state_kernel_is_emission) {
  Rng rng(3);
  const Bmdp m = oracle::random_bmdp(rng, 5, 1, 2, 2);
  for (std::size_t x = 0; x < 5; ++x) {
    for (std::size_t a = 0; a < 2; ++a) {
      const auto P = full_kernel(m, x, a);
      for (std::size_t y = 0; y < 5; ++y) BOOST_TEST(P[y] == m.q(0, y));
    }
  }
}

BOOST_AUTO_TEST_CASE(identity_decoding_product) {
  Bmdp m;
  m.n_contexts = 2;
  m.n_states = 2;
  m.n_actions = 1;
  m.horizon = 1;
  m.decoding = {0, 1};
  m.latent_kernel = {0.3, 0.7, 0.5, 0.5};
  m.emission = {1, 0, 0, 1};
  m.initial_dist = {0.5, 0.5};
  m.rewards = {0, 0};
  BOOST_TEST(full_kernel(m, 0, 0)[1] == 0.7);
}

BOOST_AUTO_TEST_CASE(hard_instance_entry_with_positive_packing) {
  HardInstanceSpec spec{96, 8, 4, 3, 0.05, 0.05, 0.3, {}, 11};
  const Bmdp m = build_hard_bmdp(spec);
  const Packing pk = packing_vectors(8, Rng::stream(11, 2).next_u64());
  std::size_t x = 0;
  while (m.decoding[x] != 0) ++x;
  // A non-optimal action for state 0 puts mass exactly 1/2 on S_1.
  std::size_t a = 0;
  for (; a < 4; ++a) {
    double mass = 0.0;
    for (std::size_t t = 4; t < 8; ++t) mass += m.p(0, a, t);
    if (std::abs(mass - 0.5) < 1e-12) break;
  }
  BOOST_REQUIRE(a < 4);
  const auto P = full_kernel(m, x, a);
  std::size_t size0 = 0;
  for (std::size_t s : m.decoding) size0 += s == 0 ? 1 : 0;
  std::size_t y = 0;
  while (m.decoding[y] != 0) ++y;
  const double kappa = 0.3, S = 8.0;
  BOOST_TEST(pk.vectors[0][0] == 1.0);
  BOOST_TEST(P[y] == 0.5 * (2.0 / S) * (1.0 + kappa) / static_cast<double>(size0), boost::test_tools::tolerance(1e-12));
  double block_mass = 0.0;
  for (std::size_t z = 0; z < m.n_contexts; ++z) block_mass += m.decoding[z] == 0 ? P[z] : 0.0;
  BOOST_TEST(block_mass == m.p(0, a, 0), boost::test_tools::tolerance(1e-12));
}

BOOST_AUTO_TEST_CASE(block_property_and_normalization) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Bmdp m = oracle::random_bmdp(rng, 7, 3, 2, 2);
    for (std::size_t x = 0; x < 7; ++x) {
      for (std::size_t a = 0; a < 2; ++a) {
        const auto P = full_kernel(m, x, a);
        double sum = 0.0;
        for (double p : P) sum += p;
        BOOST_TEST(sum == 1.0, boost::test_tools::tolerance(1e-12));
        for (std::size_t x2 = 0; x2 < 7; ++x2) {
          if (m.decoding[x2] == m.decoding[x]) BOOST_TEST((full_kernel(m, x2, a) == P));
        }
      }
    }
  }
  BOOST_CHECK_THROW(full_kernel(two_state_model(), 4, 0), std::out_of_range);
}

BOOST_AUTO_TEST_SUITE_END()

BOOST_AUTO_TEST_SUITE(sampling)

BOOST_AUTO_TEST_CASE(deterministic_chain) {
  Bmdp m;
  m.n_contexts = 3;
  m.n_states = 3;
  m.n_actions = 1;
  m.horizon = 4;
  m.decoding = {0, 1, 2};
  m.latent_kernel = {0, 1, 0, 0, 0, 1, 1, 0, 0};
  m.emission = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  m.initial_dist = {1, 0, 0};
  m.rewards.assign(12, 0.5);
  Rng rng(1);
  const auto ep = sample_episode(m, TabularPolicy::uniform(4, 3, 1), rng);
  BOOST_TEST(ep.contexts == std::vector<std::size_t>({0, 1, 2, 0, 1}), boost::test_tools::per_element());
  BOOST_TEST(ep.actions == std::vector<std::size_t>({0, 0, 0, 0}), boost::test_tools::per_element());
}

BOOST_AUTO_TEST_CASE(same_seed_same_trajectory) {
  Rng gen(9);
  const Bmdp m = oracle::random_bmdp(gen, 6, 2, 3, 5);
  const auto pi = oracle::random_policy(gen, 5, 6, 3);
  Rng r1(42), r2(42);
  for (int i = 0; i < 10; ++i) BOOST_TEST((sample_episode(m, pi, r1) == sample_episode(m, pi, r2)));
}

BOOST_AUTO_TEST_CASE(transition_frequencies_match_kernel) {
  Rng gen(10);
  const Bmdp m = oracle::random_bmdp(gen, 6, 2, 2, 1);
  const auto P = full_kernel(m, 2, 1);
  Rng rng(77);
  const int draws = 100000;
  std::vector<int> hits(6, 0);
  for (int i = 0; i < draws; ++i) ++hits[sample_transition(m, 2, 1, rng)];
  for (std::size_t y = 0; y < 6; ++y) {
    const double sigma = std::sqrt(P[y] * (1 - P[y]) / draws);
    BOOST_TEST(std::abs(hits[y] / static_cast<double>(draws) - P[y]) <= 3 * sigma + 1e-12);
  }
}

BOOST_AUTO_TEST_CASE(monte_carlo_return_converges) {
  Rng gen(12);
  const Bmdp m = oracle::random_bmdp(gen, 5, 2, 2, 3);
  const auto pi = oracle::random_policy(gen, 3, 5, 2);
  const auto vt = evaluate_policy(m, pi);
  double expected = 0.0;
  for (std::size_t x = 0; x < 5; ++x) expected += m.initial_dist[x] * vt.value(0, x);
  Rng rng(13);
  const int episodes = 40000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < episodes; ++i) {
    const auto ep = sample_episode(m, pi, rng);
    double g = 0.0;
    for (std::size_t h = 0; h < 3; ++h) g += m.r(h, ep.contexts[h], ep.actions[h]);
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / episodes;
  const double sd = std::sqrt((sum2 / episodes - mean * mean) / episodes);
  BOOST_TEST(std::abs(mean - expected) <= 3 * sd);
}

BOOST_AUTO_TEST_SUITE_END()

BOOST_AUTO_TEST_SUITE(values)

BOOST_AUTO_TEST_CASE(horizon_one_is_expected_reward) {
  Rng gen(20);
  const Bmdp m = oracle::random_bmdp(gen, 4, 2, 3, 1);
  const auto pi = oracle::random_policy(gen, 1, 4, 3);
  const auto vt = evaluate_policy(m, pi);
  for (std::size_t x = 0; x < 4; ++x) {
    double e = 0.0;
    for (std::size_t a = 0; a < 3; ++a) e += pi(0, x, a) * m.r(0, x, a);
    BOOST_TEST(vt.value(0, x) == e, boost::test_tools::tolerance(1e-14));
  }
}

BOOST_AUTO_TEST_CASE(evaluation_matches_trajectory_enumeration) {
  Rng gen(21);
  const Bmdp m = oracle::random_bmdp(gen, 4, 2, 2, 3);
  const auto pi = oracle::random_policy(gen, 3, 4, 2);
  const auto vt = evaluate_policy(m, pi);
  for (std::size_t x = 0; x < 4; ++x) {
    BOOST_TEST(std::abs(vt.value(0, x) - oracle::policy_value(m, pi, 0, x)) <= 1e-12);
  }
}

BOOST_AUTO_TEST_CASE(unit_rewards_give_remaining_steps) {
  Rng gen(22);
  Bmdp m = oracle::random_bmdp(gen, 5, 3, 2, 4);
  std::fill(m.rewards.begin(), m.rewards.end(), 1.0);
  const auto vt = evaluate_policy(m, oracle::random_policy(gen, 4, 5, 2));
  for (std::size_t h = 0; h <= 4; ++h) {
    for (std::size_t x = 0; x < 5; ++x) BOOST_TEST(vt.value(h, x) == static_cast<double>(4 - h), boost::test_tools::tolerance(1e-12));
  }
}

BOOST_AUTO_TEST_CASE(optimal_dominates_random_policies) {
  Rng gen(23);
  const Bmdp m = oracle::random_bmdp(gen, 6, 3, 3, 4);
  const auto opt = optimal_values(m);
  const auto again = evaluate_policy(m, opt.policy);
  for (std::size_t i = 0; i < opt.values.v.size(); ++i) BOOST_TEST(std::abs(again.v[i] - opt.values.v[i]) <= 1e-12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto vt = evaluate_policy(m, oracle::random_policy(gen, 4, 6, 3));
    for (std::size_t i = 0; i < vt.v.size(); ++i) BOOST_TEST(vt.v[i] <= opt.values.v[i] + 1e-12);
  }
  for (std::size_t h = 0; h < 4; ++h) {
    for (std::size_t x = 0; x < 6; ++x) {
      for (std::size_t a = 0; a < 3; ++a) {
        const double q = opt.values.qvalue(h, x, a);
        BOOST_TEST((q >= 0.0 && q <= static_cast<double>(4 - h) + 1e-12));
      }
    }
  }
}

BOOST_AUTO_TEST_CASE(ties_split_uniformly) {
  double q[3] = {1.0, 1.0 - 1e-14, 0.5};
  double out[3];
  greedy_row(q, 3, out);
  BOOST_TEST(out[0] == 0.5);
  BOOST_TEST(out[1] == 0.5);
  BOOST_TEST(out[2] == 0.0);
}

BOOST_AUTO_TEST_CASE(hard_instance_last_round_and_gap) {
  HardInstanceSpec spec{96, 8, 4, 5, 0.07, 0.07, 0.3, {}, 4};
  const Bmdp m = build_hard_bmdp(spec);
  const auto opt = optimal_values(m);
  const std::size_t H = m.horizon;
  for (std::size_t x = 0; x < m.n_contexts; ++x) {
    BOOST_TEST(opt.values.value(H - 1, x) == (in_rewarding_half(m.decoding[x], 8) ? 1.0 : 0.0));
  }
  for (std::size_t h = 0; h + 1 < H; ++h) {
    for (std::size_t x = 0; x < m.n_contexts; ++x) {
      std::size_t optimal_count = 0;
      for (std::size_t a = 0; a < 4; ++a) {
        const double gap = opt.values.value(h, x) - opt.values.qvalue(h, x, a);
        if (gap < 1e-12) {
          ++optimal_count;
        } else {
          BOOST_TEST(std::abs(gap - 0.07) <= 1e-12);
        }
      }
      BOOST_TEST(optimal_count == 1u);
    }
  }
}

BOOST_AUTO_TEST_CASE(regret_properties) {
  Rng gen(24);
  const Bmdp m = oracle::random_bmdp(gen, 5, 2, 2, 3);
  const auto opt = optimal_values(m);
  BOOST_TEST(std::abs(expected_regret_of(m, opt.policy)) <= 1e-12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pi = oracle::random_policy(gen, 3, 5, 2);
    const double reg = expected_regret_of(m, pi);
    BOOST_TEST((reg >= 0.0 && reg <= 3.0));
    double brute = 0.0;
    for (std::size_t x = 0; x < 5; ++x) {
      brute += m.initial_dist[x] * (oracle::optimal_value(m, 0, x) - oracle::policy_value(m, pi, 0, x));
    }
    BOOST_TEST(std::abs(reg - brute) <= 1e-12);
  }
}

BOOST_AUTO_TEST_CASE(uniform_regret_on_hard_instance) {
  HardInstanceSpec spec{96, 8, 4, 3, 0.1, 0.1, 0.2, {}, 8};
  const Bmdp m = build_hard_bmdp(spec);
  const auto pi = TabularPolicy::uniform(3, 96, 4);
  const auto opt = optimal_values(m).values;
  const auto played = evaluate_policy(m, pi);
  double expected = 0.0;
  for (std::size_t x = 0; x < 96; ++x) expected += (opt.value(0, x) - played.value(0, x)) / 96.0;
  BOOST_TEST(std::abs(expected_regret_of(m, pi) - expected) <= 1e-12);
  // Rounds 1 and 2 each pick a worse action w.p. 3/4, costing eps each.
  BOOST_TEST(std::abs(expected - 2 * 0.75 * 0.1) <= 1e-12);
}

BOOST_AUTO_TEST_SUITE_END()

BOOST_AUTO_TEST_SUITE(serialization)

BOOST_AUTO_TEST_CASE(json_round_trip_is_exact) {
  Rng gen(30);
  const Bmdp m = oracle::random_bmdp(gen, 7, 3, 2, 4);
  BOOST_TEST((model_from_json(model_to_json(m)) == m));
  const auto path = std::filesystem::temp_directory_path() / "bmdp_model_roundtrip.json";
  write_model(m, path);
  BOOST_TEST((read_model(path) == m));
  BOOST_TEST(model_hash(read_model(path)) == model_hash(m));
  std::filesystem::remove(path);
}

BOOST_AUTO_TEST_CASE(malformed_documents_are_rejected) {
  Json doc = model_to_json(two_state_model());
  doc["f"] = Json::array({0, 1});
  BOOST_CHECK_THROW(model_from_json(doc), std::invalid_argument);
}

BOOST_AUTO_TEST_SUITE_END()
