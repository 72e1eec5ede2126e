#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "banditfuzz/bandit.hpp"
#include "banditfuzz/rng.hpp"
#include "reference_bandits.hpp"

using namespace bfz;

namespace {

BanditConfig config_for(Algorithm a) {
  BanditConfig cfg;
  cfg.algorithm = a;
  return cfg;
}

// Drives `instance` through `rounds` select/reward cycles against the shared
// fixed reward table, checking state against a reference trace.
void check_against_reference(BanditInstance& instance, const refbandit::RefTrace& ref,
                             RngStream& rng, bool check_probs) {
  const int rounds = static_cast<int>(ref.chosen.size());
  for (int t = 0; t < rounds; ++t) {
    if (check_probs) {
      std::vector<double> p;
      switch (instance.algorithm()) {
        case Algorithm::kDiscountedBoltzmann: p = dbe_probabilities(instance); break;
        case Algorithm::kExp3Ix: p = exp3ix_probabilities(instance); break;
        case Algorithm::kExp3pp: p = exp3pp_probabilities(instance); break;
        default: break;
      }
      REQUIRE(p.size() == ref.probs[t].size());
      for (std::size_t a = 0; a < p.size(); ++a)
        CHECK(p[a] == doctest::Approx(ref.probs[t][a]).epsilon(1e-12));
    }
    const int arm = instance.select_arm(rng);
    REQUIRE(arm == ref.chosen[t]);
    instance.reward(arm, refbandit::fixed_reward(t, arm));
    if (!ref.succ.empty()) {
      for (int a = 0; a < instance.k(); ++a) {
        CHECK(instance.arm_successes(a) == doctest::Approx(ref.succ[t][a]).epsilon(1e-12));
        CHECK(instance.arm_failures(a) == doctest::Approx(ref.fail[t][a]).epsilon(1e-12));
      }
    }
    if (!ref.lhat.empty()) {
      for (int a = 0; a < instance.k(); ++a)
        CHECK(instance.arm_loss_estimate(a) ==
              doctest::Approx(ref.lhat[t][a]).epsilon(1e-12));
    }
  }
}

}  // namespace

TEST_CASE("config defaults match the tuned hyperparameters") {
  BanditConfig cfg;
  CHECK(cfg.c == 0.5);
  CHECK(cfg.prior_alpha == 1.0);
  CHECK(cfg.prior_beta == 1.0);
  CHECK(cfg.gamma == 1.0 - 1e-8);
  CHECK(cfg.adwin_m == 10);
  CHECK(cfg.adwin_delta == 1.0 - 1e-7);
  CHECK(cfg.exp3pp_alpha == 3.0);
  CHECK(cfg.exp3pp_beta == 256.0);
  CHECK(cfg.dbe_temperature == 0.2);
  CHECK(cfg.dbe_gamma == 1.0 - 1e-8);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config rejects non-positive or out-of-range fields") {
  const auto broken = [](auto mod) {
    BanditConfig cfg;
    mod(cfg);
    return cfg;
  };
  CHECK_THROWS_AS(broken([](BanditConfig& c) { c.c = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(broken([](BanditConfig& c) { c.prior_alpha = -1.0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BanditConfig& c) { c.prior_beta = 0.0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BanditConfig& c) { c.gamma = 0.0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BanditConfig& c) { c.gamma = 1.1; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BanditConfig& c) { c.adwin_m = 0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BanditConfig& c) { c.adwin_delta = 1.0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BanditConfig& c) { c.dbe_temperature = 0.0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](BanditConfig& c) { c.exp3pp_alpha = 0.0; }).validate(),
                  std::invalid_argument);
}

TEST_CASE("create_instance rejects K=0 and starts fresh") {
  CHECK_THROWS_AS(create_instance(config_for(Algorithm::kThompson), 0), std::invalid_argument);
  BanditInstance inst = create_instance(config_for(Algorithm::kThompson), 4);
  CHECK(inst.rounds() == 0);
  for (int a = 0; a < 4; ++a) {
    CHECK(inst.arm_pulls(a) == 0);
    const auto [alpha, beta] = inst.posterior(a);
    CHECK(alpha == 1.0);
    CHECK(beta == 1.0);
  }
}

TEST_CASE("fresh symmetric Thompson instance selects every arm near 1/K") {
  BanditInstance inst = create_instance(config_for(Algorithm::kThompson), 7);
  RngStream rng(11);
  std::vector<int> counts(7, 0);
  const int trials = 70000;
  for (int i = 0; i < trials; ++i) counts[inst.select_arm(rng)] += 1;
  for (int a = 0; a < 7; ++a) {
    const double freq = static_cast<double>(counts[a]) / trials;
    CHECK(freq == doctest::Approx(1.0 / 7).epsilon(0.08));
  }
}

TEST_CASE("UCB1 visits all unpulled arms once before comparing indices") {
  BanditInstance inst = create_instance(config_for(Algorithm::kUcb1), 3);
  RngStream rng(1);
  std::vector<int> first;
  for (int i = 0; i < 3; ++i) {
    const int arm = inst.select_arm(rng);
    first.push_back(arm);
    inst.reward(arm, refbandit::fixed_reward(i, arm));
  }
  CHECK(first == std::vector<int>{0, 1, 2});
}

TEST_CASE("EXP3-IX starts from the uniform distribution") {
  BanditInstance inst = create_instance(config_for(Algorithm::kExp3Ix), 8);
  const std::vector<double> p = exp3ix_probabilities(inst);
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 8).epsilon(1e-12));
}

TEST_CASE("single-arm instances always return arm 0") {
  RngStream rng(3);
  for (Algorithm a : all_algorithms()) {
    BanditInstance inst = create_instance(config_for(a), 1);
    for (int i = 0; i < 5; ++i) {
      const int arm = inst.select_arm(rng);
      CHECK(arm == 0);
      inst.reward(arm, i % 2 == 0);
    }
  }
}

TEST_CASE("ucb1_index matches hand arithmetic") {
  const double e = std::exp(1.0);
  CHECK(ucb1_index(0.5, e * e, 4, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ucb1_index(0.0, 1.0, 1.0, 0.7) == doctest::Approx(0.0));
  CHECK(ucb1_index(1.0, e, 1, 0.5) == doctest::Approx(1.0 + std::sqrt(0.5)).epsilon(1e-12));
  // The worked two-arm comparison: at ln t = 2 the fresher arm wins.
  CHECK(ucb1_index(0.5, e * e, 4, 0.5) > ucb1_index(0.2, e * e, 100, 0.5));
  CHECK(ucb1_index(0.2, e * e, 100, 0.5) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(ucb1_index(0.5, 1.0, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("bernoulli_kl closed forms") {
  for (double p : {0.0, 0.25, 0.5, 1.0}) CHECK(bernoulli_kl(p, p == 0.0 ? 0.5 : p == 1.0 ? 0.5 : p) >= 0.0);
  CHECK(bernoulli_kl(0.3, 0.3) == doctest::Approx(0.0));
  CHECK(bernoulli_kl(0.5, 0.75) == doctest::Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-12));
  CHECK(bernoulli_kl(0.0, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(bernoulli_kl(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(bernoulli_kl(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("klucb_upper_bound: boundary, hand case and monotonicity") {
  CHECK(klucb_upper_bound(5, 5, 1) == doctest::Approx(1.0 - 1e-9));
  CHECK(klucb_upper_bound(0, 3, 1) == doctest::Approx(0.0));

  // successes=1, pulls=2, t=e^4: the bound solves 2*KL(0.5,q)=4, checked by a
  // fine grid scan.
  const double t = std::exp(4.0);
  const double bound = klucb_upper_bound(1, 2, t);
  double grid_best = 0.5;
  for (double q = 0.5; q < 1.0 - 1e-9; q += 1e-7) {
    if (2.0 * bernoulli_kl(0.5, q) <= 4.0)
      grid_best = q;
    else
      break;
  }
  CHECK(std::fabs(bound - grid_best) < 2e-6);

  CHECK(klucb_upper_bound(3, 7, 100) >= klucb_upper_bound(3, 7, 10));
  CHECK(klucb_upper_bound(3, 7, 50) <= klucb_upper_bound(3, 5, 50));
  CHECK(klucb_upper_bound(2, 5, 9) >= 2.0 / 5.0);
}

TEST_CASE("reward rejects out-of-range arms and unmatched selections") {
  BanditInstance inst = create_instance(config_for(Algorithm::kThompson), 3);
  RngStream rng(5);
  CHECK_THROWS_AS(inst.reward(3, true), std::out_of_range);
  CHECK_THROWS_AS(inst.reward(0, true), std::logic_error);  // nothing selected yet
  const int arm = inst.select_arm(rng);
  const int other = (arm + 1) % 3;
  CHECK_THROWS_AS(inst.reward(other, true), std::logic_error);
  CHECK_NOTHROW(inst.reward(arm, true));
}

TEST_CASE("Thompson posterior after 3 wins and 1 loss is Beta(4,2)") {
  BanditInstance inst = create_instance(config_for(Algorithm::kThompson), 1);
  RngStream rng(7);
  for (bool r : {true, true, true, false}) {
    inst.reward(inst.select_arm(rng), r);
  }
  const auto [alpha, beta] = inst.posterior(0);
  CHECK(alpha == 4.0);
  CHECK(beta == 2.0);
  CHECK(alpha / (alpha + beta) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("extreme posteriors dominate selection") {
  // Monte Carlo oracle on the sampler itself.
  RngStream rng(91);
  int wins = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    if (rng.beta(101, 1) > rng.beta(1, 101)) ++wins;
  }
  CHECK(static_cast<double>(wins) / trials > 0.99);

  // The same dominance through the select interface after a lopsided history.
  BanditInstance inst = create_instance(config_for(Algorithm::kThompson), 2);
  RngStream rng2(92);
  for (int i = 0; i < 3000; ++i) {
    const int arm = inst.select_arm(rng2);
    inst.reward(arm, arm == 0);
  }
  int zero = 0;
  for (int i = 0; i < 10000; ++i) {
    if (inst.select_arm(rng2) == 0) ++zero;
  }
  CHECK(static_cast<double>(zero) / 10000 > 0.99);
}

TEST_CASE("dTS at gamma=1 is state-identical to TS on a shared trace") {
  BanditConfig ts_cfg = config_for(Algorithm::kThompson);
  BanditConfig dts_cfg = config_for(Algorithm::kDiscountedThompson);
  dts_cfg.gamma = 1.0;
  BanditInstance ts = create_instance(ts_cfg, 5);
  BanditInstance dts = create_instance(dts_cfg, 5);
  RngStream rng_a(17);
  RngStream rng_b(17);
  for (int t = 0; t < 400; ++t) {
    const int arm_a = ts.select_arm(rng_a);
    const int arm_b = dts.select_arm(rng_b);
    REQUIRE(arm_a == arm_b);
    const bool r = refbandit::fixed_reward(t, arm_a);
    ts.reward(arm_a, r);
    dts.reward(arm_b, r);
    for (int a = 0; a < 5; ++a) {
      REQUIRE(ts.arm_successes(a) == dts.arm_successes(a));
      REQUIRE(ts.arm_failures(a) == dts.arm_failures(a));
    }
  }
}

TEST_CASE("each algorithm matches its straight-line reference on a fixed trace") {
  const int k = 3;
  const int rounds = 50;
  const std::uint64_t seed = 20240531;

  SUBCASE("ucb1") {
    BanditInstance inst = create_instance(config_for(Algorithm::kUcb1), k);
    RngStream rng(seed);
    auto ref = refbandit::ref_run_ucb1(k, rounds, 0.5);
    check_against_reference(inst, ref, rng, false);
  }
  SUBCASE("klucb") {
    BanditInstance inst = create_instance(config_for(Algorithm::kKlUcb), k);
    RngStream rng(seed);
    auto ref = refbandit::ref_run_klucb(k, rounds);
    check_against_reference(inst, ref, rng, false);
  }
  SUBCASE("ts") {
    BanditInstance inst = create_instance(config_for(Algorithm::kThompson), k);
    RngStream rng(seed), ref_rng(seed);
    auto ref = refbandit::ref_run_ts_family(k, rounds, 1.0, ref_rng);
    check_against_reference(inst, ref, rng, false);
  }
  SUBCASE("dts") {
    BanditInstance inst = create_instance(config_for(Algorithm::kDiscountedThompson), k);
    RngStream rng(seed), ref_rng(seed);
    auto ref = refbandit::ref_run_ts_family(k, rounds, 1.0 - 1e-8, ref_rng);
    check_against_reference(inst, ref, rng, false);
  }
  SUBCASE("dbe") {
    BanditInstance inst = create_instance(config_for(Algorithm::kDiscountedBoltzmann), k);
    RngStream rng(seed), ref_rng(seed);
    auto ref = refbandit::ref_run_dbe(k, rounds, 0.2, 1.0 - 1e-8, ref_rng);
    check_against_reference(inst, ref, rng, true);
  }
  SUBCASE("adsts") {
    BanditInstance inst = create_instance(config_for(Algorithm::kAdsThompson), k);
    RngStream rng(seed), ref_rng(seed);
    auto ref = refbandit::ref_run_adsts_nocut(k, rounds, ref_rng);
    const int n = static_cast<int>(ref.chosen.size());
    for (int t = 0; t < n; ++t) {
      const int arm = inst.select_arm(rng);
      REQUIRE(arm == ref.chosen[t]);
      inst.reward(arm, refbandit::fixed_reward(t, arm));
      for (int a = 0; a < k; ++a) {
        const auto [alpha, beta] = inst.posterior(a);
        REQUIRE(alpha == doctest::Approx(1.0 + ref.succ[t][a]).epsilon(1e-12));
        REQUIRE(beta == doctest::Approx(1.0 + ref.fail[t][a]).epsilon(1e-12));
      }
    }
    // No cut may have fired, or the window would disagree with raw counts.
    for (int a = 0; a < k; ++a) CHECK(inst.arm_window(a).count() == inst.arm_pulls(a));
  }
  SUBCASE("exp3ix") {
    BanditInstance inst = create_instance(config_for(Algorithm::kExp3Ix), k);
    RngStream rng(seed), ref_rng(seed);
    auto ref = refbandit::ref_run_exp3ix(k, rounds, ref_rng);
    check_against_reference(inst, ref, rng, true);
  }
  SUBCASE("exp3pp") {
    BanditInstance inst = create_instance(config_for(Algorithm::kExp3pp), k);
    RngStream rng(seed), ref_rng(seed);
    auto ref = refbandit::ref_run_exp3pp(k, rounds, 3.0, 256.0, ref_rng);
    check_against_reference(inst, ref, rng, true);
  }
}

TEST_CASE("probability vectors stay normalized with positive entries") {
  RngStream rng(77);
  for (Algorithm a : {Algorithm::kDiscountedBoltzmann, Algorithm::kExp3Ix, Algorithm::kExp3pp}) {
    BanditInstance inst = create_instance(config_for(a), 6);
    for (int t = 0; t < 300; ++t) {
      std::vector<double> p;
      switch (a) {
        case Algorithm::kDiscountedBoltzmann: p = dbe_probabilities(inst); break;
        case Algorithm::kExp3Ix: p = exp3ix_probabilities(inst); break;
        default: p = exp3pp_probabilities(inst); break;
      }
      const double sum = std::accumulate(p.begin(), p.end(), 0.0);
      REQUIRE(std::fabs(sum - 1.0) < 1e-9);
      for (double v : p) REQUIRE(v > 0.0);
      const int arm = inst.select_arm(rng);
      inst.reward(arm, refbandit::fixed_reward(t, arm));
    }
  }
}

TEST_CASE("dbe_probabilities: symmetry, hand softmax and the flat-temperature limit") {
  BanditInstance fresh = create_instance(config_for(Algorithm::kDiscountedBoltzmann), 4);
  for (double v : dbe_probabilities(fresh)) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

  BanditConfig cfg = config_for(Algorithm::kDiscountedBoltzmann);
  cfg.dbe_temperature = 1.0;
  BanditInstance two = create_instance(cfg, 2);
  RngStream rng(13);
  int pulls0 = 0, pulls1 = 0;
  while (pulls0 < 3 || pulls1 < 3) {
    const int arm = two.select_arm(rng);
    two.reward(arm, arm == 0);
    (arm == 0 ? pulls0 : pulls1) += 1;
  }
  const std::vector<double> p = dbe_probabilities(two);
  const double e = std::exp(1.0);
  CHECK(p[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-9));
  CHECK(p[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-9));

  BanditConfig hot = config_for(Algorithm::kDiscountedBoltzmann);
  hot.dbe_temperature = 1e6;
  BanditInstance flat = create_instance(hot, 2);
  RngStream rng2(14);
  for (int t = 0; t < 50; ++t) {
    const int arm = flat.select_arm(rng2);
    flat.reward(arm, arm == 0);
  }
  for (double v : dbe_probabilities(flat)) CHECK(std::fabs(v - 0.5) < 1e-4);
}

TEST_CASE("exp3pp floors never exceed 1/(2K) and start uniform") {
  BanditInstance inst = create_instance(config_for(Algorithm::kExp3pp), 5);
  for (double v : exp3pp_probabilities(inst)) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
  RngStream rng(19);
  for (int t = 0; t < 200; ++t) {
    const int arm = inst.select_arm(rng);
    inst.reward(arm, refbandit::fixed_reward(t, arm));
    // With one arm at the minimum loss its floor is capped, never above 1/(2K).
    const std::vector<double> p = exp3pp_probabilities(inst);
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    REQUIRE(std::fabs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("identical seeds and traces give identical selection sequences") {
  for (Algorithm a : all_algorithms()) {
    BanditInstance one = create_instance(config_for(a), 4);
    BanditInstance two = create_instance(config_for(a), 4);
    RngStream rng1(123), rng2(123);
    for (int t = 0; t < 200; ++t) {
      const int arm1 = one.select_arm(rng1);
      const int arm2 = two.select_arm(rng2);
      REQUIRE(arm1 == arm2);
      const bool r = refbandit::fixed_reward(t, arm1);
      one.reward(arm1, r);
      two.reward(arm2, r);
    }
  }
}

TEST_CASE("TS posterior sample mean obeys the conjugate law") {
  RngStream rng(2024);
  const double s = 37, f = 11;
  const double a = 1.0 + s, b = 1.0 + f;
  const double expected = a / (a + b);
  const double variance = a * b / ((a + b) * (a + b) * (a + b + 1.0));
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.beta(a, b);
  const double se = std::sqrt(variance / n);
  CHECK(std::fabs(sum / n - expected) < 3.0 * se);
}

TEST_CASE("UCB1 and KL-UCB concentrate on the best arm of Bernoulli(0.9, 0.1)") {
  for (Algorithm algo : {Algorithm::kUcb1, Algorithm::kKlUcb}) {
    std::vector<double> fractions;
    for (int run = 0; run < 20; ++run) {
      BanditInstance inst = create_instance(config_for(algo), 2);
      RngStream rng(1000 + run);
      RngStream env(5000 + run);
      int best_pulls = 0;
      const int rounds = 10000;
      for (int t = 0; t < rounds; ++t) {
        const int arm = inst.select_arm(rng);
        const double mean = arm == 0 ? 0.9 : 0.1;
        inst.reward(arm, env.uniform01() < mean);
        if (arm == 0) ++best_pulls;
      }
      fractions.push_back(static_cast<double>(best_pulls) / rounds);
    }
    std::sort(fractions.begin(), fractions.end());
    const double median = 0.5 * (fractions[9] + fractions[10]);
    CHECK(median > 0.9);
  }
}

TEST_CASE("instance state round-trips through the binary codec") {
  RngStream rng(55);
  for (Algorithm a : all_algorithms()) {
    BanditInstance inst = create_instance(config_for(a), 5);
    for (int t = 0; t < 120; ++t) {
      const int arm = inst.select_arm(rng);
      inst.reward(arm, refbandit::fixed_reward(t, arm));
    }
    BinWriter w;
    inst.save(w);
    BinReader r(w.data());
    const BanditInstance copy = BanditInstance::load(r);
    CHECK(copy == inst);
    CHECK(r.at_end());
  }
}
