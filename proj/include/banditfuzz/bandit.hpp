#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "banditfuzz/adwin.hpp"
#include "banditfuzz/binio.hpp"
#include "banditfuzz/rng.hpp"

namespace bfz {

enum class Algorithm {
  kUcb1,
  kKlUcb,
  kThompson,
  kDiscountedThompson,
  kDiscountedBoltzmann,
  kAdsThompson,
  kExp3Ix,
  kExp3pp,
  kUniform,  // uniform-random baseline, not one of the eight tuned algorithms
};

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);
// The eight algorithms with tuned hyperparameters, in canonical order.
const std::vector<Algorithm>& all_algorithms();

struct BanditConfig {
  Algorithm algorithm = Algorithm::kThompson;
  double c = 0.5;                    // UCB1 confidence scale
  double prior_alpha = 1.0;          // Beta prior for the TS family
  double prior_beta = 1.0;
  double gamma = 1.0 - 1e-8;         // dTS discount factor
  int adwin_m = 10;                  // ADWIN2 buckets per row (ADS-TS)
  double adwin_delta = 1.0 - 1e-7;   // ADWIN2 confidence, stored as configured;
                                     // the cut test uses 1 - adwin_delta
  double exp3pp_alpha = 3.0;
  double exp3pp_beta = 256.0;
  double dbe_temperature = 0.2;      // softmax temperature for dBE
  double dbe_gamma = 1.0 - 1e-8;     // dBE discount factor

  void validate() const;  // throws std::invalid_argument on any bad field
};

// One K-armed bandit behind a uniform select/reward interface.
//
// Usage is strict alternation per instance: select_arm() then reward() for
// the arm it returned. All randomness flows through the caller's RngStream.
class BanditInstance {
 public:
  BanditInstance() = default;
  BanditInstance(const BanditConfig& config, int k);

  int select_arm(RngStream& rng);
  void reward(int arm, bool r);

  Algorithm algorithm() const { return config_.algorithm; }
  const BanditConfig& config() const { return config_; }
  int k() const { return k_; }
  std::uint64_t rounds() const { return rounds_; }
  std::uint64_t arm_pulls(int arm) const { return pulls_.at(arm); }
  std::uint64_t arm_selections(int arm) const { return selections_.at(arm); }
  double arm_successes(int arm) const { return succ_.at(arm); }
  double arm_failures(int arm) const { return fail_.at(arm); }
  double arm_loss_estimate(int arm) const { return lhat_.at(arm); }
  const AdwinWindow& arm_window(int arm) const { return windows_.at(arm); }

  // Beta posterior parameters for the TS family (TS, dTS, ADS-TS).
  std::pair<double, double> posterior(int arm) const;

  bool has_pending_selection() const { return pending_arm_ >= 0; }
  int pending_arm() const { return pending_arm_; }

  void save(BinWriter& w) const;
  static BanditInstance load(BinReader& r);
  bool operator==(const BanditInstance& other) const;

 private:
  friend std::vector<double> dbe_probabilities(const BanditInstance&);
  friend std::vector<double> exp3ix_probabilities(const BanditInstance&);
  friend std::vector<double> exp3pp_probabilities(const BanditInstance&);

  int select_index_based(RngStream& rng) const;
  int select_thompson(RngStream& rng) const;
  int sample_categorical(const std::vector<double>& p, RngStream& rng) const;
  int lowest_unpulled() const;

  BanditConfig config_;
  int k_ = 0;
  std::uint64_t rounds_ = 0;                // completed select/reward rounds
  std::vector<std::uint64_t> pulls_;        // rewarded rounds per arm
  std::vector<std::uint64_t> selections_;   // select_arm returns per arm
  std::vector<double> succ_;                // reward-1 mass (discounted where applicable)
  std::vector<double> fail_;                // reward-0 mass
  std::vector<double> lhat_;                // EXP3 cumulative loss estimates
  std::vector<AdwinWindow> windows_;        // ADS-TS per-arm windows

  int pending_arm_ = -1;
  double pending_prob_ = 0.0;   // probability the EXP3 family selected with
  double pending_gamma_ = 0.0;  // EXP3-IX implicit-exploration offset
};

BanditInstance create_instance(const BanditConfig& config, int k);

// UCB1 index: mean + sqrt(c * ln(t) / n). Requires n >= 1, t >= 1.
double ucb1_index(double mean, double t, double n, double c);

// KL divergence between Bernoulli(p) and Bernoulli(q), q in (0,1).
double bernoulli_kl(double p, double q);

// Largest q in [successes/pulls, 1) with pulls * KL(p_hat, q) <= ln(t),
// by bisection to absolute tolerance 1e-6 (at most 64 halvings).
double klucb_upper_bound(double successes, double pulls, double t);

// Selection distribution of the upcoming round for the randomized-weights
// algorithms. Each vector sums to 1 within 1e-9 with all entries positive.
std::vector<double> dbe_probabilities(const BanditInstance& instance);
std::vector<double> exp3ix_probabilities(const BanditInstance& instance);
std::vector<double> exp3pp_probabilities(const BanditInstance& instance);

}  // namespace bfz
