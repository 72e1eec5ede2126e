#include "banditfuzz/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bfz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Numerically stable softmax of `logits`.
std::vector<double> softmax(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kUcb1: return "ucb1";
    case Algorithm::kKlUcb: return "klucb";
    case Algorithm::kThompson: return "ts";
    case Algorithm::kDiscountedThompson: return "dts";
    case Algorithm::kDiscountedBoltzmann: return "dbe";
    case Algorithm::kAdsThompson: return "adsts";
    case Algorithm::kExp3Ix: return "exp3ix";
    case Algorithm::kExp3pp: return "exp3pp";
    case Algorithm::kUniform: return "uniform";
  }
  throw std::invalid_argument("unknown algorithm id");
}

Algorithm algorithm_from_name(const std::string& name) {
  for (Algorithm a :
       {Algorithm::kUcb1, Algorithm::kKlUcb, Algorithm::kThompson,
        Algorithm::kDiscountedThompson, Algorithm::kDiscountedBoltzmann,
        Algorithm::kAdsThompson, Algorithm::kExp3Ix, Algorithm::kExp3pp, Algorithm::kUniform}) {
    if (name == algorithm_name(a)) return a;
  }
  throw std::invalid_argument("unknown bandit algorithm: " + name);
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> algos = {
      Algorithm::kUcb1,          Algorithm::kKlUcb,
      Algorithm::kThompson,      Algorithm::kDiscountedThompson,
      Algorithm::kDiscountedBoltzmann, Algorithm::kAdsThompson,
      Algorithm::kExp3Ix,        Algorithm::kExp3pp,
  };
  return algos;
}

void BanditConfig::validate() const {
  if (!(c > 0.0)) throw std::invalid_argument("BanditConfig: c must be positive");
  if (!(prior_alpha > 0.0)) throw std::invalid_argument("BanditConfig: prior_alpha must be positive");
  if (!(prior_beta > 0.0)) throw std::invalid_argument("BanditConfig: prior_beta must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("BanditConfig: gamma must be in (0,1]");
  if (adwin_m < 1) throw std::invalid_argument("BanditConfig: adwin_M must be a positive integer");
  if (!(adwin_delta > 0.0 && adwin_delta < 1.0))
    throw std::invalid_argument("BanditConfig: adwin_delta must be in (0,1)");
  if (!(exp3pp_alpha > 0.0)) throw std::invalid_argument("BanditConfig: exp3pp_alpha must be positive");
  if (!(exp3pp_beta > 0.0)) throw std::invalid_argument("BanditConfig: exp3pp_beta must be positive");
  if (!(dbe_temperature > 0.0))
    throw std::invalid_argument("BanditConfig: dbe_temperature must be positive");
  if (!(dbe_gamma > 0.0 && dbe_gamma <= 1.0))
    throw std::invalid_argument("BanditConfig: dbe_gamma must be in (0,1]");
}

BanditInstance::BanditInstance(const BanditConfig& config, int k) : config_(config), k_(k) {
  config_.validate();
  if (k < 1) throw std::invalid_argument("BanditInstance: K must be >= 1");
  pulls_.assign(k_, 0);
  selections_.assign(k_, 0);
  succ_.assign(k_, 0.0);
  fail_.assign(k_, 0.0);
  lhat_.assign(k_, 0.0);
  if (config_.algorithm == Algorithm::kAdsThompson) {
    windows_.assign(k_, AdwinWindow(config_.adwin_m, 1.0 - config_.adwin_delta));
  }
}

BanditInstance create_instance(const BanditConfig& config, int k) {
  return BanditInstance(config, k);
}

std::pair<double, double> BanditInstance::posterior(int arm) const {
  if (arm < 0 || arm >= k_) throw std::out_of_range("BanditInstance::posterior: bad arm");
  if (config_.algorithm == Algorithm::kAdsThompson) {
    const AdwinWindow& w = windows_[arm];
    const double s = w.sum();
    const double n = static_cast<double>(w.count());
    return {config_.prior_alpha + s, config_.prior_beta + (n - s)};
  }
  return {config_.prior_alpha + succ_[arm], config_.prior_beta + fail_[arm]};
}

int BanditInstance::lowest_unpulled() const {
  for (int a = 0; a < k_; ++a) {
    if (pulls_[a] == 0) return a;
  }
  return -1;
}

int BanditInstance::select_index_based(RngStream&) const {
  // The index is undefined at N=0, so unpulled arms go first.
  const int unpulled = lowest_unpulled();
  if (unpulled >= 0) return unpulled;
  const double t = static_cast<double>(rounds_);
  int best = 0;
  double best_index = -kInf;
  for (int a = 0; a < k_; ++a) {
    const double n = static_cast<double>(pulls_[a]);
    double index;
    if (config_.algorithm == Algorithm::kUcb1) {
      index = ucb1_index(succ_[a] / n, t, n, config_.c);
    } else {
      index = klucb_upper_bound(succ_[a], n, t);
    }
    if (index > best_index) {
      best_index = index;
      best = a;
    }
  }
  return best;
}

int BanditInstance::select_thompson(RngStream& rng) const {
  int best = 0;
  double best_sample = -kInf;
  for (int a = 0; a < k_; ++a) {
    const auto [alpha, beta_param] = posterior(a);
    const double sample = rng.beta(alpha, beta_param);
    if (sample > best_sample) {
      best_sample = sample;
      best = a;
    }
  }
  return best;
}

int BanditInstance::sample_categorical(const std::vector<double>& p, RngStream& rng) const {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (int a = 0; a < k_; ++a) {
    acc += p[a];
    if (u < acc) return a;
  }
  return k_ - 1;
}

int BanditInstance::select_arm(RngStream& rng) {
  int arm;
  switch (config_.algorithm) {
    case Algorithm::kUniform:
      arm = static_cast<int>(rng.below(static_cast<std::uint64_t>(k_)));
      break;
    case Algorithm::kUcb1:
    case Algorithm::kKlUcb:
      arm = select_index_based(rng);
      break;
    case Algorithm::kThompson:
    case Algorithm::kDiscountedThompson:
    case Algorithm::kAdsThompson:
      arm = select_thompson(rng);
      break;
    case Algorithm::kDiscountedBoltzmann:
      arm = sample_categorical(dbe_probabilities(*this), rng);
      break;
    case Algorithm::kExp3Ix: {
      const std::vector<double> p = exp3ix_probabilities(*this);
      arm = sample_categorical(p, rng);
      const double t = static_cast<double>(rounds_ + 1);
      const double eta =
          k_ > 1 ? std::sqrt(2.0 * std::log(static_cast<double>(k_)) / (k_ * t)) : 0.0;
      pending_prob_ = p[arm];
      pending_gamma_ = eta / 2.0;
      break;
    }
    case Algorithm::kExp3pp: {
      const std::vector<double> p = exp3pp_probabilities(*this);
      arm = sample_categorical(p, rng);
      pending_prob_ = p[arm];
      pending_gamma_ = 0.0;
      break;
    }
    default:
      throw std::logic_error("BanditInstance: unhandled algorithm");
  }
  pending_arm_ = arm;
  selections_[arm] += 1;
  return arm;
}

void BanditInstance::reward(int arm, bool r) {
  if (arm < 0 || arm >= k_) throw std::out_of_range("BanditInstance::reward: arm out of range");
  if (pending_arm_ != arm)
    throw std::logic_error("BanditInstance::reward: arm does not match the preceding selection");
  const double rv = r ? 1.0 : 0.0;
  switch (config_.algorithm) {
    case Algorithm::kUniform:
    case Algorithm::kUcb1:
    case Algorithm::kKlUcb:
    case Algorithm::kThompson:
      succ_[arm] += rv;
      fail_[arm] += 1.0 - rv;
      break;
    case Algorithm::kDiscountedThompson:
      for (int a = 0; a < k_; ++a) {
        succ_[a] *= config_.gamma;
        fail_[a] *= config_.gamma;
      }
      succ_[arm] += rv;
      fail_[arm] += 1.0 - rv;
      break;
    case Algorithm::kDiscountedBoltzmann:
      for (int a = 0; a < k_; ++a) {
        succ_[a] *= config_.dbe_gamma;
        fail_[a] *= config_.dbe_gamma;
      }
      succ_[arm] += rv;
      fail_[arm] += 1.0 - rv;
      break;
    case Algorithm::kAdsThompson:
      windows_[arm].insert(rv);
      break;
    case Algorithm::kExp3Ix:
      lhat_[arm] += (1.0 - rv) / (pending_prob_ + pending_gamma_);
      break;
    case Algorithm::kExp3pp:
      lhat_[arm] += (1.0 - rv) / pending_prob_;
      break;
    default:
      throw std::logic_error("BanditInstance: unhandled algorithm");
  }
  pulls_[arm] += 1;
  rounds_ += 1;
  pending_arm_ = -1;
  pending_prob_ = 0.0;
  pending_gamma_ = 0.0;
}

double ucb1_index(double mean, double t, double n, double c) {
  if (!(n >= 1.0)) throw std::invalid_argument("ucb1_index: n must be >= 1");
  if (!(t >= 1.0)) throw std::invalid_argument("ucb1_index: t must be >= 1");
  return mean + std::sqrt(c * std::log(t) / n);
}

double bernoulli_kl(double p, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("bernoulli_kl: q must be in (0,1)");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli_kl: p must be in [0,1]");
  double kl = 0.0;
  if (p > 0.0) kl += p * std::log(p / q);
  if (p < 1.0) kl += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return kl;
}

double klucb_upper_bound(double successes, double pulls, double t) {
  if (!(pulls >= 1.0)) throw std::invalid_argument("klucb_upper_bound: pulls must be >= 1");
  if (!(t >= 1.0)) throw std::invalid_argument("klucb_upper_bound: t must be >= 1");
  const double p_hat = successes / pulls;
  const double cap = 1.0 - 1e-9;
  if (p_hat >= cap) return cap;
  const double budget = std::log(t) / pulls;
  if (budget <= 0.0) return p_hat;
  double lo = p_hat;
  double hi = cap;
  for (int iter = 0; iter < 64 && hi - lo > 1e-6; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (bernoulli_kl(p_hat, mid) <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::vector<double> dbe_probabilities(const BanditInstance& instance) {
  if (instance.algorithm() != Algorithm::kDiscountedBoltzmann)
    throw std::logic_error("dbe_probabilities: not a dBE instance");
  std::vector<double> logits(instance.k_);
  for (int a = 0; a < instance.k_; ++a) {
    const double weight = instance.succ_[a] + instance.fail_[a];
    const double mean = weight > 0.0 ? instance.succ_[a] / weight : 0.0;
    logits[a] = mean / instance.config_.dbe_temperature;
  }
  return softmax(logits);
}

std::vector<double> exp3ix_probabilities(const BanditInstance& instance) {
  if (instance.algorithm() != Algorithm::kExp3Ix)
    throw std::logic_error("exp3ix_probabilities: not an EXP3-IX instance");
  const int k = instance.k_;
  const double t = static_cast<double>(instance.rounds_ + 1);
  const double eta = k > 1 ? std::sqrt(2.0 * std::log(static_cast<double>(k)) / (k * t)) : 0.0;
  std::vector<double> logits(k);
  for (int a = 0; a < k; ++a) logits[a] = -eta * instance.lhat_[a];
  return softmax(logits);
}

std::vector<double> exp3pp_probabilities(const BanditInstance& instance) {
  if (instance.algorithm() != Algorithm::kExp3pp)
    throw std::logic_error("exp3pp_probabilities: not an EXP3++ instance");
  const int k = instance.k_;
  const double t = static_cast<double>(instance.rounds_ + 1);
  const double log_t = std::log(t);
  const double alpha = instance.config_.exp3pp_alpha;
  const double beta = instance.config_.exp3pp_beta;
  const double eta = 0.5 * std::sqrt(alpha * log_t / (t * k));
  const double beta_t = 0.5 * std::sqrt(std::log(static_cast<double>(k)) / (t * k));

  const double min_lhat = *std::min_element(instance.lhat_.begin(), instance.lhat_.end());
  std::vector<double> floors(k);
  double floor_sum = 0.0;
  for (int a = 0; a < k; ++a) {
    const double gap = std::clamp((instance.lhat_[a] - min_lhat) / t, 0.0, 1.0);
    const double xi = gap > 0.0 ? beta * log_t / (t * gap * gap) : kInf;
    floors[a] = std::min({1.0 / (2.0 * k), beta_t, xi});
    floor_sum += floors[a];
  }

  std::vector<double> logits(k);
  for (int a = 0; a < k; ++a) logits[a] = -eta * instance.lhat_[a];
  std::vector<double> w = softmax(logits);
  std::vector<double> p(k);
  for (int a = 0; a < k; ++a) p[a] = (1.0 - floor_sum) * w[a] + floors[a];
  return p;
}

void BanditInstance::save(BinWriter& w) const {
  w.u32(static_cast<std::uint32_t>(config_.algorithm));
  w.f64(config_.c);
  w.f64(config_.prior_alpha);
  w.f64(config_.prior_beta);
  w.f64(config_.gamma);
  w.u32(static_cast<std::uint32_t>(config_.adwin_m));
  w.f64(config_.adwin_delta);
  w.f64(config_.exp3pp_alpha);
  w.f64(config_.exp3pp_beta);
  w.f64(config_.dbe_temperature);
  w.f64(config_.dbe_gamma);
  w.u32(static_cast<std::uint32_t>(k_));
  w.u64(rounds_);
  for (int a = 0; a < k_; ++a) {
    w.u64(pulls_[a]);
    w.u64(selections_[a]);
    w.f64(succ_[a]);
    w.f64(fail_[a]);
    w.f64(lhat_[a]);
  }
  w.u8(config_.algorithm == Algorithm::kAdsThompson ? 1 : 0);
  if (config_.algorithm == Algorithm::kAdsThompson) {
    for (const AdwinWindow& win : windows_) win.save(w);
  }
  w.u32(static_cast<std::uint32_t>(pending_arm_ + 1));
  w.f64(pending_prob_);
  w.f64(pending_gamma_);
}

BanditInstance BanditInstance::load(BinReader& r) {
  BanditConfig cfg;
  const std::uint32_t alg = r.u32();
  if (alg > static_cast<std::uint32_t>(Algorithm::kUniform))
    throw SnapshotError("invalid bandit algorithm id", r.pos());
  cfg.algorithm = static_cast<Algorithm>(alg);
  cfg.c = r.f64();
  cfg.prior_alpha = r.f64();
  cfg.prior_beta = r.f64();
  cfg.gamma = r.f64();
  cfg.adwin_m = static_cast<int>(r.u32());
  cfg.adwin_delta = r.f64();
  cfg.exp3pp_alpha = r.f64();
  cfg.exp3pp_beta = r.f64();
  cfg.dbe_temperature = r.f64();
  cfg.dbe_gamma = r.f64();
  const int k = static_cast<int>(r.u32());
  BanditInstance inst(cfg, k);
  inst.rounds_ = r.u64();
  for (int a = 0; a < k; ++a) {
    inst.pulls_[a] = r.u64();
    inst.selections_[a] = r.u64();
    inst.succ_[a] = r.f64();
    inst.fail_[a] = r.f64();
    inst.lhat_[a] = r.f64();
  }
  const bool has_windows = r.u8() != 0;
  if (has_windows != (cfg.algorithm == Algorithm::kAdsThompson))
    throw SnapshotError("window section does not match algorithm", r.pos());
  if (has_windows) {
    inst.windows_.clear();
    for (int a = 0; a < k; ++a) inst.windows_.push_back(AdwinWindow::load(r));
  }
  inst.pending_arm_ = static_cast<int>(r.u32()) - 1;
  inst.pending_prob_ = r.f64();
  inst.pending_gamma_ = r.f64();
  return inst;
}

bool BanditInstance::operator==(const BanditInstance& other) const {
  return config_.algorithm == other.config_.algorithm && config_.c == other.config_.c &&
         config_.prior_alpha == other.config_.prior_alpha &&
         config_.prior_beta == other.config_.prior_beta && config_.gamma == other.config_.gamma &&
         config_.adwin_m == other.config_.adwin_m &&
         config_.adwin_delta == other.config_.adwin_delta &&
         config_.exp3pp_alpha == other.config_.exp3pp_alpha &&
         config_.exp3pp_beta == other.config_.exp3pp_beta &&
         config_.dbe_temperature == other.config_.dbe_temperature &&
         config_.dbe_gamma == other.config_.dbe_gamma && k_ == other.k_ &&
         rounds_ == other.rounds_ && pulls_ == other.pulls_ && selections_ == other.selections_ &&
         succ_ == other.succ_ && fail_ == other.fail_ && lhat_ == other.lhat_ &&
         windows_ == other.windows_ && pending_arm_ == other.pending_arm_ &&
         pending_prob_ == other.pending_prob_ && pending_gamma_ == other.pending_gamma_;
}

}  // namespace bfz
