#pragma once

// Straight-line reference implementations of the eight bandit algorithms,
// written independently of banditfuzz/bandit.cpp. Each function replays a
// fixed reward table round by round with plain loops and the textbook update
// equations, recording chosen arms, per-round selection probabilities (where
// the algorithm defines them) and per-arm state. Test code compares these
// against the engine to 1e-12.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "banditfuzz/rng.hpp"

namespace refbandit {

// Fixed deterministic reward table shared by impl and reference runs.
inline bool fixed_reward(int t, int arm) {
  const std::uint32_t x = static_cast<std::uint32_t>(t) * 2654435761u +
                          static_cast<std::uint32_t>(arm) * 40503u;
  return ((x >> 7) & 3u) == 0u;  // roughly a quarter of pulls pay out
}

struct RefTrace {
  std::vector<int> chosen;
  std::vector<std::vector<double>> probs;  // probability vector per round
  std::vector<std::vector<double>> succ;   // state after the round's reward
  std::vector<std::vector<double>> fail;
  std::vector<std::vector<double>> lhat;
};

inline int ref_argmax(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

inline int ref_categorical(const std::vector<double>& p, bfz::RngStream& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (int a = 0; a < static_cast<int>(p.size()); ++a) {
    acc += p[a];
    if (u < acc) return a;
  }
  return static_cast<int>(p.size()) - 1;
}

inline RefTrace ref_run_ucb1(int k, int rounds, double c) {
  RefTrace trace;
  std::vector<double> s(k, 0.0), f(k, 0.0);
  std::vector<int> n(k, 0);
  for (int t = 0; t < rounds; ++t) {
    int arm = -1;
    for (int a = 0; a < k; ++a) {
      if (n[a] == 0) {
        arm = a;
        break;
      }
    }
    if (arm < 0) {
      std::vector<double> index(k);
      for (int a = 0; a < k; ++a)
        index[a] = s[a] / n[a] + std::sqrt(c * std::log(static_cast<double>(t)) / n[a]);
      arm = ref_argmax(index);
    }
    const bool r = fixed_reward(t, arm);
    s[arm] += r ? 1.0 : 0.0;
    f[arm] += r ? 0.0 : 1.0;
    n[arm] += 1;
    trace.chosen.push_back(arm);
    trace.succ.push_back(s);
    trace.fail.push_back(f);
  }
  return trace;
}

inline double ref_klucb_bound(double successes, double pulls, double t) {
  const double p_hat = successes / pulls;
  const double cap = 1.0 - 1e-9;
  if (p_hat >= cap) return cap;
  const double budget = std::log(t) / pulls;
  if (budget <= 0.0) return p_hat;
  const auto kl = [](double p, double q) {
    double v = 0.0;
    if (p > 0.0) v += p * std::log(p / q);
    if (p < 1.0) v += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return v;
  };
  double lo = p_hat, hi = cap;
  for (int i = 0; i < 64 && hi - lo > 1e-6; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (kl(p_hat, mid) <= budget)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

inline RefTrace ref_run_klucb(int k, int rounds) {
  RefTrace trace;
  std::vector<double> s(k, 0.0), f(k, 0.0);
  std::vector<int> n(k, 0);
  for (int t = 0; t < rounds; ++t) {
    int arm = -1;
    for (int a = 0; a < k; ++a) {
      if (n[a] == 0) {
        arm = a;
        break;
      }
    }
    if (arm < 0) {
      std::vector<double> index(k);
      for (int a = 0; a < k; ++a)
        index[a] = ref_klucb_bound(s[a], static_cast<double>(n[a]), static_cast<double>(t));
      arm = ref_argmax(index);
    }
    const bool r = fixed_reward(t, arm);
    s[arm] += r ? 1.0 : 0.0;
    f[arm] += r ? 0.0 : 1.0;
    n[arm] += 1;
    trace.chosen.push_back(arm);
    trace.succ.push_back(s);
    trace.fail.push_back(f);
  }
  return trace;
}

// prior (1,1); discount 1.0 reproduces plain Thompson sampling.
inline RefTrace ref_run_ts_family(int k, int rounds, double discount, bfz::RngStream& rng) {
  RefTrace trace;
  std::vector<double> s(k, 0.0), f(k, 0.0);
  for (int t = 0; t < rounds; ++t) {
    int arm = 0;
    double best = -1.0;
    for (int a = 0; a < k; ++a) {
      const double draw = rng.beta(1.0 + s[a], 1.0 + f[a]);
      if (draw > best) {
        best = draw;
        arm = a;
      }
    }
    const bool r = fixed_reward(t, arm);
    for (int a = 0; a < k; ++a) {
      s[a] *= discount;
      f[a] *= discount;
    }
    s[arm] += r ? 1.0 : 0.0;
    f[arm] += r ? 0.0 : 1.0;
    trace.chosen.push_back(arm);
    trace.succ.push_back(s);
    trace.fail.push_back(f);
  }
  return trace;
}

inline RefTrace ref_run_dbe(int k, int rounds, double temperature, double discount,
                            bfz::RngStream& rng) {
  RefTrace trace;
  std::vector<double> s(k, 0.0), f(k, 0.0);
  for (int t = 0; t < rounds; ++t) {
    std::vector<double> p(k);
    double z = 0.0;
    for (int a = 0; a < k; ++a) {
      const double w = s[a] + f[a];
      const double mean = w > 0.0 ? s[a] / w : 0.0;
      p[a] = std::exp(mean / temperature);
      z += p[a];
    }
    for (double& v : p) v /= z;
    const int arm = ref_categorical(p, rng);
    const bool r = fixed_reward(t, arm);
    for (int a = 0; a < k; ++a) {
      s[a] *= discount;
      f[a] *= discount;
    }
    s[arm] += r ? 1.0 : 0.0;
    f[arm] += r ? 0.0 : 1.0;
    trace.chosen.push_back(arm);
    trace.probs.push_back(p);
    trace.succ.push_back(s);
    trace.fail.push_back(f);
  }
  return trace;
}

// ADS-TS under a trace too short to ever trigger an ADWIN cut: the posterior
// is prior (1,1) plus the arm's raw reward window.
inline RefTrace ref_run_adsts_nocut(int k, int rounds, bfz::RngStream& rng) {
  return ref_run_ts_family(k, rounds, 1.0, rng);
}

inline RefTrace ref_run_exp3ix(int k, int rounds, bfz::RngStream& rng) {
  RefTrace trace;
  std::vector<double> lhat(k, 0.0);
  for (int t = 1; t <= rounds; ++t) {
    const double eta =
        k > 1 ? std::sqrt(2.0 * std::log(static_cast<double>(k)) / (static_cast<double>(k) * t))
              : 0.0;
    std::vector<double> p(k);
    double z = 0.0;
    for (int a = 0; a < k; ++a) {
      p[a] = std::exp(-eta * lhat[a]);
      z += p[a];
    }
    for (double& v : p) v /= z;
    const int arm = ref_categorical(p, rng);
    const bool r = fixed_reward(t - 1, arm);
    lhat[arm] += (r ? 0.0 : 1.0) / (p[arm] + eta / 2.0);
    trace.chosen.push_back(arm);
    trace.probs.push_back(p);
    trace.lhat.push_back(lhat);
  }
  return trace;
}

inline RefTrace ref_run_exp3pp(int k, int rounds, double alpha, double beta,
                               bfz::RngStream& rng) {
  RefTrace trace;
  std::vector<double> lhat(k, 0.0);
  for (int t = 1; t <= rounds; ++t) {
    const double td = static_cast<double>(t);
    const double eta = 0.5 * std::sqrt(alpha * std::log(td) / (td * k));
    const double beta_t = 0.5 * std::sqrt(std::log(static_cast<double>(k)) / (td * k));
    const double min_l = *std::min_element(lhat.begin(), lhat.end());
    std::vector<double> eps(k);
    double eps_sum = 0.0;
    for (int a = 0; a < k; ++a) {
      const double gap = std::min(1.0, std::max(0.0, (lhat[a] - min_l) / td));
      double xi = std::numeric_limits<double>::infinity();
      if (gap > 0.0) xi = beta * std::log(td) / (td * gap * gap);
      eps[a] = std::min(std::min(1.0 / (2.0 * k), beta_t), xi);
      eps_sum += eps[a];
    }
    std::vector<double> w(k);
    double z = 0.0;
    for (int a = 0; a < k; ++a) {
      w[a] = std::exp(-eta * lhat[a]);
      z += w[a];
    }
    std::vector<double> p(k);
    for (int a = 0; a < k; ++a) p[a] = (1.0 - eps_sum) * (w[a] / z) + eps[a];
    const int arm = ref_categorical(p, rng);
    const bool r = fixed_reward(t - 1, arm);
    lhat[arm] += (r ? 0.0 : 1.0) / p[arm];
    trace.chosen.push_back(arm);
    trace.probs.push_back(p);
    trace.lhat.push_back(lhat);
  }
  return trace;
}

}  // namespace refbandit
