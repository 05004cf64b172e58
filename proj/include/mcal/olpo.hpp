#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mcal/core.hpp"
#include "mcal/rng.hpp"

namespace mcal {

struct OlpoDecision {
  std::size_t h_index = 0;
  ThetaVector theta;
};

// Online learner for the product-reward problem: round t plays (h_t, theta_t),
// then observes (x_t, f_t) and collects <theta_t, h_t(x_t) * f_t>.
//
// Contract: propose() depends only on rounds 1..t-1 plus the learner's own
// randomness (it advances the sampling rng); expected_reward() reports the
// expectation of the round-t reward over that randomness and must be queried
// before update() folds the round in.
class OlpoLearner {
 public:
  virtual ~OlpoLearner() = default;
  virtual OlpoDecision propose() = 0;
  virtual double expected_reward(const Context& x, const RewardVector& f) const = 0;
  virtual void update(const Context& x, const RewardVector& f) = 0;
};

// Composite learner: one projected-gradient-ascent instance per hypothesis on
// the box [-1,1]^M, aggregated by exponential weights over the hypotheses.
// Rewards are scaled per hypothesis to f_scaled(h) = h(x) * f / B, which has
// ||f_scaled(h)||_1 <= 1 whenever ||f||_1 <= 1, so expert rewards
// <theta^h, f_scaled(h)> stay in [-1,1].
//
// Step sizes are fixed from the known horizon: eta_ogd = sqrt(M/T) and
// eta_mwu = sqrt(ln|H| / T).
class LinOlpoLearner : public OlpoLearner {
 public:
  LinOlpoLearner(const HypothesisClass& H, PredictionGrid grid, long long horizon,
                 SplitMix64 rng)
      : class_(&H),
        grid_(grid),
        rng_(rng),
        eta_ogd_(std::sqrt(static_cast<double>(grid.size()) / static_cast<double>(horizon))),
        eta_mwu_(std::sqrt(std::log(static_cast<double>(H.size())) /
                           static_cast<double>(horizon))) {
    if (H.empty()) throw std::invalid_argument("LinOlpoLearner: empty class");
    if (horizon < 1) throw std::invalid_argument("LinOlpoLearner: horizon < 1");
    thetas_.assign(H.size(), std::vector<double>(static_cast<std::size_t>(grid.size()), 0.0));
    log_weights_.assign(H.size(), 0.0);
    expert_rewards_.assign(H.size(), 0.0);
    cum_scaled_.assign(H.size(), std::vector<double>(static_cast<std::size_t>(grid.size()), 0.0));
  }

  OlpoDecision propose() override {
    Distribution g{gamma()};
    const std::size_t h = static_cast<std::size_t>(sample_from_distribution(g, rng_));
    return OlpoDecision{h, ThetaVector{thetas_[h], ThetaVector::Mode::kBox}};
  }

  // E over h ~ gamma_t of <theta_t^h, h(x) * f>.
  double expected_reward(const Context& x, const RewardVector& f) const override {
    const std::vector<double> g = gamma();
    double total = 0.0;
    for (std::size_t h = 0; h < class_->size(); ++h) {
      const double hx = (*class_)[h](x);
      double dot = 0.0;
      for (std::size_t i = 0; i < f.entries.size(); ++i) {
        dot += thetas_[h][i] * f.entries[i];
      }
      total += g[h] * hx * dot;
    }
    return total;
  }

  void update(const Context& x, const RewardVector& f) override {
    if (f.entries.size() != thetas_[0].size()) {
      throw std::invalid_argument("LinOlpoLearner: reward length != M");
    }
    if (f.l1_norm() > 1.0 + kNormTol) {
      throw std::invalid_argument("LinOlpoLearner: reward l1 norm exceeds 1");
    }
    const std::vector<double> g = gamma();
    const double inv_b = 1.0 / class_->bound();
    for (std::size_t h = 0; h < class_->size(); ++h) {
      const double scale = (*class_)[h](x) * inv_b;
      double expert_reward = 0.0;
      for (std::size_t i = 0; i < f.entries.size(); ++i) {
        const double fs = scale * f.entries[i];
        expert_reward += thetas_[h][i] * fs;
        cum_scaled_[h][i] += fs;
      }
      expected_scaled_total_ += g[h] * expert_reward;
      ogd_step(thetas_[h], f.entries, scale * eta_ogd_);
      expert_rewards_[h] = expert_reward;
    }
    mwu_step(log_weights_, expert_rewards_, eta_mwu_);
    ++rounds_seen_;
  }

  // Normalized expert distribution gamma_t (softmax of the log weights).
  std::vector<double> gamma() const { return gamma_from(log_weights_); }

  // Diagnostics for the deterministic regret inequality: the best fixed
  // scaled value max_h ||sum_t f_scaled_t(h)||_1 against the accumulated
  // gamma-expected scaled reward.
  double scaled_best_fixed() const {
    double best = 0.0;
    for (const std::vector<double>& v : cum_scaled_) {
      double norm = 0.0;
      for (double c : v) norm += std::abs(c);
      best = std::max(best, norm);
    }
    return best;
  }
  double scaled_expected_total() const { return expected_scaled_total_; }
  double scaled_regret_gap() const { return scaled_best_fixed() - expected_scaled_total_; }

  const std::vector<double>& theta_for(std::size_t h) const { return thetas_.at(h); }
  const std::vector<double>& log_weights() const { return log_weights_; }
  double eta_ogd() const { return eta_ogd_; }
  double eta_mwu() const { return eta_mwu_; }
  long long rounds_seen() const { return rounds_seen_; }

  // One ascent step clipped back to the box: theta <- clip(theta + eta * g).
  static void ogd_step(std::vector<double>& theta, const std::vector<double>& grad,
                       double eta) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] = std::clamp(theta[i] + eta * grad[i], -1.0, 1.0);
    }
  }

  // Exponential-weights update in log space: each weight multiplies by
  // exp(eta * reward).
  static void mwu_step(std::vector<double>& log_weights,
                       const std::vector<double>& rewards, double eta) {
    for (std::size_t h = 0; h < log_weights.size(); ++h) {
      log_weights[h] += eta * rewards[h];
    }
  }

  static std::vector<double> gamma_from(const std::vector<double>& log_weights) {
    const double mx = *std::max_element(log_weights.begin(), log_weights.end());
    std::vector<double> g(log_weights.size());
    double sum = 0.0;
    for (std::size_t h = 0; h < g.size(); ++h) {
      g[h] = std::exp(log_weights[h] - mx);
      sum += g[h];
    }
    for (double& v : g) v /= sum;
    return g;
  }

 private:
  const HypothesisClass* class_;
  PredictionGrid grid_;
  SplitMix64 rng_;
  double eta_ogd_;
  double eta_mwu_;
  std::vector<std::vector<double>> thetas_;       // per-h box iterate
  std::vector<double> log_weights_;               // expert log weights
  std::vector<double> expert_rewards_;            // round-t scratch
  std::vector<std::vector<double>> cum_scaled_;   // sum_t f_scaled_t(h)
  double expected_scaled_total_ = 0.0;
  long long rounds_seen_ = 0;
};

// Exact regret of a played sequence against the best fixed (h, theta): the
// dual-norm closed form gives value max_h ||sum_t h(x_t) f_t||_1 with the
// optimal theta the coordinatewise sign of the cumulative vector.
struct RegretReport {
  double best_fixed_value = 0.0;
  std::size_t best_h_index = 0;
  ThetaVector best_theta;
  double realized_expected = 0.0;
  double regret = 0.0;
};

inline RegretReport olpo_regret(const std::vector<Context>& xs,
                                const std::vector<RewardVector>& fs,
                                const std::vector<double>& expected_rewards,
                                const HypothesisClass& H) {
  if (xs.empty() || xs.size() != fs.size() || xs.size() != expected_rewards.size()) {
    throw std::invalid_argument("olpo_regret: empty or mismatched history");
  }
  if (H.empty()) throw std::invalid_argument("olpo_regret: empty class");
  const std::size_t M = fs[0].entries.size();
  RegretReport rep;
  rep.best_fixed_value = -1.0;
  for (std::size_t h = 0; h < H.size(); ++h) {
    std::vector<double> cum(M, 0.0);
    for (std::size_t t = 0; t < xs.size(); ++t) {
      const double hx = H[h](xs[t]);
      for (std::size_t i = 0; i < M; ++i) cum[i] += hx * fs[t].entries[i];
    }
    double norm = 0.0;
    for (double c : cum) norm += std::abs(c);
    if (norm > rep.best_fixed_value) {
      rep.best_fixed_value = norm;
      rep.best_h_index = h;
      rep.best_theta.mode = ThetaVector::Mode::kSign;
      rep.best_theta.entries.clear();
      for (double c : cum) rep.best_theta.entries.push_back(c >= 0.0 ? 1.0 : -1.0);
    }
  }
  for (double r : expected_rewards) rep.realized_expected += r;
  rep.regret = rep.best_fixed_value - rep.realized_expected;
  return rep;
}

}  // namespace mcal
