#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mcal/core.hpp"
#include "mcal/gftpl.hpp"
#include "mcal/halfspace.hpp"
#include "mcal/mcerror.hpp"
#include "mcal/olpo.hpp"
#include "mcal/rng.hpp"
#include "mcal/streams.hpp"

namespace mcal {

// Reward vector of one round: entry i is w(i) * (y - i/m). Since w is a
// distribution and |y - i/m| <= 1, the l1 norm never exceeds 1, which is what
// keeps the learners' scaling layers valid without renormalization.
inline RewardVector build_reward(const Distribution& w, double y,
                                 const PredictionGrid& grid) {
  if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("build_reward: y outside [0,1]");
  if (static_cast<int>(w.probs.size()) != grid.size()) {
    throw std::invalid_argument("build_reward: distribution length != M");
  }
  RewardVector f;
  f.entries.reserve(w.probs.size());
  for (int i = 0; i < grid.size(); ++i) {
    f.entries.push_back(w.probs[static_cast<std::size_t>(i)] * (y - grid.value(i)));
  }
  return f;
}

// Everything one round produced, in protocol order.
struct RoundRecord {
  Context x;
  OlpoDecision decision;
  Distribution w;
  int p_index = 0;
  double y = 0.0;
  RewardVector f;
  double chain_value = 0.0;      // <theta_t, h_t(x_t) * f_t>, bounded by B/m
  double expected_reward = 0.0;  // learner-reported expectation for regret accounting
};

// One round of the reduction: propose -> halfspace -> sample p_t -> label ->
// reward -> learner update. The label source is consulted only after p_t is
// committed, and it sees w_t but never the realized sample.
inline RoundRecord run_round(OlpoLearner& learner, const HypothesisClass& H,
                             const PredictionGrid& grid, const Context& x,
                             Stream& stream, SplitMix64& sample_rng) {
  RoundRecord rec;
  rec.x = x;
  rec.decision = learner.propose();
  const Hypothesis& h = H[rec.decision.h_index];
  rec.w = halfspace_oracle(x, h, rec.decision.theta, grid);
  rec.p_index = sample_from_distribution(rec.w, sample_rng);
  rec.y = stream.next_label(x, rec.w);
  rec.f = build_reward(rec.w, rec.y, grid);

  const double hx = h(x);
  for (std::size_t i = 0; i < rec.f.entries.size(); ++i) {
    rec.chain_value += rec.decision.theta.entries[i] * hx * rec.f.entries[i];
  }
  rec.expected_reward = learner.expected_reward(x, rec.f);
  learner.update(x, rec.f);
  stream.finish_round(x, rec.p_index, rec.y);
  return rec;
}

enum class LearnerKind { kLinOlpo, kGftpl };

inline const char* learner_name(LearnerKind k) {
  return k == LearnerKind::kLinOlpo ? "linolpo" : "gftpl";
}

struct ExperimentConfig {
  LearnerKind learner = LearnerKind::kLinOlpo;
  long long T = 0;
  int m = 0;                // 0 -> default rule: ceil(T^{1/3}) lin, ceil(T^{1/4}) gftpl
  std::uint64_t seed = 0;
  double epsilon = -1.0;    // gftpl oracle slack; < 0 -> T^{-1/4}
  std::vector<Context> separator;  // gftpl only: transductive universe / separator
};

inline int default_grid_m(LearnerKind kind, long long T) {
  return kind == LearnerKind::kLinOlpo ? ceil_root(T, 3) : ceil_root(T, 4);
}

struct KClassReport {
  std::vector<double> per_member;
  double max_k = 0.0;
  std::size_t argmax = 0;
};

struct ExperimentResult {
  Transcript transcript;
  KClassReport k;
  RegretReport regret;
  double max_chain_value = 0.0;
  double chain_bound = 0.0;  // B/m
  int m_used = 0;
  double epsilon_used = 0.0;
  double wall_ms = 0.0;
};

// Full run of the reduction: T rounds against the stream, then K over the
// class and the exact OLPO regret of the realized play. Deterministic given
// (config, stream seed); timing is the only field that varies.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const HypothesisClass& H, Stream& stream) {
  if (cfg.T < 1) throw std::invalid_argument("run_experiment: T must be >= 1");
  if (H.empty()) throw std::invalid_argument("run_experiment: empty class");
  const auto t0 = std::chrono::steady_clock::now();

  const int m = cfg.m > 0 ? cfg.m : default_grid_m(cfg.learner, cfg.T);
  const PredictionGrid grid(m);
  SplitMix64 sample_rng(cfg.seed, rng_stream::kPrediction);

  std::unique_ptr<OlpoLearner> learner;
  double epsilon_used = 0.0;
  if (cfg.learner == LearnerKind::kLinOlpo) {
    learner = std::make_unique<LinOlpoLearner>(H, grid, cfg.T,
                                               SplitMix64(cfg.seed, rng_stream::kLearner));
  } else {
    if (cfg.separator.empty()) {
      throw std::invalid_argument("run_experiment: gftpl needs a separator/universe");
    }
    epsilon_used = cfg.epsilon >= 0.0 ? cfg.epsilon
                                      : std::pow(static_cast<double>(cfg.T), -0.25);
    GammaSpec spec{cfg.separator, grid.size()};
    learner = std::make_unique<GftplLearner>(H, grid, std::move(spec), cfg.T, epsilon_used,
                                             SplitMix64(cfg.seed, rng_stream::kNoise));
  }

  ExperimentResult res{Transcript(grid), {}, {}, 0.0, H.bound() / m, m, epsilon_used, 0.0};
  std::vector<Context> xs;
  std::vector<RewardVector> fs;
  std::vector<double> expected;
  xs.reserve(static_cast<std::size_t>(cfg.T));
  fs.reserve(static_cast<std::size_t>(cfg.T));
  expected.reserve(static_cast<std::size_t>(cfg.T));

  for (long long t = 0; t < cfg.T; ++t) {
    const Context x = stream.next_context();
    RoundRecord rec = run_round(*learner, H, grid, x, stream, sample_rng);
    res.max_chain_value = std::max(res.max_chain_value, rec.chain_value);
    res.transcript.append(Round{rec.x, rec.p_index, rec.y, rec.w.probs});
    xs.push_back(std::move(rec.x));
    fs.push_back(std::move(rec.f));
    expected.push_back(rec.expected_reward);
  }

  res.k.per_member.reserve(H.size());
  for (std::size_t i = 0; i < H.size(); ++i) {
    res.k.per_member.push_back(k_error(res.transcript, H[i]).total);
  }
  const auto [mx, arg] = k_error_class(res.transcript, H);
  res.k.max_k = mx;
  res.k.argmax = arg;
  res.regret = olpo_regret(xs, fs, expected, H);

  res.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace mcal
