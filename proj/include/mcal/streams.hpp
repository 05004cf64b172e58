#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcal/core.hpp"
#include "mcal/rng.hpp"

namespace mcal {

// Context/label source driving one run. next_label never receives the
// current round's realized prediction (only w_t), which enforces the
// protocol ordering: labels are fixed before p_t is sampled. finish_round
// reveals the completed round so adaptive streams can react next round.
class Stream {
 public:
  virtual ~Stream() = default;
  virtual Context next_context() = 0;
  virtual double next_label(const Context& x, const Distribution& w) = 0;
  virtual void finish_round(const Context& x, int p_index, double y) {
    (void)x;
    (void)p_index;
    (void)y;
  }
};

// Contexts uniform on [0,1]^d, or uniform over a declared finite universe
// when one is given (transductive). Labels are Bernoulli(g(x)) with
// g(x) = clip(<gw, x> + gb, [0,1]).
class StochasticLinearStream : public Stream {
 public:
  StochasticLinearStream(int d, std::vector<double> label_weights,
                         double label_intercept, std::uint64_t seed,
                         std::vector<Context> universe = {})
      : d_(d),
        gw_(std::move(label_weights)),
        gb_(label_intercept),
        universe_(std::move(universe)),
        ctx_rng_(seed, rng_stream::kContexts),
        label_rng_(seed, rng_stream::kLabels) {
    if (d_ < 1) throw std::invalid_argument("StochasticLinearStream: d < 1");
    if (gw_.size() != static_cast<std::size_t>(d_)) {
      throw std::invalid_argument("StochasticLinearStream: label weight dimension");
    }
    for (const Context& x : universe_) {
      if (x.size() != static_cast<std::size_t>(d_)) {
        throw std::invalid_argument("StochasticLinearStream: universe dimension");
      }
      validate_context(x);
    }
  }

  Context next_context() override {
    if (!universe_.empty()) {
      return universe_[ctx_rng_.next_below(universe_.size())];
    }
    Context x(static_cast<std::size_t>(d_));
    for (double& c : x) c = ctx_rng_.next_double();
    return x;
  }

  double next_label(const Context& x, const Distribution&) override {
    double g = gb_;
    for (std::size_t i = 0; i < x.size(); ++i) g += gw_[i] * x[i];
    g = std::clamp(g, 0.0, 1.0);
    return label_rng_.next_double() < g ? 1.0 : 0.0;
  }

 private:
  int d_;
  std::vector<double> gw_;
  double gb_;
  std::vector<Context> universe_;
  SplitMix64 ctx_rng_;
  SplitMix64 label_rng_;
};

// Greedy adversarial stress generator. It tracks the running forecast-minus-
// label residual of every (hypothesis, bucket) pair,
//   R[h][p] = sum_{t in S(p)} h(x_t) * (p - y_t),
// picks the pair with the largest |R| (lowest (h, p) on ties), and emits the
// binary label maximizing the expected |R| of that pair under w_t:
//   objective(y) = (1 - w(p*)) |R*| + w(p*) |R* + h*(x)(p* - y)|,
// with y = 0 preferred on ties. The paper proves worst-case bounds against
// any adversary but fixes no concrete one; this is a documented heuristic.
class AdaptiveBucketStream : public Stream {
 public:
  AdaptiveBucketStream(std::shared_ptr<const HypothesisClass> H, PredictionGrid grid,
                       int d, std::uint64_t seed, std::vector<Context> universe = {})
      : class_(std::move(H)),
        grid_(grid),
        d_(d),
        universe_(std::move(universe)),
        ctx_rng_(seed, rng_stream::kContexts) {
    if (!class_ || class_->empty()) {
      throw std::invalid_argument("AdaptiveBucketStream: empty class");
    }
    residual_.assign(class_->size(),
                     std::vector<double>(static_cast<std::size_t>(grid_.size()), 0.0));
  }

  Context next_context() override {
    if (!universe_.empty()) {
      return universe_[ctx_rng_.next_below(universe_.size())];
    }
    Context x(static_cast<std::size_t>(d_));
    for (double& c : x) c = ctx_rng_.next_double();
    return x;
  }

  double next_label(const Context& x, const Distribution& w) override {
    std::size_t best_h = 0;
    int best_p = 0;
    double best_abs = -1.0;
    for (std::size_t h = 0; h < residual_.size(); ++h) {
      for (int p = 0; p < grid_.size(); ++p) {
        const double a = std::abs(residual_[h][static_cast<std::size_t>(p)]);
        if (a > best_abs) {
          best_abs = a;
          best_h = h;
          best_p = p;
        }
      }
    }
    const double r = residual_[best_h][static_cast<std::size_t>(best_p)];
    const double hx = (*class_)[best_h](x);
    const double wp = w.probs.at(static_cast<std::size_t>(best_p));
    const double pval = grid_.value(best_p);
    const double obj0 = (1.0 - wp) * std::abs(r) + wp * std::abs(r + hx * (pval - 0.0));
    const double obj1 = (1.0 - wp) * std::abs(r) + wp * std::abs(r + hx * (pval - 1.0));
    return obj1 > obj0 ? 1.0 : 0.0;
  }

  void finish_round(const Context& x, int p_index, double y) override {
    const double pval = grid_.value(p_index);
    for (std::size_t h = 0; h < residual_.size(); ++h) {
      residual_[h][static_cast<std::size_t>(p_index)] += (*class_)[h](x) * (pval - y);
    }
  }

  const std::vector<std::vector<double>>& residuals() const { return residual_; }

 private:
  std::shared_ptr<const HypothesisClass> class_;
  PredictionGrid grid_;
  int d_;
  std::vector<Context> universe_;
  SplitMix64 ctx_rng_;
  std::vector<std::vector<double>> residual_;
};

// Replays a fixed list of (context, label) rows in order; throws when the
// script is exhausted.
class ScriptedStream : public Stream {
 public:
  ScriptedStream(std::vector<Context> contexts, std::vector<double> labels)
      : contexts_(std::move(contexts)), labels_(std::move(labels)) {
    if (contexts_.size() != labels_.size() || contexts_.empty()) {
      throw std::invalid_argument("ScriptedStream: empty or ragged script");
    }
    for (const Context& x : contexts_) validate_context(x);
    for (double y : labels_) {
      if (!(y >= 0.0 && y <= 1.0)) {
        throw std::invalid_argument("ScriptedStream: label outside [0,1]");
      }
    }
  }

  Context next_context() override {
    if (pos_ >= contexts_.size()) throw std::out_of_range("ScriptedStream: exhausted");
    return contexts_[pos_];
  }

  double next_label(const Context&, const Distribution&) override {
    return labels_.at(pos_);
  }

  void finish_round(const Context&, int, double) override { ++pos_; }

 private:
  std::vector<Context> contexts_;
  std::vector<double> labels_;
  std::size_t pos_ = 0;
};

// File-level description of a stream; see make_stream.
struct StreamSpec {
  std::string kind = "stochastic-linear";  // stochastic-linear | adaptive-bucket | scripted
  int d = 1;
  std::vector<double> label_weights;  // g; defaults to 1/d per coordinate
  double label_intercept = 0.0;
  std::vector<Context> universe;      // non-empty => transductive draws
  std::vector<Context> scripted_contexts;
  std::vector<double> scripted_labels;
  std::uint64_t seed = 0;
};

inline std::unique_ptr<Stream> make_stream(const StreamSpec& spec,
                                           std::shared_ptr<const HypothesisClass> H,
                                           const PredictionGrid& grid) {
  if (spec.kind == "stochastic-linear") {
    std::vector<double> gw = spec.label_weights;
    if (gw.empty()) gw.assign(static_cast<std::size_t>(spec.d), 1.0 / spec.d);
    return std::make_unique<StochasticLinearStream>(spec.d, std::move(gw),
                                                    spec.label_intercept, spec.seed,
                                                    spec.universe);
  }
  if (spec.kind == "adaptive-bucket") {
    return std::make_unique<AdaptiveBucketStream>(std::move(H), grid, spec.d, spec.seed,
                                                  spec.universe);
  }
  if (spec.kind == "scripted") {
    return std::make_unique<ScriptedStream>(spec.scripted_contexts, spec.scripted_labels);
  }
  throw std::invalid_argument("make_stream: unknown kind '" + spec.kind + "'");
}

}  // namespace mcal
