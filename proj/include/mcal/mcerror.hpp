#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mcal/core.hpp"

namespace mcal {

// Per-bucket view of the online l1-multicalibration error of one hypothesis:
//   K_p(h) = | sum_{t in S(p)} h(x_t) * (y_t - p) |,   K(h) = (1/T) sum_p K_p(h).
struct BucketErrorReport {
  std::vector<double> bucket_error;       // K_p, length M
  std::vector<long long> bucket_count;    // T_p = |S(p)|
  double total = 0.0;                     // K(h)
};

// Single pass with one accumulator per grid bucket.
inline BucketErrorReport k_error(const Transcript& t, const Hypothesis& h) {
  if (t.empty()) throw std::invalid_argument("k_error: empty transcript");
  const PredictionGrid& grid = t.grid();
  std::vector<double> acc(static_cast<std::size_t>(grid.size()), 0.0);
  std::vector<long long> count(static_cast<std::size_t>(grid.size()), 0);
  for (const Round& r : t.rounds()) {
    const std::size_t p = static_cast<std::size_t>(r.p_index);
    acc[p] += h(r.x) * (r.y - grid.value(r.p_index));
    ++count[p];
  }
  BucketErrorReport rep;
  rep.bucket_count = std::move(count);
  rep.bucket_error.reserve(acc.size());
  double sum = 0.0;
  for (double a : acc) {
    rep.bucket_error.push_back(std::abs(a));
    sum += std::abs(a);
  }
  rep.total = sum / static_cast<double>(t.size());
  return rep;
}

// K over a class: max over members, argmax ties broken toward the lowest
// index so results are deterministic.
inline std::pair<double, std::size_t> k_error_class(const Transcript& t,
                                                    const HypothesisClass& H) {
  if (H.empty()) throw std::invalid_argument("k_error_class: empty class");
  double best = k_error(t, H[0]).total;
  std::size_t arg = 0;
  for (std::size_t i = 1; i < H.size(); ++i) {
    const double k = k_error(t, H[i]).total;
    if (k > best) {
      best = k;
      arg = i;
    }
  }
  return {best, arg};
}

}  // namespace mcal
