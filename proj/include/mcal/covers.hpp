#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mcal/core.hpp"

namespace mcal {

// Parameters for a beta-cover of the weight l1-ball of radius B for degree-k
// polynomial-feature hypotheses on [0,1]^d (k = 1 is the plain linear class).
struct CoverSpec {
  int d = 1;
  int degree = 1;  // k
  double bound = 1.0;
  double beta = 1.0;
  std::size_t enumeration_cap = 1000000;

  void validate() const {
    if (d < 1 || degree < 1) throw std::invalid_argument("CoverSpec: d, k must be >= 1");
    if (!(bound > 0.0) || !(beta > 0.0)) {
      throw std::invalid_argument("CoverSpec: B, beta must be > 0");
    }
  }
};

namespace detail {

// Integer points k with sum |k_i| <= budget, emitted in lexicographic order
// (coordinate 0 outermost, ascending), scaled by the lattice spacing.
inline void enumerate_l1_lattice(int dims, int budget, double spacing,
                                 std::size_t cap, std::vector<double>& point,
                                 std::vector<std::vector<double>>& out) {
  const int pos = static_cast<int>(point.size());
  if (pos == dims) {
    if (out.size() >= cap) throw std::invalid_argument("linear_cover: enumeration cap exceeded");
    out.push_back(point);
    return;
  }
  for (int k = -budget; k <= budget; ++k) {
    point.push_back(k * spacing);
    enumerate_l1_lattice(dims, budget - std::abs(k), spacing, cap, point, out);
    point.pop_back();
  }
}

}  // namespace detail

// Beta-cover in the weight l1 metric; since features x_i^a stay in [0,1] on
// [0,1]^d, the weight distance upper-bounds the functional L_inf distance.
//
// Construction: lattice of per-coordinate spacing s = B/n intersected with
// the ball, with n the smallest integer making s * (kd) / 2 <= beta. Anchoring
// the spacing to B keeps the ball boundary on the lattice, so nearest-member
// distance stays within beta even where naive rounding would leave the ball.
// When beta >= 2B the ball diameter already fits and {0} suffices.
inline HypothesisClass linear_cover(const CoverSpec& spec) {
  spec.validate();
  const int dims = spec.d * spec.degree;

  const double bound_count = std::pow(1.0 + 2.0 * spec.bound / spec.beta, dims);
  if (!(bound_count <= static_cast<double>(spec.enumeration_cap))) {
    throw std::invalid_argument("linear_cover: enumeration cap exceeded");
  }

  std::vector<Hypothesis> members;
  if (spec.beta >= 2.0 * spec.bound) {
    members.push_back(Hypothesis::linear(std::vector<double>(dims, 0.0), spec.degree));
    return HypothesisClass(std::move(members), spec.bound);
  }

  const int n = static_cast<int>(
      std::ceil(static_cast<double>(dims) * spec.bound / (2.0 * spec.beta) - 1e-12));
  const double spacing = spec.bound / std::max(1, n);

  std::vector<std::vector<double>> points;
  std::vector<double> scratch;
  detail::enumerate_l1_lattice(dims, std::max(1, n), spacing, spec.enumeration_cap,
                               scratch, points);
  members.reserve(points.size());
  for (std::vector<double>& w : points) {
    members.push_back(Hypothesis::linear(std::move(w), spec.degree));
  }
  return HypothesisClass(std::move(members), spec.bound);
}

}  // namespace mcal
