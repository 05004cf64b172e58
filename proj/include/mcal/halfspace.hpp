#pragma once

#include <stdexcept>
#include <vector>

#include "mcal/core.hpp"

namespace mcal {

// Entries theta_hat(i) = theta(i) * h(x); |theta_hat(i)| <= B whenever
// ||theta||_inf <= 1 and |h(x)| <= B.
inline std::vector<double> scaled_theta(const ThetaVector& theta, double h_at_x) {
  std::vector<double> out;
  out.reserve(theta.entries.size());
  for (double v : theta.entries) out.push_back(v * h_at_x);
  return out;
}

// Halfspace oracle: a forecast distribution w, supported on at most two
// adjacent grid points, under which
//   sum_i theta(i) * h(x) * w(i) * (y - i/m)  <=  B/m   for every y in [0,1].
//
// If theta_hat(0) <= 0 the left endpoint already works for any y; likewise
// delta_m when theta_hat(m) >= 0. Otherwise theta_hat changes sign somewhere
// and the two-point mixture at the crossing cancels the y-coefficients:
//   theta_hat(i) w(i) + theta_hat(i+1) w(i+1) = 0,
// leaving a constant that AM-HM bounds by B/m. The crossing is found by
// bisection keeping theta_hat(lo) > 0 and theta_hat(hi) <= 0.
inline Distribution halfspace_oracle(const Context& x, const Hypothesis& h,
                                     const ThetaVector& theta,
                                     const PredictionGrid& grid) {
  if (static_cast<int>(theta.entries.size()) != grid.size()) {
    throw std::invalid_argument("halfspace_oracle: theta length != grid size");
  }
  theta.validate();
  const int m = grid.m();
  const std::vector<double> th = scaled_theta(theta, h(x));

  if (th[0] <= 0.0) return Distribution::point_mass(0, grid.size());
  if (th[static_cast<std::size_t>(m)] >= 0.0) {
    return Distribution::point_mass(m, grid.size());
  }

  int lo = 0;  // th[lo] > 0
  int hi = m;  // th[hi] <= 0
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (th[static_cast<std::size_t>(mid)] > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  const double a = th[static_cast<std::size_t>(lo)];
  const double b = th[static_cast<std::size_t>(hi)];
  Distribution w;
  w.probs.assign(static_cast<std::size_t>(grid.size()), 0.0);
  w.probs[static_cast<std::size_t>(lo)] = b / (b - a) + 0.0;  // clears -0
  w.probs[static_cast<std::size_t>(hi)] = a / (a - b);
  return w;
}

}  // namespace mcal
