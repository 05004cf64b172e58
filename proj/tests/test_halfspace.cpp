#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mcal/core.hpp"
#include "mcal/halfspace.hpp"
#include "mcal/rng.hpp"

using namespace mcal;

namespace {

ThetaVector box(std::vector<double> v) {
  return ThetaVector{std::move(v), ThetaVector::Mode::kBox};
}

const Hypothesis kUnit = Hypothesis::linear({1.0});  // h(x) = x on [0,1]
const Context kOne = {1.0};                          // h(kOne) = 1

double guarantee_sum(const std::vector<double>& th, const Distribution& w, double y,
                     const PredictionGrid& grid) {
  double s = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    s += th[static_cast<std::size_t>(i)] * w.probs[static_cast<std::size_t>(i)] *
         (y - grid.value(i));
  }
  return s;
}

// Reference crossing search, linear scan.
int linear_scan_crossing(const std::vector<double>& th) {
  for (std::size_t i = 0; i + 1 < th.size(); ++i) {
    if (th[i] > 0.0 && th[i + 1] <= 0.0) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

TEST_CASE("endpoint branches", "[halfspace]") {
  PredictionGrid grid(2);
  // theta_hat(0) <= 0 -> delta_0
  Distribution w0 = halfspace_oracle(kOne, kUnit, box({-0.5, 0.3, 0.8}), grid);
  REQUIRE(w0.probs == std::vector<double>{1.0, 0.0, 0.0});
  // theta_hat(m) >= 0 -> delta_m
  Distribution wm = halfspace_oracle(kOne, kUnit, box({0.5, 0.3, 0.1}), grid);
  REQUIRE(wm.probs == std::vector<double>{0.0, 0.0, 1.0});
}

TEST_CASE("interior mixture and its constant guarantee value", "[halfspace]") {
  PredictionGrid grid(2);
  Distribution w = halfspace_oracle(kOne, kUnit, box({0.5, -0.5, -1.0}), grid);
  REQUIRE(w.probs[0] == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(w.probs[1] == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(w.probs[2] == 0.0);
  // the y terms cancel; the sum is 0.125 for every y, below B/m = 0.5
  const std::vector<double> th = scaled_theta(box({0.5, -0.5, -1.0}), 1.0);
  for (int k = 0; k <= 100; ++k) {
    const double y = k / 100.0;
    REQUIRE(guarantee_sum(th, w, y, grid) == Catch::Approx(0.125).margin(1e-12));
  }
}

TEST_CASE("theta identically zero returns delta_0", "[halfspace]") {
  PredictionGrid grid(3);
  Distribution w = halfspace_oracle(kOne, kUnit, box({0.0, 0.0, 0.0, 0.0}), grid);
  REQUIRE(w.probs[0] == 1.0);
}

TEST_CASE("h(x) = 0 collapses every branch and the guarantee is 0", "[halfspace]") {
  PredictionGrid grid(4);
  const Context zero = {0.0};  // h(zero) = 0 for the linear unit hypothesis
  ThetaVector theta = box({0.9, -0.2, 0.4, -0.8, 0.1});
  Distribution w = halfspace_oracle(zero, kUnit, theta, grid);
  w.validate();
  const std::vector<double> th = scaled_theta(theta, 0.0);
  for (int k = 0; k <= 10; ++k) {
    REQUIRE(guarantee_sum(th, w, k / 10.0, grid) == 0.0);
  }
}

TEST_CASE("exact zero at the right endpoint of the crossing", "[halfspace]") {
  // theta_hat = (1, 0, -1): crossing at i=0 puts w = (0, 1, 0) per the formula.
  PredictionGrid grid(2);
  Distribution w = halfspace_oracle(kOne, kUnit, box({1.0, 0.0, -1.0}), grid);
  REQUIRE(w.probs[0] == 0.0);
  REQUIRE(!std::signbit(w.probs[0]));
  REQUIRE(w.probs[1] == 1.0);
  REQUIRE(w.probs[2] == 0.0);
}

TEST_CASE("support is at most two adjacent grid points", "[halfspace]") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 2 + static_cast<int>(rng.next_below(30));
    PredictionGrid grid(m);
    ThetaVector theta = box({});
    for (int i = 0; i <= m; ++i) theta.entries.push_back(2.0 * rng.next_double() - 1.0);
    Distribution w = halfspace_oracle(kOne, kUnit, theta, grid);
    w.validate();
    int first = -1, last = -1;
    for (int i = 0; i <= m; ++i) {
      if (w.probs[static_cast<std::size_t>(i)] > 0.0) {
        if (first < 0) first = i;
        last = i;
      }
    }
    REQUIRE(first >= 0);
    REQUIRE(last - first <= 1);
  }
}

TEST_CASE("bisection agrees with the linear-scan fallback", "[halfspace]") {
  SplitMix64 rng(29);
  for (int trial = 0; trial < 2000; ++trial) {
    const int m = 2 + static_cast<int>(rng.next_below(63));
    PredictionGrid grid(m);
    const double hx = 2.0 * rng.next_double() - 1.0;
    Hypothesis h = Hypothesis::linear({hx});  // h(kOne) = hx
    ThetaVector theta = box({});
    for (int i = 0; i <= m; ++i) theta.entries.push_back(2.0 * rng.next_double() - 1.0);
    const std::vector<double> th = scaled_theta(theta, hx);

    Distribution w = halfspace_oracle(kOne, h, theta, grid);
    if (th[0] <= 0.0) {
      REQUIRE(w.probs[0] == 1.0);
    } else if (th[static_cast<std::size_t>(m)] >= 0.0) {
      REQUIRE(w.probs[static_cast<std::size_t>(m)] == 1.0);
    } else {
      // the scan proves a crossing exists; the picked support must be one
      // (not necessarily the first when theta_hat crosses several times)
      REQUIRE(linear_scan_crossing(th) >= 0);
      std::vector<int> nz;
      for (int i = 0; i <= m; ++i) {
        if (w.probs[static_cast<std::size_t>(i)] > 0.0) nz.push_back(i);
      }
      // single support point means the right end of the crossing had
      // theta_hat exactly zero and the formula put full mass there
      const int i = nz.size() == 2 ? nz[0] : nz[0] - 1;
      REQUIRE(i + 1 <= m);
      const double a = th[static_cast<std::size_t>(i)];
      const double b = th[static_cast<std::size_t>(i) + 1];
      REQUIRE(a > 0.0);
      REQUIRE(b <= 0.0);
      REQUIRE(w.probs[static_cast<std::size_t>(i)] == b / (b - a) + 0.0);
      REQUIRE(w.probs[static_cast<std::size_t>(i) + 1] == a / (a - b));
    }
  }
}

TEST_CASE("unique crossing: bisection equals the scan's index", "[halfspace]") {
  SplitMix64 rng(43);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 2 + static_cast<int>(rng.next_below(63));
    PredictionGrid grid(m);
    // strictly decreasing theta_hat with a positive head and negative tail
    ThetaVector theta = box({});
    double v = 1.0;
    for (int i = 0; i <= m; ++i) {
      theta.entries.push_back(v);
      v -= (1.9 / m) * (0.5 + 0.5 * rng.next_double());
      v = std::max(v, -1.0);
    }
    if (theta.entries.back() >= 0.0) theta.entries.back() = -0.25;
    const std::vector<double> th = scaled_theta(theta, 1.0);
    const int expect = linear_scan_crossing(th);
    REQUIRE(expect >= 0);
    Distribution w = halfspace_oracle(kOne, kUnit, theta, grid);
    REQUIRE(w.probs[static_cast<std::size_t>(expect)] +
                w.probs[static_cast<std::size_t>(expect) + 1] ==
            Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("guarantee sweep on random draws", "[halfspace]") {
  SplitMix64 rng(37);
  double worst = -1e300;
  for (int trial = 0; trial < 2000; ++trial) {
    const int m = 2 + static_cast<int>(rng.next_below(63));
    PredictionGrid grid(m);
    const double B = rng.next_below(2) == 0 ? 1.0 : 5.0;
    const int d = 1 + static_cast<int>(rng.next_below(3));
    std::vector<double> wts(static_cast<std::size_t>(d));
    double norm = 0.0;
    for (double& c : wts) {
      c = 2.0 * rng.next_double() - 1.0;
      norm += std::abs(c);
    }
    for (double& c : wts) c *= B * rng.next_double() / std::max(norm, 1e-12);
    Hypothesis h = Hypothesis::linear(wts);
    Context x(static_cast<std::size_t>(d));
    for (double& c : x) c = rng.next_double();

    ThetaVector theta = box({});
    for (int i = 0; i <= m; ++i) theta.entries.push_back(2.0 * rng.next_double() - 1.0);

    Distribution w = halfspace_oracle(x, h, theta, grid);
    const std::vector<double> th = scaled_theta(theta, h(x));
    const double bound = B / m;
    for (int k = 0; k <= 100; ++k) {
      worst = std::max(worst, guarantee_sum(th, w, k / 100.0, grid) - bound);
    }
  }
  REQUIRE(worst <= 1e-12);
}

TEST_CASE("length mismatch is rejected", "[halfspace]") {
  PredictionGrid grid(2);
  REQUIRE_THROWS_AS(halfspace_oracle(kOne, kUnit, box({0.1, 0.2}), grid),
                    std::invalid_argument);
}
