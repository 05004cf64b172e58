#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mcal/core.hpp"
#include "mcal/olpo.hpp"
#include "mcal/rng.hpp"

namespace mcal {

// Implicit perturbation translation matrix: rows indexed by (h, theta) with
// theta in {-1,+1}^M, columns by (j, i) in [D] x [M], entry h(x^j) * theta_i.
// Only the separator contexts and grid size are stored; rows are never
// materialized outside of verification.
struct GammaSpec {
  std::vector<Context> separator;  // x^1..x^D (transductive universe or separator)
  int grid_size = 0;               // M

  std::size_t columns() const { return separator.size() * static_cast<std::size_t>(grid_size); }

  void validate() const {
    if (separator.empty()) throw std::invalid_argument("GammaSpec: empty separator");
    if (grid_size < 1) throw std::invalid_argument("GammaSpec: grid size < 1");
  }
};

// Perturbation noise alpha, one entry per Gamma column, each Unif[0, scale];
// drawn once per run and fixed thereafter.
struct NoiseVector {
  std::vector<double> alpha;  // entry (j, i) lives at j * M + i

  static NoiseVector draw(const GammaSpec& spec, double scale, SplitMix64& rng) {
    spec.validate();
    NoiseVector nv;
    nv.alpha.reserve(spec.columns());
    for (std::size_t k = 0; k < spec.columns(); ++k) {
      nv.alpha.push_back(rng.next_double(scale));
    }
    return nv;
  }

  static NoiseVector zeros(const GammaSpec& spec) {
    return NoiseVector{std::vector<double>(spec.columns(), 0.0)};
  }
};

inline double gamma_entry(const GammaSpec& spec, const Hypothesis& h,
                          const ThetaVector& theta, std::size_t j, std::size_t i) {
  if (j >= spec.separator.size() || i >= static_cast<std::size_t>(spec.grid_size)) {
    throw std::out_of_range("gamma_entry: index out of range");
  }
  return h(spec.separator[j]) * theta.entries.at(i);
}

// <alpha, Gamma_(h,theta)> computed in O(D*M) via the factored form
// sum_j h(x^j) <alpha_(j,.), theta>, without materializing Gamma.
inline double perturbation(const GammaSpec& spec, const NoiseVector& noise,
                           const Hypothesis& h, const ThetaVector& theta) {
  if (noise.alpha.size() != spec.columns() ||
      theta.entries.size() != static_cast<std::size_t>(spec.grid_size)) {
    throw std::invalid_argument("perturbation: dimension mismatch");
  }
  const std::size_t M = static_cast<std::size_t>(spec.grid_size);
  double total = 0.0;
  for (std::size_t j = 0; j < spec.separator.size(); ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      dot += noise.alpha[j * M + i] * theta.entries[i];
    }
    total += h(spec.separator[j]) * dot;
  }
  return total;
}

// Input to the offline optimization oracle: kappa-weighted rounds plus the
// allowed optimality slack epsilon (the exact backend returns slack-0
// solutions regardless).
struct OracleQuery {
  std::vector<Context> xs;
  std::vector<RewardVector> fs;
  std::vector<double> kappas;
  double epsilon = 0.0;

  void validate() const {
    if (xs.size() != fs.size() || xs.size() != kappas.size()) {
      throw std::invalid_argument("OracleQuery: ragged history");
    }
    if (epsilon < 0.0) throw std::invalid_argument("OracleQuery: epsilon < 0");
    for (double k : kappas) {
      if (!std::isfinite(k)) throw std::invalid_argument("OracleQuery: non-finite kappa");
    }
  }
};

struct OracleSolution {
  std::size_t h_index = 0;
  ThetaVector theta;  // sign mode
  double value = 0.0;
};

// Sign vector maximizing <theta, v> over {-1,+1}^M: coordinatewise sign with
// zeros mapped to +1; the value is ||v||_1.
inline ThetaVector sign_argmax(const std::vector<double>& v) {
  ThetaVector theta;
  theta.mode = ThetaVector::Mode::kSign;
  theta.entries.reserve(v.size());
  for (double c : v) theta.entries.push_back(c >= 0.0 ? 1.0 : -1.0);
  return theta;
}

// Exact offline oracle: maximize sum_s kappa_s <theta, h(x_s) * f_s> over
// H x {-1,+1}^M by enumerating members; per member the optimal theta is the
// closed-form sign of v(h) = sum_s kappa_s h(x_s) f_s and the value ||v(h)||_1.
// Member ties break toward the lowest index.
inline OracleSolution offline_oracle(const OracleQuery& q, const HypothesisClass& H) {
  q.validate();
  if (H.empty()) throw std::invalid_argument("offline_oracle: empty class");
  if (q.xs.empty()) throw std::invalid_argument("offline_oracle: empty history");
  const std::size_t M = q.fs[0].entries.size();
  OracleSolution best;
  bool have = false;
  std::vector<double> v(M);
  for (std::size_t h = 0; h < H.size(); ++h) {
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t s = 0; s < q.xs.size(); ++s) {
      const double c = q.kappas[s] * H[h](q.xs[s]);
      for (std::size_t i = 0; i < M; ++i) v[i] += c * q.fs[s].entries[i];
    }
    double norm = 0.0;
    for (double c : v) norm += std::abs(c);
    if (!have || norm > best.value) {
      have = true;
      best.h_index = h;
      best.theta = sign_argmax(v);
      best.value = norm;
    }
  }
  return best;
}

// Parameter prescriptions as functions of the horizon. The end-to-end
// multicalibration path uses m = ceil(T^{1/4}) and epsilon = T^{-1/4}; the
// standalone regret path uses epsilon = T^{-1/2}; noise is Unif[0, sqrt(T)]
// in both.
struct GftplDefaults {
  int m = 1;
  double epsilon_multical = 1.0;
  double epsilon_regret = 1.0;
  double noise_scale = 1.0;
};

// Smallest integer r >= 1 with r^k >= n (exact integer arithmetic; the pow
// estimate alone can land on either side of an exact root).
inline int ceil_root(long long n, int k) {
  if (n < 1 || k < 1) throw std::invalid_argument("ceil_root: bad arguments");
  auto pow_ge = [k, n](long long r) {
    long long acc = 1;
    for (int i = 0; i < k; ++i) {
      if (acc > n / r + 1) return true;
      acc *= r;
    }
    return acc >= n;
  };
  long long r = std::llround(std::pow(static_cast<double>(n), 1.0 / k));
  r = std::max<long long>(1, r - 2);
  while (!pow_ge(r)) ++r;
  while (r > 1 && pow_ge(r - 1)) --r;
  return static_cast<int>(r);
}

inline GftplDefaults gftpl_defaults(long long T) {
  if (T < 1) throw std::invalid_argument("gftpl_defaults: T < 1");
  GftplDefaults d;
  d.m = ceil_root(T, 4);
  d.epsilon_multical = std::pow(static_cast<double>(T), -0.25);
  d.epsilon_regret = 1.0 / std::sqrt(static_cast<double>(T));
  d.noise_scale = std::sqrt(static_cast<double>(T));
  return d;
}

// Materialized-Gamma check of 1-admissibility for binary-valued classes:
// all rows distinct and unequal entries within a column at least 1 apart.
// Real-valued classes are rejected; the construction's guarantee is only
// stated for binary H.
struct AdmissibilityReport {
  bool admissible = false;
  double worst_gap = std::numeric_limits<double>::infinity();
};

// Theta rows are enumerated by bit pattern b ascending with bit i = 0 meaning
// theta_i = +1, so the all-plus vector comes first. This is the same order the
// test-side enumerations use.
inline ThetaVector theta_from_bits(std::uint32_t bits, int M) {
  ThetaVector theta;
  theta.mode = ThetaVector::Mode::kSign;
  theta.entries.reserve(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    theta.entries.push_back((bits >> i) & 1u ? -1.0 : 1.0);
  }
  return theta;
}

inline AdmissibilityReport verify_admissibility(const GammaSpec& spec,
                                                const HypothesisClass& H,
                                                std::size_t row_cap = 4096) {
  spec.validate();
  if (H.empty()) throw std::invalid_argument("verify_admissibility: empty class");
  if (!H.binary_valued()) {
    throw std::invalid_argument("verify_admissibility: class is not binary-valued");
  }
  const int M = spec.grid_size;
  if (M > 20) throw std::invalid_argument("verify_admissibility: grid too large");
  const std::size_t rows_n = H.size() << M;
  if (rows_n > row_cap) {
    throw std::invalid_argument("verify_admissibility: materialization cap exceeded");
  }

  const std::size_t cols = spec.columns();
  const std::size_t D = spec.separator.size();
  std::vector<std::vector<double>> hvals(H.size(), std::vector<double>(D));
  for (std::size_t h = 0; h < H.size(); ++h) {
    for (std::size_t j = 0; j < D; ++j) hvals[h][j] = H[h](spec.separator[j]);
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(rows_n);
  for (std::size_t h = 0; h < H.size(); ++h) {
    for (std::uint32_t b = 0; b < (1u << M); ++b) {
      const ThetaVector theta = theta_from_bits(b, M);
      std::vector<double> row(cols);
      for (std::size_t j = 0; j < D; ++j) {
        for (int i = 0; i < M; ++i) {
          row[j * static_cast<std::size_t>(M) + static_cast<std::size_t>(i)] =
              hvals[h][j] * theta.entries[static_cast<std::size_t>(i)];
        }
      }
      rows.push_back(std::move(row));
    }
  }

  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&rows](std::size_t a, std::size_t b) { return rows[a] < rows[b]; });
  bool distinct = true;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (rows[order[i - 1]] == rows[order[i]]) {
      distinct = false;
      break;
    }
  }

  AdmissibilityReport rep;
  for (std::size_t c = 0; c < cols; ++c) {
    std::vector<double> uniq;
    for (const std::vector<double>& row : rows) {
      if (std::find(uniq.begin(), uniq.end(), row[c]) == uniq.end()) {
        uniq.push_back(row[c]);
      }
    }
    std::sort(uniq.begin(), uniq.end());
    for (std::size_t i = 1; i < uniq.size(); ++i) {
      rep.worst_gap = std::min(rep.worst_gap, uniq[i] - uniq[i - 1]);
    }
  }
  rep.admissible = distinct && rep.worst_gap >= 1.0 - kNormTol;
  return rep;
}

// Generalized follow-the-perturbed-leader for the product-reward problem.
// Round t plays an (exact) maximizer of
//   sum_{s<t} <theta, h(x_s) f_s> + <alpha, Gamma_(h,theta)>,
// realized as one offline-oracle evaluation on the history augmented with the
// D implementability terms (kappa_j = 1, reward alpha_(j,.) at context x^j),
// so the learner never touches Gamma itself.
//
// The per-round evaluation reuses running history sums: cum[h] after round
// t-1 equals the oracle's partial sum bit-for-bit (same accumulation order),
// and each propose() adds the noise terms in column order on top, so the
// decision is identical to offline_oracle(current_query()) — a property the
// tests assert exactly. One oracle evaluation per round, counted.
class GftplLearner : public OlpoLearner {
 public:
  GftplLearner(const HypothesisClass& H, PredictionGrid grid, GammaSpec spec,
               long long horizon, double epsilon, SplitMix64 rng)
      : GftplLearner(H, grid, spec, epsilon,
                     NoiseVector::draw(spec, std::sqrt(static_cast<double>(horizon)), rng)) {
    if (horizon < 1) throw std::invalid_argument("GftplLearner: horizon < 1");
  }

  // Injectable noise (tests use zeros to reduce to the unperturbed oracle).
  GftplLearner(const HypothesisClass& H, PredictionGrid grid, GammaSpec spec,
               double epsilon, NoiseVector noise)
      : class_(&H), grid_(grid), spec_(std::move(spec)), epsilon_(epsilon),
        noise_(std::move(noise)) {
    spec_.validate();
    if (H.empty()) throw std::invalid_argument("GftplLearner: empty class");
    if (spec_.grid_size != grid.size()) {
      throw std::invalid_argument("GftplLearner: spec grid size != grid");
    }
    if (epsilon_ < 0.0) throw std::invalid_argument("GftplLearner: epsilon < 0");
    if (noise_.alpha.size() != spec_.columns()) {
      throw std::invalid_argument("GftplLearner: noise length != D*M");
    }
    cum_.assign(H.size(), std::vector<double>(static_cast<std::size_t>(grid.size()), 0.0));
    hsep_.assign(H.size(), std::vector<double>(spec_.separator.size()));
    for (std::size_t h = 0; h < H.size(); ++h) {
      for (std::size_t j = 0; j < spec_.separator.size(); ++j) {
        hsep_[h][j] = H[h](spec_.separator[j]);
      }
    }
  }

  OlpoDecision propose() override {
    const std::size_t M = static_cast<std::size_t>(grid_.size());
    const std::size_t D = spec_.separator.size();
    OracleSolution best;
    bool have = false;
    std::vector<double> v(M);
    for (std::size_t h = 0; h < class_->size(); ++h) {
      v = cum_[h];
      for (std::size_t j = 0; j < D; ++j) {
        const double c = hsep_[h][j];
        for (std::size_t i = 0; i < M; ++i) v[i] += c * noise_.alpha[j * M + i];
      }
      double norm = 0.0;
      for (double c : v) norm += std::abs(c);
      if (!have || norm > best.value) {
        have = true;
        best.h_index = h;
        best.theta = sign_argmax(v);
        best.value = norm;
      }
    }
    ++oracle_calls_;
    last_ = OlpoDecision{best.h_index, best.theta};
    has_last_ = true;
    return last_;
  }

  // Deterministic given the drawn noise, so the conditional expectation is
  // the realized product reward of the cached decision.
  double expected_reward(const Context& x, const RewardVector& f) const override {
    if (!has_last_) throw std::logic_error("GftplLearner: expected_reward before propose");
    const double hx = (*class_)[last_.h_index](x);
    double dot = 0.0;
    for (std::size_t i = 0; i < f.entries.size(); ++i) {
      dot += last_.theta.entries[i] * f.entries[i];
    }
    return hx * dot;
  }

  void update(const Context& x, const RewardVector& f) override {
    if (f.entries.size() != static_cast<std::size_t>(grid_.size())) {
      throw std::invalid_argument("GftplLearner: reward length != M");
    }
    xs_.push_back(x);
    fs_.push_back(f);
    for (std::size_t h = 0; h < class_->size(); ++h) {
      const double hx = (*class_)[h](x);
      for (std::size_t i = 0; i < f.entries.size(); ++i) {
        cum_[h][i] += hx * f.entries[i];
      }
    }
  }

  // History plus implementability terms, exactly as the standalone oracle
  // would receive them this round.
  OracleQuery current_query() const {
    OracleQuery q;
    q.xs = xs_;
    q.fs = fs_;
    q.kappas.assign(xs_.size(), 1.0);
    const std::size_t M = static_cast<std::size_t>(grid_.size());
    for (std::size_t j = 0; j < spec_.separator.size(); ++j) {
      q.xs.push_back(spec_.separator[j]);
      RewardVector alpha_row;
      alpha_row.entries.assign(noise_.alpha.begin() + static_cast<std::ptrdiff_t>(j * M),
                               noise_.alpha.begin() + static_cast<std::ptrdiff_t>((j + 1) * M));
      q.fs.push_back(std::move(alpha_row));
      q.kappas.push_back(1.0);
    }
    q.epsilon = epsilon_;
    return q;
  }

  long long oracle_calls() const { return oracle_calls_; }
  const NoiseVector& noise() const { return noise_; }
  const GammaSpec& spec() const { return spec_; }
  double epsilon() const { return epsilon_; }

 private:
  const HypothesisClass* class_;
  PredictionGrid grid_{1};
  GammaSpec spec_;
  double epsilon_ = 0.0;
  NoiseVector noise_;
  std::vector<std::vector<double>> cum_;   // sum_{s<t} h(x_s) f_s per h
  std::vector<std::vector<double>> hsep_;  // h(x^j) cache
  std::vector<Context> xs_;
  std::vector<RewardVector> fs_;
  long long oracle_calls_ = 0;
  OlpoDecision last_;
  bool has_last_ = false;
};

}  // namespace mcal
