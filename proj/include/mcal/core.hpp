#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcal/rng.hpp"

namespace mcal {

// Normalization tolerance for stored probability vectors.
inline constexpr double kNormTol = 1e-12;

// A context is a point of [0,1]^d. Validation happens at the boundaries
// where contexts enter the system (streams, universe files, transcripts).
using Context = std::vector<double>;

inline void validate_context(const Context& x) {
  for (double c : x) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw std::invalid_argument("context coordinate outside [0,1]");
    }
  }
}

// Forecast grid {0, 1/m, ..., 1} of size M = m + 1.
class PredictionGrid {
 public:
  explicit PredictionGrid(int m) : m_(m) {
    if (m < 1) throw std::invalid_argument("PredictionGrid: m must be >= 1");
  }

  int m() const { return m_; }
  int size() const { return m_ + 1; }  // M
  double value(int i) const { return static_cast<double>(i) / m_; }

  friend bool operator==(const PredictionGrid& a, const PredictionGrid& b) {
    return a.m_ == b.m_;
  }

 private:
  int m_;
};

// Probability vector over the forecast grid.
struct Distribution {
  std::vector<double> probs;

  void validate() const {
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw std::invalid_argument("Distribution: negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kNormTol) {
      throw std::invalid_argument("Distribution: entries do not sum to 1");
    }
  }

  static Distribution point_mass(int i, int size) {
    Distribution w;
    w.probs.assign(static_cast<std::size_t>(size), 0.0);
    w.probs.at(static_cast<std::size_t>(i)) = 1.0;
    return w;
  }
};

// Inverse-CDF sample from w: the smallest index i with F(i) >= u, i.e. ties
// at cumulative boundaries break toward the lower index.
inline int sample_from_distribution(const Distribution& w, SplitMix64& rng) {
  w.validate();
  const double u = rng.next_double();
  double cum = 0.0;
  const int n = static_cast<int>(w.probs.size());
  for (int i = 0; i < n; ++i) {
    cum += w.probs[i];
    if (u <= cum) return i;
  }
  return n - 1;  // cum fell short of 1 by rounding
}

// Reward vector f over the grid; the reduction only ever produces
// ||f||_1 <= 1 (each entry is w(i) * (y - i/m)).
struct RewardVector {
  std::vector<double> entries;

  double l1_norm() const {
    double s = 0.0;
    for (double v : entries) s += std::abs(v);
    return s;
  }
};

// Action vector: box mode (||.||_inf <= 1) for Lin-OLPO, sign mode
// (coordinates in {-1,+1}) for GFTPL.
struct ThetaVector {
  enum class Mode { kBox, kSign };

  std::vector<double> entries;
  Mode mode = Mode::kBox;

  void validate() const {
    for (double v : entries) {
      if (mode == Mode::kBox) {
        if (!(v >= -1.0 && v <= 1.0)) {
          throw std::invalid_argument("ThetaVector: box entry outside [-1,1]");
        }
      } else {
        if (v != 1.0 && v != -1.0) {
          throw std::invalid_argument("ThetaVector: sign entry not in {-1,+1}");
        }
      }
    }
  }

  static ThetaVector zeros(int size) {
    return ThetaVector{std::vector<double>(static_cast<std::size_t>(size), 0.0),
                       Mode::kBox};
  }
};

// A hypothesis is either table-backed binary over a finite context universe,
// or a linear form on polynomial features x_i^a (degree 1 = plain linear).
class Hypothesis {
 public:
  enum class Kind { kTableBinary, kLinear };

  static Hypothesis table_binary(std::shared_ptr<const std::vector<Context>> universe,
                                 std::vector<double> values) {
    if (!universe || universe->empty()) {
      throw std::invalid_argument("table hypothesis: empty universe");
    }
    if (values.size() != universe->size()) {
      throw std::invalid_argument("table hypothesis: values/universe size mismatch");
    }
    for (double v : values) {
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("table hypothesis: values must be 0 or 1");
      }
    }
    Hypothesis h;
    h.kind_ = Kind::kTableBinary;
    h.universe_ = std::move(universe);
    h.coeffs_ = std::move(values);
    return h;
  }

  static Hypothesis linear(std::vector<double> weights, int degree = 1) {
    if (degree < 1) throw std::invalid_argument("linear hypothesis: degree < 1");
    if (weights.empty() || weights.size() % static_cast<std::size_t>(degree) != 0) {
      throw std::invalid_argument("linear hypothesis: weights not divisible by degree");
    }
    Hypothesis h;
    h.kind_ = Kind::kLinear;
    h.degree_ = degree;
    h.coeffs_ = std::move(weights);
    return h;
  }

  Kind kind() const { return kind_; }
  int degree() const { return degree_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::vector<Context>* universe() const { return universe_.get(); }

  // Context dimension d the hypothesis evaluates on.
  std::size_t context_dim() const {
    if (kind_ == Kind::kTableBinary) return (*universe_)[0].size();
    return coeffs_.size() / static_cast<std::size_t>(degree_);
  }

  // Sup of |h| over the representable contexts: 1 for a nonzero table row
  // (0 for the all-zero row), ||w||_1 for linear features since x_i^a stays
  // in [0,1] on [0,1]^d.
  double sup_bound() const {
    if (kind_ == Kind::kTableBinary) {
      return *std::max_element(coeffs_.begin(), coeffs_.end());
    }
    double s = 0.0;
    for (double w : coeffs_) s += std::abs(w);
    return s;
  }

  double operator()(const Context& x) const {
    if (kind_ == Kind::kTableBinary) {
      for (std::size_t j = 0; j < universe_->size(); ++j) {
        if ((*universe_)[j] == x) return coeffs_[j];
      }
      throw std::domain_error("table hypothesis: context not in universe");
    }
    const std::size_t d = context_dim();
    if (x.size() != d) {
      throw std::invalid_argument("linear hypothesis: context dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double pw = 1.0;
      for (int a = 0; a < degree_; ++a) {
        pw *= x[i];
        acc += coeffs_[i * static_cast<std::size_t>(degree_) +
                       static_cast<std::size_t>(a)] * pw;
      }
    }
    return acc;
  }

  // Representation equality; distinct representations are distinct functions
  // for both kinds (monomials are linearly independent on [0,1]^d).
  friend bool operator==(const Hypothesis& a, const Hypothesis& b) {
    if (a.kind_ != b.kind_ || a.degree_ != b.degree_) return false;
    if (a.kind_ == Kind::kTableBinary && a.universe_ != b.universe_ &&
        *a.universe_ != *b.universe_) {
      return false;
    }
    return a.coeffs_ == b.coeffs_;
  }

 private:
  Kind kind_ = Kind::kLinear;
  int degree_ = 1;
  std::shared_ptr<const std::vector<Context>> universe_;
  std::vector<double> coeffs_;  // table values or feature weights
};

// Ordered, pairwise-distinct family of hypotheses with a shared bound B.
// Identically-zero table rows are rejected here: they carry no constraint
// and would break the separator argument downstream.
class HypothesisClass {
 public:
  HypothesisClass() = default;

  HypothesisClass(std::vector<Hypothesis> members, double bound)
      : members_(std::move(members)), bound_(bound) {
    if (!(bound_ > 0.0)) throw std::invalid_argument("HypothesisClass: bound must be > 0");
    for (const Hypothesis& h : members_) {
      if (h.kind() == Hypothesis::Kind::kTableBinary && h.sup_bound() == 0.0) {
        throw std::invalid_argument("HypothesisClass: identically-zero table hypothesis");
      }
      if (h.sup_bound() > bound_ + kNormTol) {
        throw std::invalid_argument("HypothesisClass: member exceeds bound");
      }
    }
    check_distinct();
  }

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  double bound() const { return bound_; }
  const Hypothesis& operator[](std::size_t i) const { return members_.at(i); }
  const std::vector<Hypothesis>& members() const { return members_; }

  bool binary_valued() const {
    return !members_.empty() &&
           std::all_of(members_.begin(), members_.end(), [](const Hypothesis& h) {
             return h.kind() == Hypothesis::Kind::kTableBinary;
           });
  }

 private:
  void check_distinct() const {
    if (members_.size() < 2) return;
    std::vector<std::size_t> order(members_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto key_less = [this](std::size_t a, std::size_t b) {
      const Hypothesis& ha = members_[a];
      const Hypothesis& hb = members_[b];
      if (ha.kind() != hb.kind()) return ha.kind() < hb.kind();
      if (ha.degree() != hb.degree()) return ha.degree() < hb.degree();
      return ha.coefficients() < hb.coefficients();
    };
    std::sort(order.begin(), order.end(), key_less);
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (members_[order[i - 1]] == members_[order[i]]) {
        throw std::invalid_argument("HypothesisClass: duplicate members");
      }
    }
  }

  std::vector<Hypothesis> members_;
  double bound_ = 1.0;
};

// One interaction round as stored in a transcript.
struct Round {
  Context x;
  int p_index = 0;
  double y = 0.0;
  std::vector<double> w;  // prediction distribution the index was drawn from
};

// Ordered record of (context, prediction, label, distribution) rounds; the
// object the multicalibration error K is evaluated on.
class Transcript {
 public:
  explicit Transcript(PredictionGrid grid) : grid_(grid) {}

  void append(Round r) {
    if (r.p_index < 0 || r.p_index > grid_.m()) {
      throw std::invalid_argument("Transcript: prediction index outside grid");
    }
    if (!(r.y >= 0.0 && r.y <= 1.0)) {
      throw std::invalid_argument("Transcript: label outside [0,1]");
    }
    if (static_cast<int>(r.w.size()) != grid_.size()) {
      throw std::invalid_argument("Transcript: distribution length != M");
    }
    Distribution{r.w}.validate();
    validate_context(r.x);
    if (!rounds_.empty() && r.x.size() != rounds_.front().x.size()) {
      throw std::invalid_argument("Transcript: context dimension changed mid-run");
    }
    rounds_.push_back(std::move(r));
  }

  const PredictionGrid& grid() const { return grid_; }
  const std::vector<Round>& rounds() const { return rounds_; }
  std::size_t size() const { return rounds_.size(); }
  bool empty() const { return rounds_.empty(); }

  std::string to_csv() const;
  static Transcript from_csv(const std::string& text);

 private:
  PredictionGrid grid_;
  std::vector<Round> rounds_;
};

// Shortest exact decimal round-trip for doubles (%.17g always re-parses to
// the same bits; prefer fewer digits when they round-trip).
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string Transcript::to_csv() const {
  std::ostringstream out;
  const std::size_t d = rounds_.empty() ? 0 : rounds_.front().x.size();
  out << "round";
  for (std::size_t i = 0; i < d; ++i) out << ",x" << i;
  out << ",p_index,y";
  for (int i = 0; i < grid_.size(); ++i) out << ",w" << i;
  out << "\n";
  for (std::size_t t = 0; t < rounds_.size(); ++t) {
    const Round& r = rounds_[t];
    out << (t + 1);
    for (double c : r.x) out << "," << format_double(c);
    out << "," << r.p_index << "," << format_double(r.y);
    for (double p : r.w) out << "," << format_double(p);
    out << "\n";
  }
  return out.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline Transcript Transcript::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("transcript: empty file");
  const std::vector<std::string> header = split_csv_line(line);
  std::size_t d = 0;
  int m_cols = 0;
  for (const std::string& col : header) {
    if (col.size() > 1 && col[0] == 'x') ++d;
    if (col.size() > 1 && col[0] == 'w') ++m_cols;
  }
  if (m_cols < 2) throw std::invalid_argument("transcript: missing distribution columns");
  Transcript t(PredictionGrid(m_cols - 1));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw std::invalid_argument("transcript: ragged row");
    }
    Round r;
    std::size_t k = 1;
    for (std::size_t i = 0; i < d; ++i) r.x.push_back(std::strtod(f[k++].c_str(), nullptr));
    r.p_index = static_cast<int>(std::strtol(f[k++].c_str(), nullptr, 10));
    r.y = std::strtod(f[k++].c_str(), nullptr);
    for (int i = 0; i < m_cols; ++i) r.w.push_back(std::strtod(f[k++].c_str(), nullptr));
    t.append(std::move(r));
  }
  return t;
}

}  // namespace mcal
