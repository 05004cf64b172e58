#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcal/core.hpp"
#include "mcal/covers.hpp"
#include "mcal/rng.hpp"
#include "mcal/streams.hpp"

namespace mcal {

// Flat "key: value" text with '#' comments; duplicate keys are kept in order
// (used for repeated member: lines).
struct KeyValueFile {
  std::vector<std::pair<std::string, std::string>> entries;

  bool has(const std::string& key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return true;
    }
    return false;
  }

  std::string get(const std::string& key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return v;
    }
    throw std::invalid_argument("spec file: missing key '" + key + "'");
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
  }

  std::vector<std::string> get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries) {
      if (k == key) out.push_back(v);
    }
    return out;
  }
};

inline std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline KeyValueFile parse_keyvalue(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t colon = t.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("spec file: expected 'key: value' in '" + t + "'");
    }
    kv.entries.emplace_back(trim(t.substr(0, colon)), trim(t.substr(colon + 1)));
  }
  return kv;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

inline std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

// Universe / scripted files: header "x0,...,x{d-1}[,y]" then one context
// (plus optional label) per row.
struct ContextTable {
  std::vector<Context> contexts;
  std::vector<double> labels;  // empty when the file has no y column
};

inline ContextTable parse_context_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("context table: empty");
  const std::vector<std::string> header = split_csv_line(trim(line));
  std::size_t d = 0;
  bool has_label = false;
  for (const std::string& col : header) {
    if (!col.empty() && col[0] == 'x') ++d;
    if (col == "y") has_label = true;
  }
  if (d == 0) throw std::invalid_argument("context table: no x columns");
  ContextTable table;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::vector<std::string> f = split_csv_line(t);
    if (f.size() != header.size()) throw std::invalid_argument("context table: ragged row");
    Context x;
    for (std::size_t i = 0; i < d; ++i) x.push_back(std::strtod(f[i].c_str(), nullptr));
    validate_context(x);
    table.contexts.push_back(std::move(x));
    if (has_label) table.labels.push_back(std::strtod(f[d].c_str(), nullptr));
  }
  if (table.contexts.empty()) throw std::invalid_argument("context table: no rows");
  return table;
}

inline std::string context_table_to_csv(const ContextTable& table) {
  std::ostringstream out;
  const std::size_t d = table.contexts.at(0).size();
  for (std::size_t i = 0; i < d; ++i) out << (i ? "," : "") << "x" << i;
  if (!table.labels.empty()) out << ",y";
  out << "\n";
  for (std::size_t r = 0; r < table.contexts.size(); ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      out << (i ? "," : "") << format_double(table.contexts[r][i]);
    }
    if (!table.labels.empty()) out << "," << format_double(table.labels[r]);
    out << "\n";
  }
  return out.str();
}

// Distinct nonzero binary value rows over a universe, drawn by rejection.
inline HypothesisClass random_table_class(std::shared_ptr<const std::vector<Context>> universe,
                                          std::size_t count, std::uint64_t seed) {
  const std::size_t D = universe->size();
  if (D >= 63 || count > ((std::size_t{1} << D) - 1)) {
    throw std::invalid_argument("random_table_class: count exceeds distinct rows");
  }
  SplitMix64 rng(seed, rng_stream::kLearner);
  std::vector<std::uint64_t> seen;
  std::vector<Hypothesis> members;
  while (members.size() < count) {
    const std::uint64_t bits = rng.next_below((std::uint64_t{1} << D) - 1) + 1;
    bool dup = false;
    for (std::uint64_t s : seen) dup = dup || s == bits;
    if (dup) continue;
    seen.push_back(bits);
    std::vector<double> vals(D);
    for (std::size_t j = 0; j < D; ++j) vals[j] = (bits >> j) & 1u ? 1.0 : 0.0;
    members.push_back(Hypothesis::table_binary(universe, std::move(vals)));
  }
  return HypothesisClass(std::move(members), 1.0);
}

// Class spec files. Kinds:
//   kind: linear-cover   d, k, bound, beta           -> expanded at load time
//   kind: linear         bound, member: w1 w2 ...    (repeated member lines)
//   kind: table          universe: <path>, member: v1 ... vD   (0/1 rows)
//   kind: table-random   universe: <path>, count, seed
// A table universe can also be supplied by the caller (e.g. the stream's).
inline HypothesisClass load_class_spec(const KeyValueFile& kv,
                                       std::shared_ptr<const std::vector<Context>> universe =
                                           nullptr) {
  const std::string kind = kv.get("kind");
  if (kind == "linear-cover") {
    CoverSpec spec;
    spec.d = static_cast<int>(std::stol(kv.get("d")));
    spec.degree = static_cast<int>(std::stol(kv.get_or("k", "1")));
    spec.bound = std::stod(kv.get("bound"));
    spec.beta = std::stod(kv.get("beta"));
    return linear_cover(spec);
  }
  if (kind == "linear") {
    const double bound = std::stod(kv.get("bound"));
    const int degree = static_cast<int>(std::stol(kv.get_or("k", "1")));
    std::vector<Hypothesis> members;
    for (const std::string& row : kv.get_all("member")) {
      members.push_back(Hypothesis::linear(parse_numbers(row), degree));
    }
    return HypothesisClass(std::move(members), bound);
  }
  if (kind == "table" || kind == "table-random") {
    if (kv.has("universe")) {
      auto table = parse_context_table(read_file(kv.get("universe")));
      universe = std::make_shared<const std::vector<Context>>(std::move(table.contexts));
    }
    if (!universe) throw std::invalid_argument("class spec: table kind needs a universe");
    if (kind == "table-random") {
      return random_table_class(universe, std::stoul(kv.get("count")),
                                std::stoull(kv.get_or("seed", "0")));
    }
    std::vector<Hypothesis> members;
    for (const std::string& row : kv.get_all("member")) {
      members.push_back(Hypothesis::table_binary(universe, parse_numbers(row)));
    }
    return HypothesisClass(std::move(members), std::stod(kv.get_or("bound", "1")));
  }
  throw std::invalid_argument("class spec: unknown kind '" + kind + "'");
}

inline HypothesisClass load_class_spec_file(const std::string& path) {
  return load_class_spec(parse_keyvalue(read_file(path)));
}

// Stream spec files: kind, d, label-weights, label-intercept, seed, and
// either universe: <path> or scripted: <path>.
inline StreamSpec load_stream_spec(const KeyValueFile& kv) {
  StreamSpec spec;
  spec.kind = kv.get("kind");
  spec.d = static_cast<int>(std::stol(kv.get_or("d", "1")));
  if (kv.has("label-weights")) spec.label_weights = parse_numbers(kv.get("label-weights"));
  spec.label_intercept = std::stod(kv.get_or("label-intercept", "0"));
  spec.seed = std::stoull(kv.get_or("seed", "0"));
  if (kv.has("universe")) {
    auto table = parse_context_table(read_file(kv.get("universe")));
    spec.universe = std::move(table.contexts);
    spec.d = static_cast<int>(spec.universe.at(0).size());
  }
  if (kv.has("scripted")) {
    auto table = parse_context_table(read_file(kv.get("scripted")));
    if (table.labels.empty()) {
      throw std::invalid_argument("stream spec: scripted file needs a y column");
    }
    spec.scripted_contexts = std::move(table.contexts);
    spec.scripted_labels = std::move(table.labels);
    spec.d = static_cast<int>(spec.scripted_contexts.at(0).size());
  }
  return spec;
}

inline StreamSpec load_stream_spec_file(const std::string& path) {
  return load_stream_spec(parse_keyvalue(read_file(path)));
}

}  // namespace mcal
