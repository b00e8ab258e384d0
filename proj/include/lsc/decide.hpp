#pragma once

// Turning per-target change scores into binary predictions.
//
//   system1  rank each POS distance, sum the ranks, flag the upper third
//   system2  top half by avg-abs-diff intersected with top half by cosine similarity
//   system3  union of system1 and system2
//
// Ties are always broken lexicographically by target so every scheme is a
// deterministic function of its inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lsc/corpus.hpp"
#include "lsc/error.hpp"

namespace lsc {

struct ScoreTable {
  std::map<std::string, double> rows;
  bool higher_means_change = true;

  std::set<std::string> targets() const {
    std::set<std::string> out;
    for (const auto& [t, _] : rows) out.insert(t);
    return out;
  }
};

using RankTable = std::map<std::string, std::size_t>;

enum class Scheme { System1, System2, System3 };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::System1: return "system1";
    case Scheme::System2: return "system2";
    case Scheme::System3: return "system3";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view s) {
  if (s == "system1") return Scheme::System1;
  if (s == "system2") return Scheme::System2;
  if (s == "system3") return Scheme::System3;
  throw ArgumentError("unknown scheme '" + std::string(s) + "' (expected system1, system2 or system3)");
}

struct PredictionSet {
  Scheme scheme = Scheme::System1;
  std::set<std::string> universe;
  std::set<std::string> changed;
};

inline std::size_t ceil_div(std::size_t n, std::size_t d) { return (n + d - 1) / d; }

// Targets ordered most-changed first.
inline std::vector<std::string> ranking(const ScoreTable& table) {
  if (table.rows.empty()) throw ArgumentError("cannot rank an empty score table");
  std::vector<std::pair<std::string, double>> v(table.rows.begin(), table.rows.end());
  for (const auto& [t, s] : v)
    if (!std::isfinite(s)) throw ArgumentError("non-finite score for target '" + t + "'");
  const bool higher = table.higher_means_change;
  std::stable_sort(v.begin(), v.end(), [higher](const auto& a, const auto& b) {
    return higher ? a.second > b.second : a.second < b.second;
  });  // input is key-sorted, so stability gives the lexicographic tie-break
  std::vector<std::string> out;
  out.reserve(v.size());
  for (auto& [t, _] : v) out.push_back(std::move(t));
  return out;
}

inline RankTable rank(const ScoreTable& table) {
  RankTable r;
  const auto order = ranking(table);
  for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = i + 1;
  return r;
}

namespace detail {

inline void require_same_targets(const std::set<std::string>& a, const std::set<std::string>& b,
                                 std::string_view what) {
  if (a == b) return;
  std::vector<std::string> only_a, only_b;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s.empty() ? std::string("-") : s;
  };
  throw ArgumentError(std::string(what) + ": target sets differ; only in first: " + join(only_a) +
                      "; only in second: " + join(only_b));
}

}  // namespace detail

inline PredictionSet system1(const ScoreTable& euclidean, const ScoreTable& manhattan, const ScoreTable& cosine) {
  const auto universe = euclidean.targets();
  detail::require_same_targets(universe, manhattan.targets(), "system1 (euclidean vs manhattan)");
  detail::require_same_targets(universe, cosine.targets(), "system1 (euclidean vs cosine)");
  if (universe.empty()) throw ArgumentError("system1: no targets");

  std::map<std::string, std::size_t> rank_sum;
  for (const ScoreTable* t : {&euclidean, &manhattan, &cosine})
    for (const auto& [target, r] : rank(*t)) rank_sum[target] += r;

  std::vector<std::pair<std::string, std::size_t>> order(rank_sum.begin(), rank_sum.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second < b.second; });

  PredictionSet p{Scheme::System1, universe, {}};
  const std::size_t n_changed = ceil_div(order.size(), 3);
  for (std::size_t i = 0; i < n_changed; ++i) p.changed.insert(order[i].first);
  return p;
}

inline PredictionSet system2(const ScoreTable& avg_abs_diff, const ScoreTable& cos_sim) {
  const auto universe = avg_abs_diff.targets();
  detail::require_same_targets(universe, cos_sim.targets(), "system2");
  if (universe.empty()) throw ArgumentError("system2: no targets");
  const std::size_t half = ceil_div(universe.size(), 2);
  const auto r1 = ranking(avg_abs_diff);
  const auto r2 = ranking(cos_sim);
  std::set<std::string> top1(r1.begin(), r1.begin() + static_cast<std::ptrdiff_t>(half));
  std::set<std::string> top2(r2.begin(), r2.begin() + static_cast<std::ptrdiff_t>(half));
  PredictionSet p{Scheme::System2, universe, {}};
  std::set_intersection(top1.begin(), top1.end(), top2.begin(), top2.end(), std::inserter(p.changed, p.changed.end()));
  return p;
}

inline PredictionSet system3(const PredictionSet& p1, const PredictionSet& p2) {
  detail::require_same_targets(p1.universe, p2.universe, "system3");
  PredictionSet p{Scheme::System3, p1.universe, p1.changed};
  p.changed.insert(p2.changed.begin(), p2.changed.end());
  return p;
}

// Answer format: "target<TAB>0|1", one row per target, lexicographic.
inline void write_predictions(std::ostream& out, const PredictionSet& p) {
  for (const auto& t : p.universe) out << t << '\t' << (p.changed.count(t) ? 1 : 0) << '\n';
}

inline void write_predictions(const std::filesystem::path& path, const PredictionSet& p) {
  auto out = detail::open_output(path);
  write_predictions(out, p);
}

// Reads "target<TAB>0|1" rows; shared by prediction and gold files.
inline std::map<std::string, bool> parse_binary_labels(std::istream& in) {
  std::map<std::string, bool> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 2 || f[0].empty() || (f[1] != "0" && f[1] != "1"))
      throw ParseError("expected 'target<TAB>0|1'", lineno);
    if (!labels.emplace(std::string(f[0]), f[1] == "1").second)
      throw ParseError("duplicate target '" + std::string(f[0]) + "'", lineno);
  }
  return labels;
}

inline PredictionSet read_predictions(const std::filesystem::path& path, Scheme scheme = Scheme::System1) {
  auto in = detail::open_input(path);
  PredictionSet p{scheme, {}, {}};
  for (const auto& [t, c] : parse_binary_labels(in)) {
    p.universe.insert(t);
    if (c) p.changed.insert(t);
  }
  return p;
}

}  // namespace lsc
