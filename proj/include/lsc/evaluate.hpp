#pragma once

// Scoring predictions against gold labels and the threshold / k analysis of
// the neighbor model.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "lsc/decide.hpp"
#include "lsc/embed.hpp"
#include "lsc/error.hpp"
#include "lsc/secondorder.hpp"

namespace lsc {

// target -> true when the word changed.
using GoldLabels = std::map<std::string, bool>;

inline GoldLabels read_gold(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_binary_labels(in);
}

inline void write_gold(std::ostream& out, const GoldLabels& gold) {
  for (const auto& [t, c] : gold) out << t << '\t' << (c ? 1 : 0) << '\n';
}

struct EvaluationReport {
  double accuracy = 0;
  std::vector<std::string> false_positives;
  std::vector<std::string> false_negatives;
  std::size_t n = 0;

  std::size_t correct() const { return n - false_positives.size() - false_negatives.size(); }
};

inline EvaluationReport evaluate(const PredictionSet& pred, const GoldLabels& gold) {
  EvaluationReport r;
  for (const auto& t : pred.universe) {
    auto it = gold.find(t);
    if (it == gold.end()) throw ArgumentError("gold labels have no entry for target '" + t + "'");
    const bool predicted = pred.changed.count(t) > 0;
    if (predicted && !it->second) r.false_positives.push_back(t);
    if (!predicted && it->second) r.false_negatives.push_back(t);
  }
  r.n = pred.universe.size();
  if (r.n == 0) throw ArgumentError("evaluate: empty prediction set");
  r.accuracy = static_cast<double>(r.correct()) / static_cast<double>(r.n);
  return r;
}

inline void write_report(std::ostream& out, const EvaluationReport& r) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s.empty() ? std::string("-") : s;
  };
  out << "n\t" << r.n << '\n'
      << "correct\t" << r.correct() << '\n'
      << "accuracy\t" << format_fixed(r.accuracy, 4) << '\n'
      << "false_positives\t" << join(r.false_positives) << '\n'
      << "false_negatives\t" << join(r.false_negatives) << '\n';
}

struct Interval {
  double min = 0;
  double max = 0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct ClassRanges {
  Interval changed;
  Interval stable;
  std::optional<Interval> overlap;
};

namespace detail {

inline bool gold_label(const GoldLabels& gold, const std::string& target) {
  auto it = gold.find(target);
  if (it == gold.end()) throw ArgumentError("gold labels have no entry for target '" + target + "'");
  return it->second;
}

inline void require_both_classes(const ScoreTable& scores, const GoldLabels& gold) {
  std::size_t changed = 0, stable = 0;
  for (const auto& [t, s] : scores.rows) {
    if (!std::isfinite(s)) throw ArgumentError("non-finite score for target '" + t + "'");
    (gold_label(gold, t) ? changed : stable)++;
  }
  if (changed == 0) throw ArgumentError("no changed target among the scored targets");
  if (stable == 0) throw ArgumentError("no stable target among the scored targets");
}

}  // namespace detail

inline ClassRanges class_ranges(const ScoreTable& scores, const GoldLabels& gold) {
  detail::require_both_classes(scores, gold);
  constexpr double inf = std::numeric_limits<double>::infinity();
  Interval c{inf, -inf}, s{inf, -inf};
  for (const auto& [t, v] : scores.rows) {
    Interval& iv = detail::gold_label(gold, t) ? c : s;
    iv.min = std::min(iv.min, v);
    iv.max = std::max(iv.max, v);
  }
  ClassRanges r{c, s, std::nullopt};
  const double lo = std::max(c.min, s.min), hi = std::min(c.max, s.max);
  if (lo <= hi) r.overlap = Interval{lo, hi};
  return r;
}

struct ThresholdResult {
  double threshold = 0;
  double accuracy = 0;
  std::size_t correct = 0;
  std::size_t n = 0;
};

// Candidates: midpoints between consecutive distinct scores plus one sentinel
// below the minimum and one above the maximum. A target is predicted changed
// when its score lies strictly on the measure's more-changed side of the
// threshold. The first best candidate in ascending order wins.
inline std::vector<double> threshold_candidates(const ScoreTable& scores) {
  std::vector<double> v;
  for (const auto& [_, s] : scores.rows) v.push_back(s);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  const double margin = std::max(1.0, v.back() - v.front());
  auto below = v.front() - margin;
  auto above = v.back() + margin;
  if (!(below < v.front())) below = std::nextafter(v.front(), -std::numeric_limits<double>::infinity());
  if (!(above > v.back())) above = std::nextafter(v.back(), std::numeric_limits<double>::infinity());
  std::vector<double> c{below};
  for (std::size_t i = 0; i + 1 < v.size(); ++i) c.push_back(v[i] + (v[i + 1] - v[i]) / 2);
  c.push_back(above);
  return c;
}

inline ThresholdResult best_threshold(const ScoreTable& scores, const GoldLabels& gold) {
  detail::require_both_classes(scores, gold);
  ThresholdResult best;
  best.n = scores.rows.size();
  bool first = true;
  for (double th : threshold_candidates(scores)) {
    std::size_t correct = 0;
    for (const auto& [t, s] : scores.rows) {
      const bool predicted = scores.higher_means_change ? s > th : s < th;
      if (predicted == detail::gold_label(gold, t)) ++correct;
    }
    if (first || correct > best.correct) {
      best.threshold = th;
      best.correct = correct;
      first = false;
    }
  }
  best.accuracy = static_cast<double>(best.correct) / static_cast<double>(best.n);
  return best;
}

// Score table for one (k, aggregation, measure) setting, keyed by target name.
inline ScoreTable score_table(const EmbeddingModel& m0, const EmbeddingModel& m1,
                              const std::vector<ResolvedTarget>& targets, std::size_t k, Aggregation agg,
                              MeasureKind kind) {
  const auto vc = common_vocabulary(m0, m1);
  ScoreTable table{{}, higher_means_change(kind)};
  for (const auto& t : targets) {
    const auto ns = neighbor_set(m0, m1, vc, t.key, k, agg);
    table.rows[t.name] = measure(kind, second_order_vector(m0, t.key, ns), second_order_vector(m1, t.key, ns));
  }
  return table;
}

struct SweepRecord {
  MeasureKind measure = MeasureKind::AvgAbsDiff;
  std::size_t k = 0;
  Aggregation aggregation = Aggregation::T0Only;
  Interval changed_range;
  Interval stable_range;
  std::optional<Interval> overlap;
  double best_threshold = 0;
  double best_accuracy = 0;
  std::size_t best_correct = 0;
  ScoreTable scores;
};

// Every (measure, aggregation, k) combination, in that nesting order.
inline std::vector<SweepRecord> sweep_k(const EmbeddingModel& m0, const EmbeddingModel& m1,
                                        const std::vector<ResolvedTarget>& targets, const GoldLabels& gold,
                                        const std::vector<std::size_t>& k_values,
                                        const std::vector<MeasureKind>& measures,
                                        const std::vector<Aggregation>& aggregations) {
  if (k_values.empty()) throw ArgumentError("sweep_k: no k values");
  if (targets.empty()) throw ArgumentError("sweep_k: no targets");
  for (auto k : k_values)
    if (k < 1) throw ArgumentError("sweep_k: k must be >= 1");
  const auto vc = common_vocabulary(m0, m1);
  const std::size_t k_max = *std::max_element(k_values.begin(), k_values.end());

  // Full rankings once per target; each k takes a prefix.
  struct Ranked {
    std::vector<Neighbor> r0, r1;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(targets.size());
  for (const auto& t : targets) {
    detail::require_in_common(m0, m1, t.key);
    ranked.push_back({nearest_neighbors(m0, t.key, k_max, &vc), nearest_neighbors(m1, t.key, k_max, &vc)});
  }

  std::vector<SweepRecord> out;
  for (auto kind : measures)
    for (auto agg : aggregations)
      for (auto k : k_values) {
        SweepRecord rec;
        rec.measure = kind;
        rec.k = k;
        rec.aggregation = agg;
        rec.scores.higher_means_change = higher_means_change(kind);
        for (std::size_t i = 0; i < targets.size(); ++i) {
          const auto& key = targets[i].key;
          const auto ns = detail::neighbors_from_rankings(key, k, agg, ranked[i].r0, ranked[i].r1);
          rec.scores.rows[targets[i].name] =
              measure(kind, second_order_vector(m0, key, ns), second_order_vector(m1, key, ns));
        }
        const auto ranges = class_ranges(rec.scores, gold);
        rec.changed_range = ranges.changed;
        rec.stable_range = ranges.stable;
        rec.overlap = ranges.overlap;
        const auto best = best_threshold(rec.scores, gold);
        rec.best_threshold = best.threshold;
        rec.best_accuracy = best.accuracy;
        rec.best_correct = best.correct;
        out.push_back(std::move(rec));
      }
  return out;
}

inline constexpr std::string_view kSweepCsvHeader =
    "measure,aggregation,k,changed_min,changed_max,stable_min,stable_max,overlap_min,overlap_max,best_threshold,"
    "best_accuracy";

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : records) {
    out << to_string(r.measure) << ',' << to_string(r.aggregation) << ',' << r.k << ','
        << format_fixed(r.changed_range.min, 6) << ',' << format_fixed(r.changed_range.max, 6) << ','
        << format_fixed(r.stable_range.min, 6) << ',' << format_fixed(r.stable_range.max, 6) << ',';
    if (r.overlap) out << format_fixed(r.overlap->min, 6) << ',' << format_fixed(r.overlap->max, 6);
    else out << ',';
    out << ',' << format_fixed(r.best_threshold, 6) << ',' << format_fixed(r.best_accuracy, 4) << '\n';
  }
}

inline void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records) {
  auto out = detail::open_output(path);
  write_sweep_csv(out, records);
}

}  // namespace lsc
