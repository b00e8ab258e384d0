#pragma once

// Neighbor-based target representation across two independently trained
// spaces, and the three change measures computed on it.
//
// A target is described in each epoch by its cosine similarities to a shared
// list of neighbors drawn from the common vocabulary. Comparing those two
// vectors sidesteps aligning the spaces themselves.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lsc/corpus.hpp"
#include "lsc/embed.hpp"
#include "lsc/error.hpp"

namespace lsc {

using CommonVocabulary = std::set<std::string>;

inline CommonVocabulary common_vocabulary(const EmbeddingModel& m0, const EmbeddingModel& m1) {
  if (m0.empty() || m1.empty()) throw PipelineError("common_vocabulary: empty embedding model");
  CommonVocabulary vc;
  for (const auto& key : m0.keys())
    if (m1.contains(key)) vc.insert(key);
  if (vc.empty()) throw PipelineError("T0 and T1 embedding vocabularies are disjoint; no basis for neighbors");
  return vc;
}

enum class Aggregation { T0Only, Union };

inline constexpr std::array<Aggregation, 2> kAggregations = {Aggregation::T0Only, Aggregation::Union};

inline std::string_view to_string(Aggregation a) { return a == Aggregation::T0Only ? "t0-only" : "union"; }

inline Aggregation parse_aggregation(std::string_view s) {
  if (s == "t0-only" || s == "t0_only") return Aggregation::T0Only;
  if (s == "union") return Aggregation::Union;
  throw ArgumentError("unknown aggregation '" + std::string(s) + "' (expected t0-only or union)");
}

struct NeighborSet {
  std::string target;
  std::size_t k = 10;
  Aggregation aggregation = Aggregation::T0Only;
  std::vector<std::string> neighbors;
};

namespace detail {

inline void require_in_common(const EmbeddingModel& m0, const EmbeddingModel& m1, std::string_view target) {
  const bool in0 = m0.contains(target), in1 = m1.contains(target);
  if (in0 && in1) return;
  std::string missing = !in0 && !in1 ? "T0 and T1" : (!in0 ? "T0" : "T1");
  throw PipelineError("target '" + std::string(target) + "' is not in the common vocabulary: missing from " + missing);
}

inline std::vector<std::string> keys_of(const std::vector<Neighbor>& ns, std::size_t limit) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(limit, ns.size()); ++i) out.push_back(ns[i].key);
  return out;
}

// Neighbor list for `k` given each epoch's full ranking over V_c. Top-k is a
// prefix of the full ranking because the tie-break is total.
inline NeighborSet neighbors_from_rankings(std::string_view target, std::size_t k, Aggregation agg,
                                           const std::vector<Neighbor>& ranked0,
                                           const std::vector<Neighbor>& ranked1) {
  NeighborSet ns{std::string(target), k, agg, keys_of(ranked0, k)};
  if (agg == Aggregation::Union) {
    std::set<std::string> merged(ns.neighbors.begin(), ns.neighbors.end());
    for (auto& key : keys_of(ranked1, k)) merged.insert(std::move(key));
    ns.neighbors.assign(merged.begin(), merged.end());
  }
  return ns;
}

}  // namespace detail

// t0-only: top-k T0 neighbors within V_c, by descending T0 similarity.
// union: top-k from each epoch (within V_c), merged and sorted by key.
inline NeighborSet neighbor_set(const EmbeddingModel& m0, const EmbeddingModel& m1, const CommonVocabulary& vc,
                                std::string_view target, std::size_t k, Aggregation agg) {
  if (k < 1) throw ArgumentError("neighbor_set: k must be >= 1");
  detail::require_in_common(m0, m1, target);
  const auto r0 = nearest_neighbors(m0, target, k, &vc);
  const auto r1 = agg == Aggregation::Union ? nearest_neighbors(m1, target, k, &vc) : std::vector<Neighbor>{};
  return detail::neighbors_from_rankings(target, k, agg, r0, r1);
}

inline NeighborSet neighbor_set(const EmbeddingModel& m0, const EmbeddingModel& m1, std::string_view target,
                                std::size_t k, Aggregation agg) {
  return neighbor_set(m0, m1, common_vocabulary(m0, m1), target, k, agg);
}

struct SecondOrderVector {
  Epoch epoch = Epoch::T0;
  std::vector<double> values;
};

inline SecondOrderVector second_order_vector(const EmbeddingModel& model, std::string_view target,
                                             const NeighborSet& ns) {
  const std::size_t t = model.index_of(target);
  SecondOrderVector v{model.epoch(), {}};
  v.values.reserve(ns.neighbors.size());
  for (const auto& n : ns.neighbors) v.values.push_back(model.cosine(t, model.index_of(n)));
  return v;
}

enum class MeasureKind { AvgAbsDiff, CosineSimilarity, CosineDistance };

inline constexpr std::array<MeasureKind, 3> kMeasureKinds = {MeasureKind::AvgAbsDiff, MeasureKind::CosineSimilarity,
                                                             MeasureKind::CosineDistance};

inline std::string_view to_string(MeasureKind m) {
  switch (m) {
    case MeasureKind::AvgAbsDiff: return "aad";
    case MeasureKind::CosineSimilarity: return "cos-sim";
    case MeasureKind::CosineDistance: return "cos-dist";
  }
  return "?";
}

inline MeasureKind parse_measure(std::string_view s) {
  if (s == "aad" || s == "avg_abs_diff") return MeasureKind::AvgAbsDiff;
  if (s == "cos-sim" || s == "cosine_similarity") return MeasureKind::CosineSimilarity;
  if (s == "cos-dist" || s == "cosine_distance") return MeasureKind::CosineDistance;
  throw ArgumentError("unknown measure '" + std::string(s) + "' (expected aad, cos-sim or cos-dist)");
}

// Cosine similarity is the only measure where a lower value means more change.
inline constexpr bool higher_means_change(MeasureKind m) { return m != MeasureKind::CosineSimilarity; }

inline double avg_abs_diff(std::span<const double> v0, std::span<const double> v1) {
  if (v0.size() != v1.size())
    throw ArgumentError("avg_abs_diff: length mismatch " + std::to_string(v0.size()) + " vs " +
                        std::to_string(v1.size()));
  if (v0.empty()) throw ArgumentError("avg_abs_diff: empty second-order vectors");
  double s = 0;
  for (std::size_t i = 0; i < v0.size(); ++i) s += std::abs(v0[i] - v1[i]);
  return s / static_cast<double>(v0.size());
}

inline double cos_sim_measure(std::span<const double> v0, std::span<const double> v1) {
  if (v0.size() != v1.size())
    throw ArgumentError("cos_sim_measure: length mismatch " + std::to_string(v0.size()) + " vs " +
                        std::to_string(v1.size()));
  double dot = 0, n0 = 0, n1 = 0;
  for (std::size_t i = 0; i < v0.size(); ++i) {
    dot += v0[i] * v1[i];
    n0 += v0[i] * v0[i];
    n1 += v1[i] * v1[i];
  }
  if (n0 == 0 || n1 == 0) throw NumericError("degenerate second-order representation (zero norm)");
  // sqrt(n*n) == n exactly, so identical vectors give exactly 1.
  return std::clamp(dot / std::sqrt(n0 * n1), -1.0, 1.0);
}

inline double cos_dist_measure(std::span<const double> v0, std::span<const double> v1) {
  return 1.0 - cos_sim_measure(v0, v1);
}

inline double measure(MeasureKind kind, std::span<const double> v0, std::span<const double> v1) {
  switch (kind) {
    case MeasureKind::AvgAbsDiff: return avg_abs_diff(v0, v1);
    case MeasureKind::CosineSimilarity: return cos_sim_measure(v0, v1);
    case MeasureKind::CosineDistance: return cos_dist_measure(v0, v1);
  }
  throw ArgumentError("unknown measure kind");
}

inline double measure(MeasureKind kind, const SecondOrderVector& v0, const SecondOrderVector& v1) {
  return measure(kind, std::span<const double>(v0.values), std::span<const double>(v1.values));
}

inline double change_score(const EmbeddingModel& m0, const EmbeddingModel& m1, std::string_view target,
                           std::size_t k = 10, Aggregation agg = Aggregation::T0Only,
                           MeasureKind kind = MeasureKind::AvgAbsDiff) {
  const auto ns = neighbor_set(m0, m1, target, k, agg);
  return measure(kind, second_order_vector(m0, target, ns), second_order_vector(m1, target, ns));
}

// Maps a target lemma to its embedding key: lowercase(lemma) + "_" + POS, where
// POS comes from the targets file or else is the lemma's most frequent tag over
// the given corpora (ties by tag name).
inline std::string resolve_target_key(const Target& target, std::initializer_list<const Corpus*> corpora) {
  if (target.pos) return normalize_token(target.lemma, *target.pos);
  const auto hist = lemma_pos_histogram(corpora, target.lemma);
  if (hist.empty())
    throw PipelineError("cannot resolve a POS for target '" + target.lemma +
                        "': it has no occurrence in the corpora and the targets file gives no POS");
  auto best = hist.begin();
  for (auto it = hist.begin(); it != hist.end(); ++it)
    if (it->second > best->second) best = it;
  return normalize_token(target.lemma, best->first);
}

// A target as named in the targets file, bound to its embedding key.
struct ResolvedTarget {
  std::string name;
  std::string key;
};

inline std::vector<ResolvedTarget> resolve_targets(const std::vector<Target>& targets,
                                                   std::initializer_list<const Corpus*> corpora) {
  std::vector<ResolvedTarget> out;
  out.reserve(targets.size());
  for (const auto& t : targets) out.push_back({t.lemma, resolve_target_key(t, corpora)});
  return out;
}

// One row of a score table file.
struct ScoreRecord {
  std::string target;
  std::string measure;
  std::size_t k = 0;
  std::string aggregation;
  double score = 0;
};

inline std::string format_fixed(double v, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  auto s = os.str();
  if (s.front() == '-' && s.find_first_not_of("0.", 1) == std::string::npos) s.erase(0, 1);  // "-0.000000"
  return s;
}

// TSV: target, measure, k, aggregation, score (6 decimals). No header.
inline void write_scores(std::ostream& out, const std::vector<ScoreRecord>& rows) {
  for (const auto& r : rows)
    out << r.target << '\t' << r.measure << '\t' << r.k << '\t' << r.aggregation << '\t' << format_fixed(r.score, 6)
        << '\n';
}

inline void write_scores(const std::filesystem::path& path, const std::vector<ScoreRecord>& rows) {
  auto out = detail::open_output(path);
  write_scores(out, rows);
}

inline std::vector<ScoreRecord> parse_scores(std::istream& in) {
  std::vector<ScoreRecord> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 5) throw ParseError("expected target, measure, k, aggregation, score", lineno);
    ScoreRecord r{std::string(f[0]), std::string(f[1]), 0, std::string(f[3]), 0};
    auto rk = std::from_chars(f[2].data(), f[2].data() + f[2].size(), r.k);
    if (rk.ec != std::errc{} || rk.ptr != f[2].data() + f[2].size()) throw ParseError("bad k", lineno);
    auto rs = std::from_chars(f[4].data(), f[4].data() + f[4].size(), r.score);
    if (rs.ec != std::errc{} || rs.ptr != f[4].data() + f[4].size() || !std::isfinite(r.score))
      throw ParseError("bad score '" + std::string(f[4]) + "'", lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_scores(in);
}

}  // namespace lsc
