#pragma once

// POS model: relative frequencies over {ADJ, NOUN, PROPN, VERB} per target and
// epoch, compared with Euclidean, Manhattan and cosine distance.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "lsc/corpus.hpp"
#include "lsc/error.hpp"

namespace lsc {

struct PosDistribution {
  std::array<double, 4> values{};

  double operator[](PosCategory c) const { return values[static_cast<std::size_t>(c)]; }
  friend bool operator==(const PosDistribution&, const PosDistribution&) = default;
};

enum class DistanceKind { Euclidean, Manhattan, Cosine };

inline constexpr std::array<DistanceKind, 3> kDistanceKinds = {DistanceKind::Euclidean, DistanceKind::Manhattan,
                                                               DistanceKind::Cosine};

inline std::string_view to_string(DistanceKind k) {
  switch (k) {
    case DistanceKind::Euclidean: return "euclidean";
    case DistanceKind::Manhattan: return "manhattan";
    case DistanceKind::Cosine: return "cosine";
  }
  return "?";
}

// Normalized over the four categories only.
inline PosDistribution pos_distribution(const PosCounts& counts) {
  const auto total = counts.total();
  if (total == 0)
    throw ArgumentError("target unobserved: '" + counts.target + "' has no ADJ/NOUN/PROPN/VERB occurrence in " +
                        std::string(to_string(counts.epoch)));
  PosDistribution d;
  for (std::size_t i = 0; i < 4; ++i) d.values[i] = static_cast<double>(counts.counts[i]) / static_cast<double>(total);
  return d;
}

inline double distance(const PosDistribution& a, const PosDistribution& b, DistanceKind kind) {
  switch (kind) {
    case DistanceKind::Euclidean: {
      double s = 0;
      for (std::size_t i = 0; i < 4; ++i) s += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
      return std::sqrt(s);
    }
    case DistanceKind::Manhattan: {
      double s = 0;
      for (std::size_t i = 0; i < 4; ++i) s += std::abs(a.values[i] - b.values[i]);
      return s;
    }
    case DistanceKind::Cosine: {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
      }
      if (na == 0 || nb == 0) throw ArgumentError("cosine distance of a zero-norm POS vector");
      return std::max(0.0, 1.0 - dot / std::sqrt(na * nb));
    }
  }
  throw ArgumentError("unknown distance kind");
}

// Distances for one target between its T0 and T1 distributions.
struct PosChange {
  std::string target;
  PosDistribution t0;
  PosDistribution t1;
  std::array<double, 3> distances{};  // indexed like kDistanceKinds

  double operator[](DistanceKind k) const { return distances[static_cast<std::size_t>(k)]; }
};

inline PosChange pos_change(const Corpus& t0, const Corpus& t1, std::string_view lemma) {
  PosChange c{std::string(lemma), pos_distribution(pos_counts(t0, lemma)), pos_distribution(pos_counts(t1, lemma)), {}};
  for (auto k : kDistanceKinds) c.distances[static_cast<std::size_t>(k)] = distance(c.t0, c.t1, k);
  return c;
}

}  // namespace lsc
