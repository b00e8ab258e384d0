#pragma once

// Synthetic diachronic corpora with planted change, for validating both models
// without the shared-task data.
//
// Each pseudo-target has a home topic. In T0 every sentence containing it
// draws its context words from that topic. In T1 a changed target draws a
// shift_strength fraction of its contexts from the next topic instead, and
// pos_shift optionally retags part of its occurrences. Background sentences
// keep all topic words present in both epochs.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lsc/corpus.hpp"
#include "lsc/embed.hpp"
#include "lsc/error.hpp"
#include "lsc/evaluate.hpp"

namespace lsc {

struct PosShift {
  PosCategory from = PosCategory::PROPN;
  PosCategory to = PosCategory::NOUN;
  double fraction = 0.5;
};

struct SynthConfig {
  int n_changed = 10;
  int n_stable = 10;
  int sentences_per_epoch = 20000;
  int topic_vocab_size = 40;
  double shift_strength = 1.0;
  std::optional<PosShift> pos_shift;
  std::uint64_t seed = 1;
  // Number of context topics; 0 gives every target its own home topic.
  int topics = 0;
  int context_words = 8;
  // Share of sentences that contain a target; the rest are topic background.
  double target_share = 0.5;
  // Target POS usage before any shift, indexed (ADJ, NOUN, PROPN, VERB).
  std::array<double, 4> base_pos = {0.05, 0.25, 0.65, 0.05};

  void validate() const {
    if (n_changed < 1 || n_stable < 1) throw ArgumentError("synth: n_changed and n_stable must be >= 1");
    if (sentences_per_epoch < 1) throw ArgumentError("synth: sentences_per_epoch must be >= 1");
    if (topics == 1 || topics < 0) throw ArgumentError("synth: need at least 2 topics (or 0 for one per target)");
    if (context_words < 1) throw ArgumentError("synth: context_words must be >= 1");
    if (topic_vocab_size < context_words)
      throw ArgumentError("synth: topic_vocab_size " + std::to_string(topic_vocab_size) +
                          " is too small to fill a context of " + std::to_string(context_words) + " distinct words");
    if (!(shift_strength >= 0 && shift_strength <= 1)) throw ArgumentError("synth: shift_strength must be in [0,1]");
    if (!(target_share > 0 && target_share <= 1)) throw ArgumentError("synth: target_share must be in (0,1]");
    double s = 0;
    for (double p : base_pos) {
      if (!(p >= 0)) throw ArgumentError("synth: base_pos entries must be >= 0");
      s += p;
    }
    if (!(s > 0)) throw ArgumentError("synth: base_pos must have positive mass");
    if (pos_shift) {
      if (!(pos_shift->fraction >= 0 && pos_shift->fraction <= 1))
        throw ArgumentError("synth: pos_shift fraction must be in [0,1]");
      if (pos_shift->from == pos_shift->to) throw ArgumentError("synth: pos_shift needs two different categories");
    }
  }
};

struct SyntheticData {
  Corpus t0;
  Corpus t1;
  GoldLabels gold;
  std::vector<std::string> targets;  // lexicographic
};

namespace detail {

inline std::string synth_target_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "target%03d", i);
  return buf;
}

inline std::string synth_topic_word(int topic, int j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%dw%03d", topic, j);
  return buf;
}

inline std::string_view synth_topic_pos(int j) {
  static constexpr std::array<std::string_view, 3> tags = {"NOUN", "ADJ", "VERB"};
  return tags[static_cast<std::size_t>(j % 3)];
}

inline std::size_t draw_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

inline std::size_t draw_category(std::mt19937_64& rng, const std::array<double, 4>& w) {
  const double total = w[0] + w[1] + w[2] + w[3];
  double u = unit(rng) * total;
  for (std::size_t i = 0; i < 3; ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return 3;
}

}  // namespace detail

inline SyntheticData generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const int n_targets = cfg.n_changed + cfg.n_stable;
  const int n_topics = cfg.topics == 0 ? n_targets : cfg.topics;

  // Which targets change is a seeded shuffle, so names carry no signal.
  std::mt19937_64 rng(cfg.seed);
  std::vector<int> order(static_cast<std::size_t>(n_targets));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[detail::draw_index(rng, i)]);
  std::vector<bool> changed(static_cast<std::size_t>(n_targets), false);
  for (int i = 0; i < cfg.n_changed; ++i) changed[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

  SyntheticData data;
  for (int i = 0; i < n_targets; ++i) {
    data.targets.push_back(detail::synth_target_name(i));
    data.gold[data.targets.back()] = changed[static_cast<std::size_t>(i)];
  }

  std::vector<std::vector<std::string>> topic_words(static_cast<std::size_t>(n_topics));
  for (int t = 0; t < n_topics; ++t)
    for (int j = 0; j < cfg.topic_vocab_size; ++j) topic_words[static_cast<std::size_t>(t)].push_back(detail::synth_topic_word(t, j));

  const int n_target_sentences =
      std::max(1, static_cast<int>(std::lround(cfg.target_share * cfg.sentences_per_epoch)));
  std::vector<std::size_t> pick(static_cast<std::size_t>(cfg.topic_vocab_size));

  auto make_epoch = [&](Epoch epoch, std::mt19937_64& g) {
    Corpus c{epoch, {}};
    c.sentences.reserve(static_cast<std::size_t>(cfg.sentences_per_epoch));
    // (sentence, position) of each target occurrence, per target.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> occurrences(static_cast<std::size_t>(n_targets));
    for (int s = 0; s < cfg.sentences_per_epoch; ++s) {
      const bool has_target = s < n_target_sentences;
      const int target = s % n_targets;
      int topic = has_target ? target % n_topics : s % n_topics;
      if (has_target && epoch == Epoch::T1 && changed[static_cast<std::size_t>(target)] &&
          detail::unit(g) < cfg.shift_strength)
        topic = (topic + 1) % n_topics;

      // Distinct context words: partial Fisher-Yates over the topic vocabulary.
      std::iota(pick.begin(), pick.end(), std::size_t{0});
      Sentence sentence;
      const auto& words = topic_words[static_cast<std::size_t>(topic)];
      for (int j = 0; j < cfg.context_words; ++j) {
        const std::size_t r = static_cast<std::size_t>(j) + detail::draw_index(g, pick.size() - static_cast<std::size_t>(j));
        std::swap(pick[static_cast<std::size_t>(j)], pick[r]);
        const auto& w = words[pick[static_cast<std::size_t>(j)]];
        sentence.push_back(Token{w, std::string(detail::synth_topic_pos(static_cast<int>(pick[static_cast<std::size_t>(j)]))), w});
      }
      if (has_target) {
        const std::size_t at = detail::draw_index(g, sentence.size() + 1);
        const auto& name = data.targets[static_cast<std::size_t>(target)];
        const auto cat = detail::draw_category(g, cfg.base_pos);
        sentence.insert(sentence.begin() + static_cast<std::ptrdiff_t>(at),
                        Token{name, std::string(kPosCategoryNames[cat]), name});
        occurrences[static_cast<std::size_t>(target)].emplace_back(c.sentences.size(), at);
      }
      c.sentences.push_back(std::move(sentence));
    }

    if (epoch == Epoch::T1 && cfg.pos_shift) {
      const auto from = std::string(kPosCategoryNames[static_cast<std::size_t>(cfg.pos_shift->from)]);
      const auto to = std::string(kPosCategoryNames[static_cast<std::size_t>(cfg.pos_shift->to)]);
      for (int t = 0; t < n_targets; ++t) {
        if (!changed[static_cast<std::size_t>(t)]) continue;
        const auto& occ = occurrences[static_cast<std::size_t>(t)];
        std::vector<std::pair<std::size_t, std::size_t>> tagged;
        for (auto [si, pi] : occ)
          if (c.sentences[si][pi].pos == from) tagged.emplace_back(si, pi);
        const auto want = static_cast<std::size_t>(std::lround(cfg.pos_shift->fraction * static_cast<double>(occ.size())));
        const std::size_t n = std::min(want, tagged.size());
        for (std::size_t j = 0; j < n; ++j) {
          std::swap(tagged[j], tagged[j + detail::draw_index(g, tagged.size() - j)]);
          c.sentences[tagged[j].first][tagged[j].second].pos = to;
        }
      }
    }
    return c;
  };

  std::mt19937_64 g0(cfg.seed * 0x9E3779B97F4A7C15ULL + 1), g1(cfg.seed * 0x9E3779B97F4A7C15ULL + 2);
  data.t0 = make_epoch(Epoch::T0, g0);
  data.t1 = make_epoch(Epoch::T1, g1);
  return data;
}

}  // namespace lsc
