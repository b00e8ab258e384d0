#pragma once

// Per-epoch CBOW embeddings with negative sampling over token keys, cosine
// queries and word2vec text persistence.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "lsc/corpus.hpp"
#include "lsc/error.hpp"

namespace lsc {

struct TrainingConfig {
  int dim = 256;
  int window = 5;
  int min_count = 3;
  int negatives = 5;
  int epochs = 5;
  double initial_lr = 0.025;
  double final_lr = 1e-4;
  double subsample_threshold = 1e-3;
  std::uint64_t seed = 1;
  bool deterministic = true;
  // Worker count in fast mode; 0 means hardware concurrency.
  int threads = 0;

  void validate() const {
    if (dim < 1) throw ArgumentError("dim must be >= 1");
    if (window < 1) throw ArgumentError("window must be >= 1");
    if (min_count < 1) throw ArgumentError("min_count must be >= 1");
    if (negatives < 1) throw ArgumentError("negatives must be >= 1");
    if (epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (!(final_lr > 0) || !(final_lr <= initial_lr)) throw ArgumentError("need 0 < final_lr <= initial_lr");
    if (!(subsample_threshold >= 0)) throw ArgumentError("subsample_threshold must be >= 0");
    if (threads < 0) throw ArgumentError("threads must be >= 0");
  }
};

struct Neighbor {
  std::string key;
  double similarity;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Dense vectors for one epoch, stored row-major in key order.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;

  EmbeddingModel(Epoch epoch, int dim, std::vector<std::string> keys, std::vector<float> data)
      : epoch_(epoch), dim_(dim), keys_(std::move(keys)), data_(std::move(data)) {
    if (dim_ < 1) throw ArgumentError("embedding dim must be >= 1");
    if (data_.size() != keys_.size() * static_cast<std::size_t>(dim_))
      throw ArgumentError("embedding data size does not match keys x dim");
    index_.reserve(keys_.size());
    norms_.resize(keys_.size());
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      if (!index_.emplace(keys_[i], i).second) throw ArgumentError("duplicate embedding key '" + keys_[i] + "'");
      double n = 0;
      for (float x : row(i)) {
        if (!std::isfinite(x)) throw NumericError("non-finite component in vector of '" + keys_[i] + "'");
        n += static_cast<double>(x) * x;
      }
      norms_[i] = std::sqrt(n);
    }
  }

  Epoch epoch() const { return epoch_; }
  int dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  const std::vector<std::string>& keys() const { return keys_; }
  std::span<const float> data() const { return data_; }

  bool contains(std::string_view key) const { return index_.find(std::string(key)) != index_.end(); }

  std::size_t index_of(std::string_view key) const {
    auto it = index_.find(std::string(key));
    if (it == index_.end())
      throw OutOfVocabularyError("'" + std::string(key) + "' not in " + std::string(to_string(epoch_)) +
                                 " embedding vocabulary");
    return it->second;
  }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const float> vector(std::string_view key) const { return row(index_of(key)); }
  double norm(std::size_t i) const { return norms_[i]; }

  // Cosine between two rows; throws on a zero vector.
  double cosine(std::size_t a, std::size_t b) const {
    if (norms_[a] == 0 || norms_[b] == 0)
      throw NumericError("zero vector in " + std::string(to_string(epoch_)) + " model for '" +
                         keys_[norms_[a] == 0 ? a : b] + "'");
    double dot = 0;
    auto ra = row(a), rb = row(b);
    for (int d = 0; d < dim_; ++d) dot += static_cast<double>(ra[d]) * rb[d];
    return std::clamp(dot / (norms_[a] * norms_[b]), -1.0, 1.0);
  }

 private:
  Epoch epoch_ = Epoch::T0;
  int dim_ = 1;
  std::vector<std::string> keys_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> norms_;
};

inline double cosine_similarity(const EmbeddingModel& model, std::string_view a, std::string_view b) {
  return model.cosine(model.index_of(a), model.index_of(b));
}

// Neighbors ordered by descending similarity, ties by key. Candidates are the
// whole vocabulary, or `restrict` when given; keys of `restrict` absent from
// the model are ignored. The target itself is never returned.
inline std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, std::string_view target, std::size_t k,
                                               const std::set<std::string>* restrict = nullptr) {
  if (k < 1) throw ArgumentError("nearest_neighbors: k must be >= 1");
  const std::size_t t = model.index_of(target);
  std::vector<Neighbor> pool;
  auto consider = [&](std::size_t i) {
    if (i != t) pool.push_back({model.keys()[i], model.cosine(t, i)});
  };
  if (restrict) {
    for (const auto& key : *restrict)
      if (model.contains(key)) consider(model.index_of(key));
  } else {
    for (std::size_t i = 0; i < model.size(); ++i) consider(i);
  }
  auto better = [](const Neighbor& a, const Neighbor& b) {
    return a.similarity != b.similarity ? a.similarity > b.similarity : a.key < b.key;
  };
  const std::size_t n = std::min(k, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n), pool.end(), better);
  pool.resize(n);
  return pool;
}

namespace detail {

// Uniform double in [0,1) from the top 53 bits; independent of the standard
// library's distribution implementations.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

// Everything training needs that depends only on the vocabulary.
struct CbowTables {
  std::vector<std::string> keys;  // count descending, then key ascending
  std::vector<std::uint64_t> counts;
  std::vector<double> keep_prob;     // frequent-key subsampling
  std::vector<double> noise_cumsum;  // unigram^0.75, cumulative

  std::uint32_t sample_noise(std::mt19937_64& rng) const {
    const double u = unit(rng) * noise_cumsum.back();
    auto it = std::upper_bound(noise_cumsum.begin(), noise_cumsum.end(), u);
    if (it == noise_cumsum.end()) --it;
    return static_cast<std::uint32_t>(it - noise_cumsum.begin());
  }
};

inline CbowTables make_tables(const Vocabulary& vocab, double subsample_threshold) {
  CbowTables t;
  std::vector<std::pair<std::string, std::uint64_t>> entries(vocab.entries().begin(), vocab.entries().end());
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  const double total = static_cast<double>(vocab.total());
  double acc = 0;
  for (auto& [key, count] : entries) {
    t.keys.push_back(key);
    t.counts.push_back(count);
    double keep = 1.0;
    if (subsample_threshold > 0) {
      const double f = static_cast<double>(count);
      const double th = subsample_threshold * total;
      keep = std::min(1.0, (std::sqrt(f / th) + 1.0) * th / f);
    }
    t.keep_prob.push_back(keep);
    acc += std::pow(static_cast<double>(count), 0.75);
    t.noise_cumsum.push_back(acc);
  }
  return t;
}

struct CbowWorker {
  const TrainingConfig& cfg;
  const CbowTables& tables;
  float* in;
  float* out;
  std::atomic<std::uint64_t>& words_done;
  std::uint64_t words_total;
  std::mt19937_64 rng;
  std::vector<float> hidden;
  std::vector<float> grad;
  std::vector<std::uint32_t> kept;
  std::vector<std::uint32_t> context;

  CbowWorker(const TrainingConfig& c, const CbowTables& t, float* in_w, float* out_w,
             std::atomic<std::uint64_t>& done, std::uint64_t total, std::uint64_t seed)
      : cfg(c), tables(t), in(in_w), out(out_w), words_done(done), words_total(total), rng(seed),
        hidden(static_cast<std::size_t>(c.dim)), grad(static_cast<std::size_t>(c.dim)) {}

  double learning_rate() const {
    const double progress =
        std::min(1.0, static_cast<double>(words_done.load(std::memory_order_relaxed)) / static_cast<double>(words_total));
    return cfg.initial_lr - (cfg.initial_lr - cfg.final_lr) * progress;
  }

  // Trains on one encoded sentence; returns the summed negative-sampling loss.
  double sentence(const std::vector<std::uint32_t>& encoded) {
    const std::size_t dim = static_cast<std::size_t>(cfg.dim);
    const float lr = static_cast<float>(learning_rate());
    kept.clear();
    for (auto w : encoded)
      if (tables.keep_prob[w] >= 1.0 || unit(rng) < tables.keep_prob[w]) kept.push_back(w);
    double loss = 0;
    for (std::size_t pos = 0; pos < kept.size(); ++pos) {
      const std::size_t shrink = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(cfg.window));
      const std::size_t reach = static_cast<std::size_t>(cfg.window) - shrink;
      context.clear();
      const std::size_t lo = pos >= reach ? pos - reach : 0;
      const std::size_t hi = std::min(kept.size() - 1, pos + reach);
      for (std::size_t c = lo; c <= hi; ++c)
        if (c != pos) context.push_back(kept[c]);
      if (context.empty()) continue;

      std::fill(hidden.begin(), hidden.end(), 0.0f);
      for (auto c : context) {
        const float* v = in + c * dim;
        for (std::size_t d = 0; d < dim; ++d) hidden[d] += v[d];
      }
      const float inv = 1.0f / static_cast<float>(context.size());
      for (auto& h : hidden) h *= inv;
      std::fill(grad.begin(), grad.end(), 0.0f);

      const std::uint32_t word = kept[pos];
      for (int s = 0; s <= cfg.negatives; ++s) {
        std::uint32_t target;
        float label;
        if (s == 0) {
          target = word;
          label = 1.0f;
        } else {
          target = tables.sample_noise(rng);
          if (target == word) continue;
          label = 0.0f;
        }
        float* o = out + target * dim;
        float f = 0;
        for (std::size_t d = 0; d < dim; ++d) f += hidden[d] * o[d];
        loss -= label > 0 ? log_sigmoid(f) : log_sigmoid(-f);
        const float sig = 1.0f / (1.0f + std::exp(-f));
        const float g = (label - sig) * lr;
        for (std::size_t d = 0; d < dim; ++d) grad[d] += g * o[d];
        for (std::size_t d = 0; d < dim; ++d) o[d] += g * hidden[d];
      }
      // Mean-of-context CBOW: the error is spread evenly over the inputs.
      for (auto& g : grad) g *= inv;
      for (auto c : context) {
        float* v = in + c * dim;
        for (std::size_t d = 0; d < dim; ++d) v[d] += grad[d];
      }
    }
    words_done.fetch_add(encoded.size(), std::memory_order_relaxed);
    return loss;
  }
};

}  // namespace detail

// CBOW with negative sampling. The returned vectors are the input (context)
// embeddings; the model vocabulary is the min_count-filtered corpus vocabulary.
inline EmbeddingModel train_cbow(const Corpus& corpus, const TrainingConfig& cfg) {
  cfg.validate();
  if (corpus.sentences.empty())
    throw TrainingError("cannot train on an empty " + std::string(to_string(corpus.epoch)) + " corpus");
  const Vocabulary vocab = build_vocabulary(corpus, static_cast<std::uint64_t>(cfg.min_count));
  if (vocab.size() < 2)
    throw TrainingError(std::string(to_string(corpus.epoch)) + " vocabulary has " + std::to_string(vocab.size()) +
                        " key(s) after min_count=" + std::to_string(cfg.min_count) + " filtering; need at least 2");

  const detail::CbowTables tables = detail::make_tables(vocab, cfg.subsample_threshold);
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::size_t i = 0; i < tables.keys.size(); ++i) index.emplace(tables.keys[i], static_cast<std::uint32_t>(i));

  std::vector<std::vector<std::uint32_t>> encoded;
  encoded.reserve(corpus.sentences.size());
  std::uint64_t train_words = 0;
  for (const auto& s : corpus.sentences) {
    std::vector<std::uint32_t> e;
    for (const auto& t : s)
      if (auto it = index.find(token_key(t)); it != index.end()) e.push_back(it->second);
    train_words += e.size();
    if (!e.empty()) encoded.push_back(std::move(e));
  }

  const std::size_t dim = static_cast<std::size_t>(cfg.dim);
  const std::size_t V = tables.keys.size();
  std::vector<float> in(V * dim), out(V * dim, 0.0f);
  {
    std::mt19937_64 init(cfg.seed);
    for (auto& x : in) x = static_cast<float>((detail::unit(init) - 0.5) / static_cast<double>(cfg.dim));
  }

  std::atomic<std::uint64_t> words_done{0};
  const std::uint64_t words_total = train_words * static_cast<std::uint64_t>(cfg.epochs);

  auto check_loss = [&](double loss, int epoch) {
    if (!std::isfinite(loss))
      throw NumericError("CBOW training diverged (non-finite loss) in epoch " + std::to_string(epoch + 1) + " of " +
                         std::string(to_string(corpus.epoch)));
  };

  if (cfg.deterministic) {
    detail::CbowWorker worker(cfg, tables, in.data(), out.data(), words_done, words_total, cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      double loss = 0;
      for (const auto& s : encoded) loss += worker.sentence(s);
      check_loss(loss, epoch);
    }
  } else {
    // Hogwild: workers share the weight arrays without locking.
    const std::size_t n_threads = std::max<std::size_t>(
        1, std::min<std::size_t>(cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                                 : std::max(1u, std::thread::hardware_concurrency()),
                                 encoded.size()));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::vector<double> losses(n_threads, 0.0);
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w] {
          detail::CbowWorker worker(cfg, tables, in.data(), out.data(), words_done, words_total,
                                    cfg.seed + 1000003ULL * (static_cast<std::uint64_t>(epoch) * n_threads + w + 1));
          const std::size_t begin = encoded.size() * w / n_threads;
          const std::size_t end = encoded.size() * (w + 1) / n_threads;
          for (std::size_t i = begin; i < end; ++i) losses[w] += worker.sentence(encoded[i]);
        });
      }
      for (auto& t : pool) t.join();
      double loss = 0;
      for (double l : losses) loss += l;
      check_loss(loss, epoch);
    }
  }

  std::vector<std::string> keys = tables.keys;
  return EmbeddingModel(corpus.epoch, cfg.dim, std::move(keys), std::move(in));
}

// word2vec text format: "vocab_size dim", then "key v1 ... v_dim" per line.
inline void save_embeddings(std::ostream& out, const EmbeddingModel& model) {
  out << model.size() << ' ' << model.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < model.size(); ++i) {
    out << model.keys()[i];
    for (float x : model.row(i)) {
      auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 9);
      out << ' ';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

inline void save_embeddings(const std::filesystem::path& path, const EmbeddingModel& model) {
  auto out = detail::open_output(path);
  save_embeddings(out, model);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline EmbeddingModel load_embeddings(std::istream& in, Epoch epoch) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header 'vocab_size dim'", 1);
  detail::strip_cr(line);
  auto header = detail::split(line, ' ');
  std::size_t vocab_size = 0;
  int dim = 0;
  auto parse_uint = [](std::string_view s, auto& v) {
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size();
  };
  if (header.size() != 2 || !parse_uint(header[0], vocab_size) || !parse_uint(header[1], dim) || dim < 1)
    throw ParseError("malformed header, expected 'vocab_size dim'", 1);

  std::vector<std::string> keys;
  std::vector<float> data;
  keys.reserve(vocab_size);
  data.reserve(vocab_size * static_cast<std::size_t>(dim));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    if (keys.size() == vocab_size)
      throw ParseError("more rows than the header's vocab_size " + std::to_string(vocab_size), lineno);
    auto fields = detail::split(line, ' ');
    if (!fields.empty() && fields.back().empty()) fields.pop_back();  // trailing space
    if (fields.size() != static_cast<std::size_t>(dim) + 1)
      throw ParseError("expected key plus " + std::to_string(dim) + " values, got " +
                           std::to_string(fields.size() == 0 ? 0 : fields.size() - 1) + " values",
                       lineno);
    if (fields[0].empty()) throw ParseError("empty key", lineno);
    keys.emplace_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      float v;
      auto s = fields[j];
      auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError("non-numeric component '" + std::string(s) + "'", lineno);
      data.push_back(v);
    }
  }
  if (keys.size() != vocab_size)
    throw ParseError("header promises " + std::to_string(vocab_size) + " rows, found " + std::to_string(keys.size()),
                     lineno);
  try {
    return EmbeddingModel(epoch, dim, std::move(keys), std::move(data));
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), lineno);
  }
}

inline EmbeddingModel load_embeddings(const std::filesystem::path& path, Epoch epoch) {
  auto in = detail::open_input(path);
  return load_embeddings(in, epoch);
}

}  // namespace lsc
