#pragma once

// Time-sliced, POS-tagged corpora: reading, writing, token keys, vocabularies
// and per-lemma POS counts.
//
// File layout, one token per line:
//
//   form<TAB>pos<TAB>lemma
//
// An empty line closes the current sentence and lines starting with '#' are
// comments.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lsc/error.hpp"

namespace lsc {

enum class Epoch { T0, T1 };

inline std::string_view to_string(Epoch e) { return e == Epoch::T0 ? "T0" : "T1"; }

inline Epoch parse_epoch(std::string_view s) {
  if (s == "T0" || s == "t0") return Epoch::T0;
  if (s == "T1" || s == "t1") return Epoch::T1;
  throw ArgumentError("unknown epoch '" + std::string(s) + "' (expected T0 or T1)");
}

struct Token {
  std::string form;
  std::string pos;
  std::string lemma;

  friend bool operator==(const Token&, const Token&) = default;
};

using Sentence = std::vector<Token>;

struct Corpus {
  Epoch epoch = Epoch::T0;
  std::vector<Sentence> sentences;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

namespace utf8 {

// Decodes one code point starting at s[i]; advances i. Returns nullopt on a
// malformed or overlong sequence.
inline std::optional<char32_t> decode(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  std::size_t len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return std::nullopt;
  }
  if (i + len > s.size()) return std::nullopt;
  for (std::size_t j = 1; j < len; ++j) {
    const auto b = static_cast<unsigned char>(s[i + j]);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return std::nullopt;
  i += len;
  return cp;
}

inline bool valid(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size())
    if (!decode(s, i)) return false;
  return true;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Simple case mapping for ASCII, Latin-1 and Latin Extended-A, which covers
// Italian (and most western European) orthography. Other scripts pass through.
inline char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x137 && cp % 2 == 0) return cp + 1;
  if (cp >= 0x139 && cp <= 0x148 && cp % 2 == 1) return cp + 1;
  if (cp >= 0x14A && cp <= 0x177 && cp % 2 == 0) return cp + 1;
  if (cp == 0x178) return 0xFF;
  if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
  return cp;
}

}  // namespace utf8

// Lowercases valid UTF-8; throws EncodingError (line 0) on invalid input.
inline std::string lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto cp = utf8::decode(s, i);
    if (!cp) throw EncodingError("invalid UTF-8 in '" + std::string(s) + "'", 0);
    utf8::append(out, utf8::to_lower(*cp));
  }
  return out;
}

// Embedding vocabulary unit: lowercase(form) + "_" + pos. The POS keeps its case.
inline std::string normalize_token(std::string_view form, std::string_view pos) {
  if (form.empty()) throw ArgumentError("normalize_token: empty form");
  if (pos.empty()) throw ArgumentError("normalize_token: empty POS for form '" + std::string(form) + "'");
  std::string key = lowercase(form);
  key.push_back('_');
  key.append(pos);
  return key;
}

inline std::string token_key(const Token& t) { return normalize_token(t.form, t.pos); }

namespace detail {

inline bool has_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  });
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace detail

inline Corpus parse_corpus(std::istream& in, Epoch epoch) {
  Corpus corpus{epoch, {}};
  Sentence current;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (!utf8::valid(line)) throw EncodingError("invalid UTF-8", lineno);
    if (line.empty()) {
      if (!current.empty()) corpus.sentences.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (line.front() == '#') continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 3)
      throw ParseError("expected 3 tab-separated fields (form, pos, lemma), got " +
                           std::to_string(fields.size()),
                       lineno);
    if (fields[0].empty() || fields[1].empty() || fields[2].empty())
      throw ParseError("empty field", lineno);
    if (detail::has_space(fields[1])) throw ParseError("POS tag contains whitespace", lineno);
    current.push_back(Token{std::string(fields[0]), std::string(fields[1]), std::string(fields[2])});
  }
  if (!current.empty()) corpus.sentences.push_back(std::move(current));
  return corpus;
}

inline Corpus read_corpus(const std::filesystem::path& path, Epoch epoch) {
  auto in = detail::open_input(path);
  return parse_corpus(in, epoch);
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& sentence : corpus.sentences) {
    for (const auto& t : sentence) out << t.form << '\t' << t.pos << '\t' << t.lemma << '\n';
    out << '\n';
  }
}

inline void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  auto out = detail::open_output(path);
  write_corpus(out, corpus);
}

// Token-key frequencies after min_count pruning. Keys are kept sorted.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary build(const Corpus& corpus, std::uint64_t min_count) {
    if (min_count < 1) throw ArgumentError("min_count must be >= 1");
    std::map<std::string, std::uint64_t> counts;
    for (const auto& s : corpus.sentences)
      for (const auto& t : s) ++counts[token_key(t)];
    std::erase_if(counts, [&](const auto& kv) { return kv.second < min_count; });
    Vocabulary v;
    v.entries_ = std::move(counts);
    v.min_count_ = min_count;
    return v;
  }

  const std::map<std::string, std::uint64_t>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::uint64_t min_count() const { return min_count_; }

  bool contains(std::string_view key) const { return entries_.find(std::string(key)) != entries_.end(); }

  std::uint64_t count(std::string_view key) const {
    auto it = entries_.find(std::string(key));
    return it == entries_.end() ? 0 : it->second;
  }

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (const auto& [_, c] : entries_) n += c;
    return n;
  }

 private:
  std::map<std::string, std::uint64_t> entries_;
  std::uint64_t min_count_ = 1;
};

inline Vocabulary build_vocabulary(const Corpus& corpus, std::uint64_t min_count) {
  return Vocabulary::build(corpus, min_count);
}

// The four POS categories the POS model tracks, in vector order.
enum class PosCategory : std::size_t { ADJ = 0, NOUN = 1, PROPN = 2, VERB = 3 };

inline constexpr std::array<std::string_view, 4> kPosCategoryNames = {"ADJ", "NOUN", "PROPN", "VERB"};

inline std::optional<PosCategory> pos_category(std::string_view tag) {
  for (std::size_t i = 0; i < kPosCategoryNames.size(); ++i)
    if (kPosCategoryNames[i] == tag) return static_cast<PosCategory>(i);
  return std::nullopt;
}

struct PosCounts {
  std::string target;
  Epoch epoch = Epoch::T0;
  std::array<std::uint64_t, 4> counts{};

  std::uint64_t operator[](PosCategory c) const { return counts[static_cast<std::size_t>(c)]; }
  std::uint64_t total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

// Lemma matching is case-insensitive; tags outside the four categories are ignored.
inline PosCounts pos_counts(const Corpus& corpus, std::string_view target_lemma) {
  if (target_lemma.empty()) throw ArgumentError("pos_counts: empty target lemma");
  const std::string want = lowercase(target_lemma);
  PosCounts pc{std::string(target_lemma), corpus.epoch, {}};
  for (const auto& s : corpus.sentences)
    for (const auto& t : s) {
      auto cat = pos_category(t.pos);
      if (cat && lowercase(t.lemma) == want) ++pc.counts[static_cast<std::size_t>(*cat)];
    }
  return pc;
}

// Occurrences of a lemma (case-insensitive) per full POS tag, over any number of corpora.
inline std::map<std::string, std::uint64_t> lemma_pos_histogram(std::initializer_list<const Corpus*> corpora,
                                                                 std::string_view lemma) {
  const std::string want = lowercase(lemma);
  std::map<std::string, std::uint64_t> hist;
  for (const Corpus* c : corpora)
    for (const auto& s : c->sentences)
      for (const auto& t : s)
        if (lowercase(t.lemma) == want) ++hist[t.pos];
  return hist;
}

// One line of a targets file: a lemma and an optional POS tag.
struct Target {
  std::string lemma;
  std::optional<std::string> pos;
};

inline std::vector<Target> parse_targets(std::istream& in) {
  std::vector<Target> targets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    if (!utf8::valid(line)) throw EncodingError("invalid UTF-8", lineno);
    const auto fields = detail::split(line, '\t');
    if (fields.size() > 2 || fields[0].empty()) throw ParseError("expected 'lemma' or 'lemma<TAB>POS'", lineno);
    Target t{std::string(fields[0]), std::nullopt};
    if (fields.size() == 2) {
      if (fields[1].empty() || detail::has_space(fields[1])) throw ParseError("bad POS field", lineno);
      t.pos = std::string(fields[1]);
    }
    targets.push_back(std::move(t));
  }
  return targets;
}

inline std::vector<Target> read_targets(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_targets(in);
}

}  // namespace lsc
