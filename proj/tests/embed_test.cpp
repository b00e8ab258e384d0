#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lsc/embed.hpp"

namespace {

using namespace lsc;

// Two disjoint topic clusters; every sentence draws from exactly one of them.
Corpus two_cluster_corpus(int n_sentences, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Corpus c{Epoch::T0, {}};
  for (int s = 0; s < n_sentences; ++s) {
    const char cluster = s % 2 ? 'a' : 'b';
    Sentence sent;
    for (int i = 0; i < 8; ++i) {
      const std::string w = std::string(1, cluster) + std::to_string(rng() % 10);
      sent.push_back({w, "NOUN", w});
    }
    c.sentences.push_back(std::move(sent));
  }
  return c;
}

TrainingConfig small_config() {
  TrainingConfig cfg;
  cfg.dim = 24;
  cfg.epochs = 15;
  cfg.min_count = 1;
  cfg.seed = 1;
  return cfg;
}

double mean_similarity(const EmbeddingModel& m, bool same_cluster) {
  double s = 0;
  int n = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      if (same_cluster && i == j) continue;
      const std::string a = "a" + std::to_string(i) + "_NOUN";
      const std::string b = (same_cluster ? "a" : "b") + std::to_string(j) + "_NOUN";
      s += cosine_similarity(m, a, b);
      ++n;
    }
  return s / n;
}

TEST(TrainCbow, EmptyCorpusIsTrainingError) {
  EXPECT_THROW(train_cbow(Corpus{}, small_config()), TrainingError);
}

TEST(TrainCbow, TooSmallVocabularyIsTrainingError) {
  Corpus c{Epoch::T0, {{{"solo", "NOUN", "solo"}, {"solo", "NOUN", "solo"}, {"solo", "NOUN", "solo"}}}};
  auto cfg = small_config();
  cfg.min_count = 3;
  EXPECT_THROW(train_cbow(c, cfg), TrainingError);
}

TEST(TrainCbow, InvalidConfigRejected) {
  auto cfg = small_config();
  cfg.final_lr = 0.5;  // above initial_lr
  EXPECT_THROW(train_cbow(two_cluster_corpus(10, 1), cfg), ArgumentError);
  cfg = small_config();
  cfg.window = 0;
  EXPECT_THROW(train_cbow(two_cluster_corpus(10, 1), cfg), ArgumentError);
}

TEST(TrainCbow, RareKeyAbsentFromModel) {
  auto c = two_cluster_corpus(200, 1);
  c.sentences[0].push_back({"rara", "ADJ", "raro"});
  c.sentences[1].push_back({"rara", "ADJ", "raro"});
  auto cfg = small_config();
  cfg.min_count = 3;
  const auto m = train_cbow(c, cfg);
  EXPECT_FALSE(m.contains("rara_ADJ"));
  EXPECT_TRUE(m.contains("a1_NOUN"));
  EXPECT_EQ(m.size(), build_vocabulary(c, 3).size());
  EXPECT_THROW(cosine_similarity(m, "rara_ADJ", "a1_NOUN"), OutOfVocabularyError);
}

TEST(TrainCbow, SeparatesTopicClusters) {
  const auto m = train_cbow(two_cluster_corpus(200, 1), small_config());
  EXPECT_GT(cosine_similarity(m, "a1_NOUN", "a2_NOUN"), cosine_similarity(m, "a1_NOUN", "b2_NOUN"));
  EXPECT_GT(mean_similarity(m, true) - mean_similarity(m, false), 0.0);
}

TEST(TrainCbow, FastModeAlsoSeparatesClusters) {
  auto cfg = small_config();
  cfg.deterministic = false;
  cfg.threads = 3;
  const auto m = train_cbow(two_cluster_corpus(200, 1), cfg);
  EXPECT_GT(mean_similarity(m, true) - mean_similarity(m, false), 0.0);
}

TEST(TrainCbow, DeterministicModeIsBitExact) {
  const auto c = two_cluster_corpus(100, 4);
  const auto m1 = train_cbow(c, small_config());
  const auto m2 = train_cbow(c, small_config());
  ASSERT_EQ(m1.keys(), m2.keys());
  EXPECT_TRUE(std::equal(m1.data().begin(), m1.data().end(), m2.data().begin()));
  auto other = small_config();
  other.seed = 2;
  const auto m3 = train_cbow(c, other);
  EXPECT_FALSE(std::equal(m1.data().begin(), m1.data().end(), m3.data().begin()));
}

TEST(TrainCbow, DivergenceNamesEpoch) {
  auto cfg = small_config();
  cfg.initial_lr = 1e38;
  cfg.final_lr = 1e38;
  try {
    train_cbow(two_cluster_corpus(50, 1), cfg);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(CbowTables, DependOnlyOnVocabulary) {
  auto c1 = two_cluster_corpus(60, 9);
  auto c2 = c1;
  std::reverse(c2.sentences.begin(), c2.sentences.end());
  for (auto& s : c2.sentences) std::reverse(s.begin(), s.end());
  const auto t1 = detail::make_tables(build_vocabulary(c1, 1), 1e-3);
  const auto t2 = detail::make_tables(build_vocabulary(c2, 1), 1e-3);
  EXPECT_EQ(t1.keys, t2.keys);
  EXPECT_EQ(t1.keep_prob, t2.keep_prob);
  EXPECT_EQ(t1.noise_cumsum, t2.noise_cumsum);
  EXPECT_TRUE(std::is_sorted(t1.counts.rbegin(), t1.counts.rend()));
}

EmbeddingModel hand_model(std::vector<std::string> keys, std::vector<float> data, int dim) {
  return EmbeddingModel(Epoch::T0, dim, std::move(keys), std::move(data));
}

TEST(CosineSimilarity, HandLoadedVectors) {
  const auto m = hand_model({"x", "y", "z"}, {1, 0, 0, 1, 1, 1}, 2);
  EXPECT_NEAR(cosine_similarity(m, "x", "x"), 1.0, 1e-9);
  EXPECT_EQ(cosine_similarity(m, "x", "y"), 0.0);
  EXPECT_NEAR(cosine_similarity(m, "z", "x"), 0.7071067811865476, 1e-9);
  EXPECT_EQ(cosine_similarity(m, "z", "x"), cosine_similarity(m, "x", "z"));
}

TEST(CosineSimilarity, MissingKeyNamesKeyAndEpoch) {
  const auto m = hand_model({"x", "y"}, {1, 0, 0, 1}, 2);
  try {
    cosine_similarity(m, "x", "ape_NOUN");
    FAIL();
  } catch (const OutOfVocabularyError& e) {
    EXPECT_NE(std::string(e.what()).find("ape_NOUN"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("T0"), std::string::npos);
  }
}

TEST(NearestNeighbors, FourKeyExhaustiveRanking) {
  // cos(s,q)=0.894, cos(s,p)=0.447, cos(s,r)=-0.707
  const auto m = hand_model({"p", "q", "r", "s"}, {1, 2, 2, 1, -1, 1, 1, 0}, 2);
  const auto top2 = nearest_neighbors(m, "s", 2);
  ASSERT_EQ(top2.size(), 2u);
  EXPECT_EQ(top2[0].key, "q");
  EXPECT_EQ(top2[1].key, "p");
  EXPECT_NEAR(top2[0].similarity, 0.8944271909999159, 1e-7);
  EXPECT_NEAR(top2[1].similarity, 0.4472135954999579, 1e-7);

  const auto all = nearest_neighbors(m, "s", 10);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[2].key, "r");
  EXPECT_NEAR(all[2].similarity, -0.7071067811865475, 1e-7);
}

TEST(NearestNeighbors, RestrictionAndSelfExclusion) {
  const auto m = hand_model({"p", "q", "r", "s"}, {1, 2, 2, 1, -1, 1, 1, 0}, 2);
  const std::set<std::string> only_self{"s"};
  EXPECT_TRUE(nearest_neighbors(m, "s", 3, &only_self).empty());
  const std::set<std::string> pr{"p", "r", "not-in-model"};
  const auto n = nearest_neighbors(m, "s", 3, &pr);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].key, "p");
  EXPECT_THROW(nearest_neighbors(m, "missing", 1), OutOfVocabularyError);
  EXPECT_THROW(nearest_neighbors(m, "s", 0), ArgumentError);
}

TEST(NearestNeighbors, TiesBrokenByKey) {
  const auto m = hand_model({"t", "zeta", "alpha", "mid"}, {1, 0, 2, 0, 3, 0, 0, 1}, 2);
  const auto n = nearest_neighbors(m, "t", 3);
  ASSERT_EQ(n.size(), 3u);
  EXPECT_EQ(n[0].key, "alpha");
  EXPECT_EQ(n[1].key, "zeta");
  EXPECT_EQ(n[2].key, "mid");
}

TEST(Persistence, ThreeKeysDimTwoIsFourLines) {
  const auto m = hand_model({"a_NOUN", "b_ADJ", "c_VERB"}, {0.5f, -1.25f, 3, 0, 1e-7f, 2}, 2);
  std::ostringstream out;
  save_embeddings(out, m);
  EXPECT_EQ(out.str(), "3 2\na_NOUN 0.5 -1.25\nb_ADJ 3 0\nc_VERB 1.00000001e-07 2\n");
}

TEST(Persistence, RoundTripOnTrainedModel) {
  const auto m = train_cbow(two_cluster_corpus(100, 2), small_config());
  std::stringstream buf;
  save_embeddings(buf, m);
  const auto back = load_embeddings(buf, Epoch::T1);
  ASSERT_EQ(back.keys(), m.keys());
  EXPECT_EQ(back.epoch(), Epoch::T1);
  float worst = 0;
  for (std::size_t i = 0; i < m.data().size(); ++i) worst = std::max(worst, std::abs(m.data()[i] - back.data()[i]));
  EXPECT_LT(worst, 1e-6f);
}

std::size_t load_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    load_embeddings(in, Epoch::T0);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(Persistence, FormatErrorsCarryLineNumbers) {
  EXPECT_EQ(load_error_line("2 3\na 1 2 3\nb 1 2\n"), 3u);        // short row
  EXPECT_EQ(load_error_line("1 2\na 1 x\n"), 2u);                 // non-numeric
  EXPECT_EQ(load_error_line("3 2\na 1 2\nb 3 4\n"), 3u);          // fewer rows than header
  EXPECT_EQ(load_error_line("1 2\na 1 2\nb 3 4\n"), 3u);          // more rows than header
  EXPECT_EQ(load_error_line("two 2\n"), 1u);                       // bad header
  EXPECT_EQ(load_error_line("2 2\na 1 2\na 3 4\n"), 3u);          // duplicate key
}

TEST(Persistence, Dim256HeaderWith255Values) {
  std::string text = "1 256\nw";
  for (int i = 0; i < 255; ++i) text += " 0.1";
  text += "\n";
  EXPECT_EQ(load_error_line(text), 2u);
}

}  // namespace
