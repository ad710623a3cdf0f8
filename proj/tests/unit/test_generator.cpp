#include <gtest/gtest.h>

#include <fmt/format.h>

#include <set>

#include "dki/corpus/generator.hpp"
#include "dki/corpus/word_pool.hpp"
#include "dki/error.hpp"
#include "fixtures.hpp"

namespace dki {
namespace {

GenerationConfig config(std::size_t T, std::size_t n, std::uint64_t seed) {
  GenerationConfig c;
  c.updates = T;
  c.corpus_size = n;
  c.seed = seed;
  return c;
}

std::vector<std::string> pool_of(std::initializer_list<const char*> words) { return {words.begin(), words.end()}; }

TEST(WordPool, BundledListFiltersToEightLetterWords) {
  const auto pool = filter_pool(bundled_words(), 8);
  EXPECT_EQ(pool.size(), 26448u);
  EXPECT_TRUE(std::is_sorted(pool.begin(), pool.end()));
  for (const char* w : {"artistic", "tributes", "sunburnt", "antennae", "slavered", "shivered", "arranged"})
    EXPECT_TRUE(std::binary_search(pool.begin(), pool.end(), std::string(w))) << w;
}

TEST(WordPool, FilterDropsWrongLengthCaseAndDuplicates) {
  const auto pool = filter_pool(pool_of({"abcdefgh", "Abcdefgh", "abcdefg", "abcdefgh", "abc-efgh", "zzzzzzzz"}), 8);
  EXPECT_EQ(pool, pool_of({"abcdefgh", "zzzzzzzz"}));
}

// Frozen from tests/oracles/generator_oracle.py.
TEST(Generator, MatchesReferenceSamples) {
  auto t = generate_synthetic_dki(config(4, 200, 0), 0);
  EXPECT_EQ(t.id, "syn-T4-s0-0000");
  EXPECT_EQ(t.cue, "sulfuric");
  EXPECT_EQ(t.values, pool_of({"stereome", "schnabel", "outskill", "knowable"}));
  EXPECT_EQ(t.source, Source::synthetic);

  t = generate_synthetic_dki(config(4, 200, 0), 1);
  EXPECT_EQ(t.cue, "postsign");
  EXPECT_EQ(t.values, pool_of({"beseemly", "sunglade", "uniambic", "hagberry"}));

  t = generate_synthetic_dki(config(4, 200, 1), 0);
  EXPECT_EQ(t.cue, "eremitic");
  EXPECT_EQ(t.values, pool_of({"speltoid", "teosinte", "breccial", "manatoid"}));

  t = generate_synthetic_dki(config(32, 200, 0), 199);
  EXPECT_EQ(t.cue, "catallum");
  EXPECT_EQ(t.values.front(), "swannish");
  EXPECT_EQ(t.values.back(), "bragging");

  t = generate_synthetic_dki(config(8, 200, 42), 3);
  EXPECT_EQ(t.cue, "anteater");
  EXPECT_EQ(t.values, pool_of({"poorness", "acronych", "colubrid", "khedival", "springal", "melodica", "overdone",
                               "handwear"}));
}

TEST(Generator, SingleDkiEqualsCorpusEntry) {
  const auto c = config(16, 30, 5);
  const auto corpus = generate_corpus(c);
  ASSERT_EQ(corpus.size(), 30u);
  for (std::size_t i : {0u, 7u, 29u}) EXPECT_EQ(corpus[i], generate_synthetic_dki(c, i));
}

TEST(Generator, TrajectoryInvariants) {
  for (std::size_t T : {1u, 2u, 32u, 512u}) {
    const auto corpus = generate_corpus(config(T, 50, 3));
    std::set<std::string> cues;
    for (const auto& t : corpus) {
      EXPECT_EQ(t.length(), T);
      std::set<std::string> values(t.values.begin(), t.values.end());
      EXPECT_EQ(values.size(), T) << "values repeat in " << t.id;
      EXPECT_FALSE(values.contains(t.cue)) << "cue reused as value in " << t.id;
      for (const auto& v : t.values) EXPECT_EQ(v.size(), 8u);
      cues.insert(t.cue);
    }
    EXPECT_EQ(cues.size(), corpus.size()) << "cues repeat at T=" << T;
  }
}

TEST(Generator, DegenerateTrajectory) {
  const auto t = generate_synthetic_dki(config(1, 1, 0), 0);
  EXPECT_TRUE(t.degenerate());
  EXPECT_EQ(t.earliest(), t.latest());
}

TEST(Generator, SeedsAndLengthsGiveIndependentCorpora) {
  EXPECT_NE(generate_corpus(config(8, 5, 0)), generate_corpus(config(8, 5, 1)));
  EXPECT_NE(generate_corpus(config(8, 5, 0))[0].cue, generate_corpus(config(9, 5, 0))[0].cue);
}

TEST(Generator, SmallPoolBoundaries) {
  GenerationConfig c = config(3, 4, 0);
  c.word_pool = pool_of({"aaaaaaaa", "bbbbbbbb", "cccccccc", "dddddddd"});
  const auto corpus = generate_corpus(c);  // exactly T+1 words and corpus_size cues
  ASSERT_EQ(corpus.size(), 4u);
  for (const auto& t : corpus) {
    std::set<std::string> all(t.values.begin(), t.values.end());
    all.insert(t.cue);
    EXPECT_EQ(all.size(), 4u);
  }
  c.updates = 4;
  try {
    generate_corpus(c);
    FAIL() << "expected pool_exhausted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::pool_exhausted);
  }
  c.updates = 2;
  c.corpus_size = 5;
  EXPECT_THROW(generate_corpus(c), Error);
}

TEST(Generator, ConfigErrors) {
  auto expect_code = [](const GenerationConfig& c, ErrorCode code) {
    try {
      generate_corpus(c);
      ADD_FAILURE() << "no error";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  expect_code(config(0, 3, 0), ErrorCode::invalid_config);
  GenerationConfig empty = config(3, 3, 0);
  empty.word_pool = pool_of({"short"});
  expect_code(empty, ErrorCode::invalid_config);
  EXPECT_THROW(generate_synthetic_dki(config(3, 3, 0), 3), Error);
}

TEST(Generator, EmptyCorpusIsAllowed) { EXPECT_TRUE(generate_corpus(config(8, 0, 0)).empty()); }

TEST(CorpusStats, RealWorldShapedFixture) {
  const auto corpus = testing::real_world_length_fixture();
  const auto s = corpus_stats(corpus);
  EXPECT_EQ(s.count, 164u);
  EXPECT_EQ(s.min_length, 2u);
  EXPECT_EQ(s.max_length, 70u);
  EXPECT_NEAR(s.mean_length, 1438.0 / 164.0, 1e-12);
  EXPECT_EQ(fmt::format("{:.2f}", s.mean_length), "8.77");
}

TEST(CorpusStats, EmptyCorpusThrows) {
  try {
    corpus_stats({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_corpus);
  }
}

}  // namespace
}  // namespace dki
