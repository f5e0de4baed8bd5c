#include <gtest/gtest.h>

#include <random>

#include "fim/apriori.hpp"
#include "fim/oracle.hpp"
#include "test_support.hpp"

namespace {

using fim::CandidateSet;
using fim::FrequentLevel;
using fim::FrequentMap;
using fim::Itemset;
using fim::testing::db1;

FrequentLevel level_of(std::size_t k, std::initializer_list<Itemset> sets) {
  FrequentLevel l{k, {}};
  for (const auto& s : sets) l.entries.emplace(s, 1);
  return l;
}

const FrequentMap kDb1Minsup2 = {{{0}, 3}, {{1}, 3}, {{2}, 3}, {{0, 1}, 2}, {{0, 2}, 2}, {{1, 2}, 2}};

TEST(CountSupports, Db1Examples) {
  auto db = db1();
  auto c = fim::count_supports(db, {{0, 1}});
  EXPECT_EQ(c.at({0, 1}), 2u);
  c = fim::count_supports(db, {{0, 1, 2}});
  EXPECT_EQ(c.at({0, 1, 2}), 1u);
}

TEST(CountSupports, EmptyDatabaseGivesZero) {
  fim::ItemDictionary dict;
  for (auto t : {"a", "b", "c"}) dict.intern(t);
  fim::TransactionDatabase empty({}, dict);
  auto c = fim::count_supports(empty, {{0, 2}, {1, 2}});
  EXPECT_EQ(c.at({0, 2}), 0u);
  EXPECT_EQ(c.at({1, 2}), 0u);
}

TEST(CountSupports, ZeroSupportCandidatesPresent) {
  auto db = fim::TransactionDatabase::from_ids({{0, 1}, {2, 3}});
  auto c = fim::count_supports(db, {{0, 3}, {0, 1}, {1, 2}});
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.at({0, 3}), 0u);
  EXPECT_EQ(c.at({0, 1}), 1u);
}

TEST(CountSupports, LongerThanAnyTransactionIsZero) {
  auto db = fim::TransactionDatabase::from_ids({{0, 1}, {1, 2}, {0, 1, 2, 3}});
  EXPECT_EQ(fim::count_supports(db, {{0, 1, 2, 3}}).at({0, 1, 2, 3}), 1u);
  EXPECT_EQ(fim::count_supports(db, {{0, 1, 2}}).at({0, 1, 2}), 1u);
  auto e = fim::count_supports(fim::TransactionDatabase::from_ids({{0}, {1}, {2}}), {{0, 1, 2}});
  EXPECT_EQ(e.at({0, 1, 2}), 0u);
}

TEST(CountSupports, UnknownIdIsInputError) {
  EXPECT_THROW(fim::count_supports(db1(), {{0, 3}}), fim::InputError);
  EXPECT_THROW(fim::count_supports(db1(), {{7}}), fim::InputError);
}

TEST(CountSupports, MalformedCandidatesRejected) {
  EXPECT_THROW(fim::count_supports(db1(), {{0, 1}, {0}}), fim::InputError);
  EXPECT_THROW(fim::count_supports(db1(), {{1, 0}}), fim::InputError);
  EXPECT_THROW(fim::count_supports(db1(), {Itemset{}}), fim::InputError);
}

TEST(CountSupports, DuplicatesCountedOnce) {
  auto c = fim::count_supports(db1(), {{0, 1}, {0, 1}});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.at({0, 1}), 2u);
}

// Every counting path (array, pair table, trie by enumeration, trie by
// scan) must agree with plain subset tests.
TEST(SupportCounter, AllStrategiesAgreeWithSubsetScan) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 150; ++round) {
    auto db = fim::testing::random_db(rng, 14, 50);
    const std::size_t k = 1 + rng() % 4;
    CandidateSet cands;
    std::set<Itemset> seen;
    for (int i = 0; i < 40; ++i) {
      std::vector<fim::ItemId> pool(db.num_items());
      std::iota(pool.begin(), pool.end(), 0);
      if (pool.size() < k) break;
      std::shuffle(pool.begin(), pool.end(), rng);
      Itemset s(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(s.begin(), s.end());
      if (seen.insert(s).second) cands.push_back(s);
    }
    if (cands.empty()) continue;
    std::vector<fim::Support> expect(cands.size(), 0);
    for (std::size_t i = 0; i < cands.size(); ++i)
      for (const auto& t : db)
        if (std::includes(t.begin(), t.end(), cands[i].begin(), cands[i].end())) ++expect[i];
    for (double factor : {0.0, 1.0, 4.0, 1e12}) {
      fim::SupportCounter counter(cands, db.num_items(), factor);
      std::vector<fim::Support> got(cands.size(), 0);
      counter.count(db.transactions(), got);
      ASSERT_EQ(got, expect) << "round " << round << " k " << k << " factor " << factor;
    }
  }
}

TEST(SupportCounter, CountsAccumulateAcrossSlices) {
  auto db = db1();
  CandidateSet cands = {{0, 1}, {0, 2}, {1, 2}};
  fim::SupportCounter counter(cands, db.num_items());
  std::vector<fim::Support> counts(3, 0);
  std::span<const fim::Transaction> all(db.transactions());
  counter.count(all.subspan(0, 2), counts);
  EXPECT_EQ(counts, (std::vector<fim::Support>{2, 1, 1}));
  counter.count(all.subspan(2), counts);
  EXPECT_EQ(counts, (std::vector<fim::Support>{2, 2, 2}));
}

TEST(SupportCounter, WidePairsFallBackToTrie) {
  // More relevant items than the pair table admits.
  std::vector<fim::Transaction> txns;
  for (fim::ItemId i = 0; i + 1 < 6000; i += 2) txns.push_back({i, i + 1});
  txns.push_back({0, 5999});
  auto db = fim::TransactionDatabase::from_ids(txns);
  CandidateSet cands;
  for (fim::ItemId i = 0; i + 1 < 6000; i += 2) cands.push_back({i, i + 1});
  cands.push_back({0, 5999});
  cands.push_back({1, 5999});
  fim::SupportCounter counter(cands, db.num_items());
  std::vector<fim::Support> counts(cands.size(), 0);
  counter.count(db.transactions(), counts);
  for (std::size_t i = 0; i + 2 < cands.size(); ++i) ASSERT_EQ(counts[i], 1u);
  EXPECT_EQ(counts[cands.size() - 2], 1u);
  EXPECT_EQ(counts.back(), 0u);
}

TEST(GenerateCandidates, FromSingletons) {
  auto c = fim::generate_candidates(level_of(1, {{0}, {1}, {2}}));
  EXPECT_EQ(c, (CandidateSet{{0, 1}, {0, 2}, {1, 2}}));
}

TEST(GenerateCandidates, FromPairs) {
  auto c = fim::generate_candidates(level_of(2, {{0, 1}, {0, 2}, {1, 2}}));
  EXPECT_EQ(c, (CandidateSet{{0, 1, 2}}));
}

TEST(GenerateCandidates, NoSharedPrefix) { EXPECT_TRUE(fim::generate_candidates(level_of(2, {{0, 1}, {2, 3}})).empty()); }

TEST(GenerateCandidates, PrunesInfrequentSubset) {
  // {0,1}+{0,2} joins to {0,1,2} but {1,2} is missing.
  EXPECT_TRUE(fim::generate_candidates(level_of(2, {{0, 1}, {0, 2}})).empty());
  auto c = fim::generate_candidates(level_of(3, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}, {0, 1, 4}}));
  EXPECT_EQ(c, (CandidateSet{{0, 1, 2, 3}}));
}

TEST(GenerateCandidates, EmptyLevel) { EXPECT_TRUE(fim::generate_candidates(level_of(2, {})).empty()); }

TEST(GenerateCandidates, ZeroLengthLevelRejected) { EXPECT_THROW(fim::generate_candidates(level_of(0, {})), fim::InputError); }

TEST(GenerateCandidates, SoundAndCompleteAgainstBruteForce) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 200; ++round) {
    const std::size_t k = 1 + rng() % 3;
    const fim::ItemId n = 4 + static_cast<fim::ItemId>(rng() % 5);
    FrequentLevel level{k, {}};
    // Random subset of all k-itemsets over n items.
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
      Itemset s;
      for (fim::ItemId b = 0; b < n; ++b)
        if (mask >> b & 1) s.push_back(b);
      if (rng() % 3) level.entries.emplace(s, 1);
    }
    std::set<Itemset> expect;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != k + 1) continue;
      Itemset s;
      for (fim::ItemId b = 0; b < n; ++b)
        if (mask >> b & 1) s.push_back(b);
      bool ok = true;
      for (std::size_t d = 0; d < s.size() && ok; ++d) {
        Itemset sub = s;
        sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(d));
        ok = level.entries.contains(sub);
      }
      if (ok) expect.insert(s);
    }
    auto got = fim::generate_candidates(level);
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
    EXPECT_EQ(std::set<Itemset>(got.begin(), got.end()), expect);
    EXPECT_EQ(got.size(), expect.size()) << "duplicates emitted";
  }
}

TEST(PruneByApriori, Examples) {
  auto full = level_of(2, {{0, 1}, {0, 2}, {1, 2}});
  EXPECT_EQ(fim::prune_by_apriori({{0, 1, 2}}, full), (CandidateSet{{0, 1, 2}}));
  auto partial = level_of(2, {{0, 1}, {0, 2}});
  EXPECT_TRUE(fim::prune_by_apriori({{0, 1, 2}}, partial).empty());
  EXPECT_TRUE(fim::prune_by_apriori({}, full).empty());
}

TEST(PruneByApriori, LengthMismatchRejected) {
  EXPECT_THROW(fim::prune_by_apriori({{0, 1}}, level_of(2, {{0, 1}})), fim::InputError);
}

TEST(AprioriMine, Db1Minsup2) {
  auto r = fim::apriori_mine(db1(), 2);
  EXPECT_EQ(r.frequent, kDb1Minsup2);
  EXPECT_EQ(r.minsup_abs, 2u);
  EXPECT_EQ(r.algorithm, "apriori");
  // Levels: L1, C2 (3 pairs), C3 = {0,1,2} with support 1.
  EXPECT_EQ(r.level_timings.size(), r.level_candidates.size());
  EXPECT_EQ(r.level_candidates, (std::vector<std::size_t>{3, 3, 1}));
}

TEST(AprioriMine, MinsupAboveSizeIsEmpty) {
  EXPECT_TRUE(fim::apriori_mine(db1(), 5).frequent.empty());
  EXPECT_TRUE(fim::apriori_mine(fim::TransactionDatabase{}, 1).frequent.empty());
}

TEST(AprioriMine, SingleTransaction) {
  auto r = fim::apriori_mine(fim::TransactionDatabase::from_ids({{0, 1}}), 1);
  EXPECT_EQ(r.frequent, (FrequentMap{{{0}, 1}, {{1}, 1}, {{0, 1}, 1}}));
}

TEST(AprioriMine, ZeroMinsupRejected) { EXPECT_THROW(fim::apriori_mine(db1(), 0), fim::ConfigError); }

TEST(AprioriMine, OracleEquivalenceAndClosure) {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 300; ++round) {
    auto db = fim::testing::random_db(rng, 15, 40);
    const fim::Support minsup = 1 + rng() % std::max<std::size_t>(1, db.size() / 2 + 1);
    auto r = fim::apriori_mine(db, minsup);
    auto expect = fim::testing::naive_frequent(db, minsup);
    ASSERT_EQ(r.frequent, expect) << "round " << round;
    EXPECT_TRUE(fim::testing::downward_closed(r.frequent));
    for (const auto& [s, sup] : r.frequent) EXPECT_GE(sup, minsup);
  }
}

TEST(AprioriMine, MinsupMonotone) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 50; ++round) {
    auto db = fim::testing::random_db(rng, 12, 60);
    auto low = fim::apriori_mine(db, 2).frequent;
    auto high = fim::apriori_mine(db, 4).frequent;
    for (const auto& [s, sup] : high) {
      auto it = low.find(s);
      ASSERT_NE(it, low.end());
      EXPECT_EQ(it->second, sup);
    }
  }
}

TEST(Oracle, Examples) {
  EXPECT_EQ(fim::brute_force_oracle(db1(), 2).frequent, kDb1Minsup2);
  EXPECT_TRUE(fim::brute_force_oracle(fim::TransactionDatabase{}, 1).frequent.empty());
  EXPECT_EQ(fim::brute_force_oracle(fim::TransactionDatabase::from_ids({{0}}), 1).frequent, (FrequentMap{{{0}, 1}}));
}

TEST(Oracle, MatchesIndependentEnumeration) {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 100; ++round) {
    auto db = fim::testing::random_db(rng, 12, 30);
    const fim::Support minsup = 1 + rng() % 4;
    ASSERT_EQ(fim::brute_force_oracle(db, minsup).frequent, fim::testing::naive_frequent(db, minsup));
  }
}

TEST(Oracle, RefusesLargeItemCounts) {
  std::vector<fim::Transaction> txns;
  for (fim::ItemId i = 0; i < 21; ++i) txns.push_back({i});
  EXPECT_THROW(fim::brute_force_oracle(fim::TransactionDatabase::from_ids(txns), 1), fim::InputError);
  txns.pop_back();
  EXPECT_NO_THROW(fim::brute_force_oracle(fim::TransactionDatabase::from_ids(txns), 1));
}

}  // namespace
