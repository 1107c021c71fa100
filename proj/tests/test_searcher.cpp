#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

#include "circhad/searcher.hpp"
#include "oracles.hpp"

using namespace circhad;

namespace {

std::vector<std::string> texts(const std::vector<SignSequence>& v) {
  std::vector<std::string> out;
  for (const SignSequence& h : v) out.push_back(h.to_string());
  return out;
}

SearchConfig config(std::size_t order, bool row_sum = true, bool prefix_paf = true, std::size_t workers = 1) {
  SearchConfig cfg;
  cfg.order = order;
  cfg.prune_row_sum = row_sum;
  cfg.prune_prefix_paf = prefix_paf;
  cfg.workers = workers;
  return cfg;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("circhad_test_" + name + "_" + std::to_string(::getpid()));
}

}  // namespace

TEST(Search, OrderFourHasEightSolutions) {
  const std::vector<std::string> want = oracle::brute_force_solutions(4);
  ASSERT_EQ(want.size(), 8u);
  EXPECT_EQ(want, (std::vector<std::string>{"+++-", "++-+", "+-++", "+---", "-+++", "-+--", "--+-", "---+"}));
  for (bool rs : {false, true})
    for (bool pp : {false, true}) EXPECT_EQ(texts(search(config(4, rs, pp)).solutions), want);
}

TEST(Search, NoSolutionsAtOrdersEightToSixteenAgreeingWithBruteForce) {
  for (std::size_t order : {8u, 12u, 16u}) {
    const std::vector<std::string> want = oracle::brute_force_solutions(order);
    EXPECT_TRUE(want.empty());
    for (bool rs : {false, true})
      for (bool pp : {false, true}) EXPECT_EQ(texts(search(config(order, rs, pp)).solutions), want) << order;
  }
}

TEST(Search, NaiveEnumerationExaminesHalfTheSpace) {
  EXPECT_EQ(search(config(8, false, false)).sequences_examined, 128u);
  EXPECT_EQ(search(config(16, false, false)).sequences_examined, 32768u);
}

TEST(Search, RowSumRejectsNonSquareOrdersOutright) {
  for (std::size_t order : {8u, 12u, 20u, 24u, 28u}) {
    const SearchReport r = search(config(order));
    EXPECT_TRUE(r.prunes.order_rejected);
    EXPECT_EQ(r.sequences_examined, 0u);
    EXPECT_TRUE(r.solutions.empty());
    EXPECT_FALSE(r.incomplete);
  }
}

TEST(Search, PrefixPafAloneMatchesNaiveAtOrderTwelveAndTwenty) {
  EXPECT_TRUE(search(config(12, false, true)).solutions.empty());
  const SearchReport r = search(config(20, false, true, 2));
  EXPECT_TRUE(r.solutions.empty());
  EXPECT_GT(r.prunes.prefix_paf_cuts, 0u);
}

TEST(Search, EveryOrderFourSolutionHasOneEvenBlock) {
  for (const SignSequence& h : search(config(4)).solutions) {
    EXPECT_TRUE(is_circulant_hadamard(h));
    EXPECT_EQ(even_count(block_decompose(h)), 1u);
  }
}

TEST(Search, ConfigValidation) {
  EXPECT_THROW(search(config(0)), usage_error);
  EXPECT_THROW(search(config(6)), usage_error);
  EXPECT_THROW(search(config(2)), usage_error);
  EXPECT_THROW(search(config(4, true, true, 0)), usage_error);
  SearchConfig deep = config(4);
  deep.shard_depth = 5;
  EXPECT_THROW(search(deep), usage_error);
}

TEST(RowSumPrune, Examples) {
  EXPECT_TRUE(rowsum_prune_applicable(8));
  EXPECT_FALSE(rowsum_prune_applicable(4));
  EXPECT_FALSE(rowsum_prune_applicable(36));
  EXPECT_FALSE(rowsum_prune_applicable(16));
  EXPECT_EQ(admissible_minus_counts(4), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(admissible_minus_counts(36), (std::vector<std::size_t>{15, 21}));
  EXPECT_EQ(admissible_minus_counts(16), (std::vector<std::size_t>{6, 10}));
  EXPECT_TRUE(admissible_minus_counts(8).empty());
  EXPECT_THROW(rowsum_prune_applicable(6), usage_error);
  for (const std::string& s : oracle::brute_force_solutions(4)) {
    int minus = 0;
    for (char c : s) minus += c == '-';
    EXPECT_TRUE(minus == 1 || minus == 3);
  }
}

TEST(Search, ParallelReportsIdentical) {
  const SearchReport one = search(config(16, true, true, 1));
  for (std::size_t w : {2u, 3u, 8u}) EXPECT_TRUE(search(config(16, true, true, w)).same_result(one)) << w;
  const SearchReport naive = search(config(16, false, false, 1));
  EXPECT_TRUE(search(config(16, false, false, 8)).same_result(naive));
}

TEST(Search, ShardsPartitionTheSpace) {
  // Without prunes every shard of depth d examines 2^(L-d) leaves.
  const SearchConfig cfg = config(12, false, false);
  ShardResult total;
  const std::size_t depth = 4;
  for (std::size_t i = 0; i < 8; ++i) {
    std::string prefix = "+";
    for (std::size_t k = 1; k < depth; ++k) prefix += ((i >> (depth - 1 - k)) & 1U) ? '-' : '+';
    const ShardResult r = search_shard(cfg, prefix);
    EXPECT_EQ(r.examined, 1u << (12 - depth));
    total = merge(total, r);
  }
  EXPECT_EQ(total.examined, 2048u);
  EXPECT_THROW(search_shard(cfg, "-+"), usage_error);
}

TEST(Search, ShardMergeIsCommutativeAndAssociative) {
  const SearchConfig cfg = config(4, false, false);
  std::vector<ShardResult> parts;
  for (const char* p : {"++", "+-", "+++", "+-+-"}) parts.push_back(search_shard(cfg, p));
  const ShardResult& a = parts[0];
  const ShardResult& b = parts[1];
  const ShardResult& c = parts[2];
  EXPECT_EQ(merge(a, b), merge(b, a));
  EXPECT_EQ(merge(merge(a, b), c), merge(a, merge(b, c)));
  EXPECT_EQ(merge(a, ShardResult{}), a);
  EXPECT_EQ(merge(a, b).solutions, (std::vector<std::string>{"+++-", "++-+", "+-++", "+---"}));
}

TEST(Search, CanonicalClasses) {
  SearchConfig cfg = config(4);
  cfg.canonicalize = true;
  const SearchReport r = search(cfg);
  EXPECT_EQ(r.solutions.size(), 8u);
  EXPECT_EQ(texts(r.canonical), (std::vector<std::string>{"+++-"}));
  EXPECT_EQ(canonical_representative(SignSequence::parse("-+--")).to_string(), "+++-");
  EXPECT_EQ(canonical_representative(SignSequence::parse("+-+")).to_string(), "++-");
}

TEST(Search, ZeroBudgetGivesIncompleteReport) {
  SearchConfig cfg = config(16);
  cfg.budget_seconds = 0.0;
  const SearchReport r = search(cfg);
  EXPECT_TRUE(r.incomplete);
  EXPECT_LT(r.shards_completed, r.shards_total);
}

TEST(Search, LedgerResumesWithIdenticalResult) {
  const auto path = temp_path("ledger");
  std::filesystem::remove(path);
  SearchConfig cfg = config(16);
  cfg.ledger = path;
  const SearchReport first = search(cfg);
  ASSERT_FALSE(first.incomplete);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "# circhad-ledger order=16 depth=9 prunes=row-sum,prefix-paf");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) {
    ++lines;
    EXPECT_NE(line.find(" done examined="), std::string::npos) << line;
  }
  EXPECT_EQ(lines, first.shards_total);

  // Drop half the shard lines to simulate an interrupted run, then resume.
  std::vector<std::string> kept{header};
  {
    std::ifstream again(path);
    std::string line;
    std::getline(again, line);
    for (std::size_t k = 0; std::getline(again, line); ++k)
      if (k % 2 == 0) kept.push_back(line);
  }
  {
    std::ofstream out(path, std::ios::trunc);
    for (const std::string& l : kept) out << l << '\n';
  }
  const SearchReport resumed = search(cfg);
  EXPECT_TRUE(resumed.same_result(first));

  SearchConfig other = cfg;
  other.prune_row_sum = false;
  EXPECT_THROW(search(other), usage_error);
  std::filesystem::remove(path);
}

TEST(Search, LedgerKeepsSolutions) {
  const auto path = temp_path("ledger4");
  std::filesystem::remove(path);
  SearchConfig cfg = config(4);
  cfg.ledger = path;
  const SearchReport first = search(cfg);
  const SearchReport resumed = search(cfg);  // everything comes from the ledger
  EXPECT_TRUE(resumed.same_result(first));
  EXPECT_EQ(resumed.solutions.size(), 8u);
  std::filesystem::remove(path);
}

TEST(EnumerateBlockSequences, HalfLengthOne) {
  const auto all = collect_block_sequences(1, [](const BlockSequence&) { return true; });
  EXPECT_EQ(all.size(), 8u);
  const auto holds = collect_block_sequences(1, [](const BlockSequence& bs) { return eqn1_holds(bs); });
  EXPECT_EQ(holds.size(), 8u);
  std::vector<std::string> text;
  for (const BlockSequence& bs : all) text.push_back(bs.to_string());
  EXPECT_TRUE(std::is_sorted(text.begin(), text.end()));
  EXPECT_EQ(text.front(), "++,+-");
  EXPECT_EQ(text.back(), "--,-+");
}

TEST(EnumerateBlockSequences, CountsMatchBinomialFormula) {
  // C(2n, n) positions, 2^n even values, 2^n odd values.
  const std::size_t want[] = {0, 8, 96, 1280};
  for (std::size_t n = 1; n <= 3; ++n) {
    std::size_t count = 0;
    enumerate_block_sequences(n, [](const BlockSequence&) { return true; }, [&](const BlockSequence& bs) {
      EXPECT_EQ(even_count(bs), n);
      ++count;
    });
    EXPECT_EQ(count, want[n]);
  }
}

TEST(EnumerateBlockSequences, NonSymmetricFilterAtThreeContainsCounterexample) {
  const auto has_nonsymmetric_even = [](const BlockSequence& bs) {
    for (std::size_t i : even_indices(bs))
      if (!is_symmetric_even(bs, static_cast<std::int64_t>(i))) return true;
    return false;
  };
  bool found = false;
  enumerate_block_sequences(3, has_nonsymmetric_even,
                            [&](const BlockSequence& bs) { found |= bs.to_string() == "++,+-,--,+-,--,+-"; });
  EXPECT_TRUE(found);
}

TEST(EnumerateBlockSequences, RangeChecked) {
  auto any = [](const BlockSequence&) { return true; };
  auto none = [](const BlockSequence&) {};
  EXPECT_THROW(enumerate_block_sequences(0, any, none), usage_error);
  EXPECT_THROW(enumerate_block_sequences(7, any, none), usage_error);
}

TEST(ExactSqrt, SmallValues) {
  for (std::size_t r = 0; r < 100; ++r) {
    EXPECT_EQ(exact_sqrt(r * r), r);
    if (r > 1) {
      EXPECT_FALSE(exact_sqrt(r * r + 1).has_value());
    }
  }
}
