#include "derivata/metrics.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "support/assignment.hpp"

namespace derivata {
namespace {

TEST(PairF1, TokenBags) {
  EXPECT_DOUBLE_EQ(pair_f1("The Patriots", "patriots"), 1.0);
  EXPECT_DOUBLE_EQ(pair_f1("physicians", "physicians and judges"), 0.5);
  EXPECT_DOUBLE_EQ(pair_f1("alpha beta", "gamma delta"), 0.0);
  EXPECT_DOUBLE_EQ(pair_f1("", ""), 1.0);
  EXPECT_DOUBLE_EQ(pair_f1("", "judges"), 0.0);
}

TEST(PairF1, NumberPairsScoreByValue) {
  EXPECT_DOUBLE_EQ(pair_f1("94.0", "94"), 1.0);
  EXPECT_DOUBLE_EQ(pair_f1("25,532", "25532"), 1.0);
  EXPECT_DOUBLE_EQ(pair_f1("94", "95"), 0.0);
  EXPECT_DOUBLE_EQ(pair_f1("-4", "4"), 0.0);
  EXPECT_NEAR(pair_f1("94 points", "94"), 2.0 / 3.0, 1e-12);
}

TEST(DropF1, PadsAndAligns) {
  EXPECT_DOUBLE_EQ(drop_f1({"physicians"}, {"physicians", "judges"}), 0.5);
  EXPECT_DOUBLE_EQ(drop_f1({"judges", "physicians"}, {"physicians", "judges"}), 1.0);
  EXPECT_DOUBLE_EQ(drop_f1({"physicians", "judges", "extra"}, {"physicians", "judges"}),
                   2.0 / 3.0);
  EXPECT_DOUBLE_EQ(drop_f1({}, {}), 1.0);
  EXPECT_DOUBLE_EQ(drop_f1({"a b c"}, {}), 0.0);
}

TEST(DropF1, RefusesOversizeAlignments) {
  std::vector<std::string> nine(9, "x");
  EXPECT_THROW(drop_f1(nine, {"x"}), AlignmentTooLarge);
  std::vector<std::string> eight(8, "x");
  EXPECT_NO_THROW(drop_f1(eight, {"x"}));
}

TEST(DropF1, ExactMatchImpliesPerfectF1) {
  std::vector<std::pair<AnswerValue, GoldAnswer>> cases = {
      {AnswerValue::of_number(*Decimal::parse("94")), GoldAnswer::of_spans({"94.0"})},
      {AnswerValue::of_spans({"The Bears", "judges"}),
       GoldAnswer::of_spans({"judges!", "bears"})},
      {AnswerValue::of_literal(LitYNU::Yes), GoldAnswer::of_literal(LitYNU::Yes)},
      {AnswerValue::of_number(*Decimal::parse("82.5000000000001")),
       GoldAnswer::of_number(*Decimal::parse("82.5"))},
  };
  for (const auto& [pred, gold] : cases) {
    ASSERT_TRUE(exact_match(pred, gold));
    EXPECT_DOUBLE_EQ(answer_f1(pred, gold), 1.0);
  }
}

std::vector<std::string> random_answer_list(std::mt19937_64& rng) {
  static const char* words[] = {"red", "blue", "green", "fast", "slow", "team",
                                "points", "yards", "94", "94.0", "17.5", "25,532"};
  std::uniform_int_distribution<int> len(0, 6);
  std::uniform_int_distribution<int> wlen(1, 3);
  std::uniform_int_distribution<int> w(0, 11);
  std::vector<std::string> out;
  int n = len(rng);
  for (int i = 0; i < n; ++i) {
    std::string s;
    int m = wlen(rng);
    for (int k = 0; k < m; ++k) {
      if (!s.empty()) s += ' ';
      s += words[w(rng)];
    }
    out.push_back(s);
  }
  return out;
}

TEST(DropF1, AgreesWithHungarianAssignment) {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 400; ++trial) {
    auto pred = random_answer_list(rng);
    auto gold = random_answer_list(rng);
    std::size_t n = std::max(pred.size(), gold.size());
    double via_perms = drop_f1(pred, gold);
    if (n == 0) {
      EXPECT_DOUBLE_EQ(via_perms, 1.0);
      continue;
    }
    std::vector<std::string> p = pred, g = gold;
    p.resize(n);
    g.resize(n);
    std::vector<std::vector<double>> m(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = pair_f1(p[i], g[j]);
    double via_hungarian = testing::max_score_assignment(m) / double(n);
    EXPECT_NEAR(via_perms, via_hungarian, 1e-9) << "trial " << trial;
  }
}

TEST(EvalReport, TracksSlicesByGoldType) {
  EvalReport r;
  r.add(AnswerValue::of_number(*Decimal::parse("5")),
        GoldAnswer::of_number(*Decimal::parse("5")));
  r.add(AnswerValue::of_number(*Decimal::parse("4")),
        GoldAnswer::of_number(*Decimal::parse("5")));
  r.add(AnswerValue::of_spans({"physicians"}),
        GoldAnswer::of_spans({"physicians", "judges"}));
  r.add(AnswerValue::of_literal(LitYNU::No), GoldAnswer::of_literal(LitYNU::No));
  EXPECT_EQ(r.total.count, 4u);
  EXPECT_DOUBLE_EQ(r.total.em(), 0.5);
  EXPECT_DOUBLE_EQ(r.by_type["number"].em(), 0.5);
  EXPECT_EQ(r.by_type["number"].count, 2u);
  EXPECT_DOUBLE_EQ(r.by_type["spans"].f1(), 0.5);
  EXPECT_DOUBLE_EQ(r.by_type["literal"].em(), 1.0);
  EXPECT_DOUBLE_EQ(r.total.f1(), (1.0 + 0.0 + 0.5 + 1.0) / 4.0);
}

TEST(MakeFolds, PartitionsDeterministically) {
  auto folds = make_folds(23, 5, 11);
  ASSERT_EQ(folds.size(), 5u);
  std::vector<char> seen(23, 0);
  for (const auto& fold : folds) {
    EXPECT_GE(fold.size(), 4u);
    EXPECT_LE(fold.size(), 5u);
    for (auto i : fold) {
      EXPECT_LT(i, 23u);
      EXPECT_FALSE(seen[i]);
      seen[i] = 1;
    }
  }
  auto again = make_folds(23, 5, 11);
  EXPECT_EQ(folds, again);
  auto other = make_folds(23, 5, 12);
  EXPECT_NE(folds, other);
}

}  // namespace
}  // namespace derivata
