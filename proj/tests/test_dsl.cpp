#include "derivata/derivation.hpp"

#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "derivata/enumerate.hpp"

namespace derivata {
namespace {

// Victory-margin style passage with a percent pair, a big-number triple, and
// some names, enough to exercise every op.
Example fixture() {
  return make_example(
      "fx", "how many?",
      "In 1995 the Bears took 17.5 percent while the Packers took 55.2 percent ; "
      "attendance was 40543 then 15416 then 11068 ; physicians and judges protested ; "
      "the score moved from 1501 to 1507 ; 6.4 plus 5.1 ; 9306 split 99 ways ; 3 rows of 8 .");
}

// mention indices in the fixture
enum : std::size_t {
  kY1995 = 0,
  kP17_5,
  kP55_2,
  kA40543,
  kA15416,
  kA11068,
  kS1501,
  kS1507,
  kV6_4,
  kV5_1,
  kD9306,
  kD99,
  kM3,
  kM8,
};

TEST(Execute, GoldenPrograms) {
  Example ex = fixture();
  ASSERT_EQ(ex.numbers.size(), 14u);
  EXPECT_EQ(execute(Diff100D{kP17_5}, ex).number.to_string(), "82.5");
  EXPECT_EQ(execute(Diff100D{kP55_2}, ex).number.to_string(), "44.8");
  EXPECT_EQ(execute(SumD{kV6_4, kV5_1}, ex).number.to_string(), "11.5");
  EXPECT_EQ(execute(Sum3D{SumD{kA40543, kA15416}, kA11068}, ex).number.to_string(),
            "67027");
  EXPECT_EQ(execute(DiffD{kS1507, kS1501}, ex).number.to_string(), "6");
  EXPECT_EQ(execute(DiffD{kS1501, kS1507}, ex).number.to_string(), "-6");
  EXPECT_EQ(execute(DivD{kD9306, kD99}, ex).number.to_string(), "94");
  EXPECT_EQ(execute(MulD{kM3, kM8}, ex).number.to_string(), "24");
}

TEST(Execute, SpanAndMergeProduceTexts) {
  Example ex = fixture();
  std::size_t phys = 0, judges = 0;
  for (std::size_t t = 0; t < ex.passage.size(); ++t) {
    if (ex.passage[t].text == "physicians") phys = t;
    if (ex.passage[t].text == "judges") judges = t;
  }
  AnswerValue one = execute(SpanD{phys, phys}, ex);
  EXPECT_EQ(one.kind, AnswerValue::Kind::SpanSet);
  EXPECT_EQ(one.spans, std::vector<std::string>{"physicians"});
  AnswerValue two = execute(MergeD{SpanD{phys, phys}, SpanD{judges, judges}}, ex);
  EXPECT_EQ(two.spans, (std::vector<std::string>{"physicians", "judges"}));
}

TEST(Execute, LiteralsAndDigits) {
  Example ex = fixture();
  EXPECT_EQ(execute(LiteralD{Lit13::Yes}, ex).literal, LitYNU::Yes);
  EXPECT_EQ(execute(LiteralD{Lit13::No}, ex).literal, LitYNU::No);
  EXPECT_EQ(execute(LiteralD{Lit13::D7}, ex).number.to_string(), "7");
  EXPECT_EQ(render_answer(execute(LiteralD{Lit13::Unknown}, ex)),
            std::vector<std::string>{"Unknown"});
}

TEST(Execute, DivisionByZeroSurfaces) {
  Example ex = make_example("z", "q", "split 10 by 0 now");
  ASSERT_EQ(ex.numbers.size(), 2u);
  EXPECT_THROW(execute(DivD{0, 1}, ex), DivisionByZero);
}

TEST(OpConfig, ValidatesCompositionPrerequisites) {
  OpConfig c = OpConfig::basic();
  c.sum3 = true;
  c.sum = false;
  EXPECT_THROW(c.validate(), ConfigError);
  OpConfig m = OpConfig::basic();
  m.merge = true;
  m.spans = false;
  EXPECT_THROW(m.validate(), ConfigError);
  EXPECT_NO_THROW(OpConfig::drop_full().validate());
  EXPECT_NO_THROW(OpConfig::all_ops().validate());
}

TEST(OpConfig, FlagRoundTrip) {
  OpConfig c = OpConfig::from_flags("literals,spans,sum,diff,diff100,sum3,merge,mul,div");
  EXPECT_TRUE(c.sum3 && c.merge && c.mul && c.div);
  EXPECT_EQ(OpConfig::from_flags(c.to_flags()).to_flags(), c.to_flags());
  EXPECT_THROW(OpConfig::from_flags("literals,bogus"), ConfigError);
  EXPECT_THROW(OpConfig::from_flags("sum3"), ConfigError);   // sum3 without sum
  EXPECT_THROW(OpConfig::from_flags("merge"), ConfigError);  // merge without spans
  EXPECT_NO_THROW(OpConfig::from_flags("sum3,sum"));
}

TEST(Enumerate, CanonicalOrderAndInvariants) {
  Example ex = make_example("e", "q", "a 10 b 20 c 0 d");
  OpConfig cfg = OpConfig::all_ops();
  cfg.max_span_len = 3;
  auto base = enumerate_base(ex, cfg);
  // literals first
  ASSERT_GE(base.size(), 13u);
  for (int i = 0; i < kNumLiterals; ++i)
    EXPECT_EQ(std::get<LiteralD>(base[i]).value, static_cast<Lit13>(i));
  std::size_t spans = 0, sums = 0, diffs = 0, d100 = 0, muls = 0, divs = 0;
  for (const auto& d : base) {
    if (auto* s = std::get_if<SpanD>(&d)) {
      ++spans;
      EXPECT_LE(s->start, s->end);
      EXPECT_LT(s->end - s->start + 1, cfg.max_span_len + 1);
    } else if (auto* s = std::get_if<SumD>(&d)) {
      ++sums;
      EXPECT_LT(s->i, s->j);
    } else if (auto* s = std::get_if<DiffD>(&d)) {
      ++diffs;
      EXPECT_NE(s->i, s->j);
    } else if (std::get_if<Diff100D>(&d)) {
      ++d100;
    } else if (auto* s = std::get_if<MulD>(&d)) {
      ++muls;
      EXPECT_LT(s->i, s->j);
    } else if (auto* s = std::get_if<DivD>(&d)) {
      ++divs;
      EXPECT_FALSE(ex.numbers[s->j].value.is_zero());
    }
  }
  // 7 tokens, max span len 3: 7+6+5 spans; 3 numbers (10, 20, 0)
  EXPECT_EQ(spans, 18u);
  EXPECT_EQ(sums, 3u);
  EXPECT_EQ(diffs, 6u);
  EXPECT_EQ(d100, 3u);
  EXPECT_EQ(muls, 3u);
  EXPECT_EQ(divs, 4u);  // ordered pairs minus the two dividing by the 0 mention
  // no duplicates anywhere
  std::set<std::uint64_t> keys;
  for (const auto& d : base) EXPECT_TRUE(keys.insert(derivation_key(d)).second);
}

TEST(Enumerate, ComposeRespectsDepthAndCanonicalForm) {
  Example ex = make_example("e", "q", "a 10 b 20 c 30 d");
  OpConfig cfg = OpConfig::drop_full();
  cfg.max_span_len = 2;
  auto base = enumerate_base(ex, cfg);
  auto comp = compose_topk(base, nullptr, nullptr, ex, cfg);
  std::size_t sum3 = 0, merges = 0;
  bool seen_merge = false;
  for (const auto& d : comp) {
    if (auto* s = std::get_if<Sum3D>(&d)) {
      EXPECT_FALSE(seen_merge) << "Sum3 candidates must precede Merge candidates";
      ++sum3;
      EXPECT_LT(s->inner.i, s->inner.j);
      EXPECT_NE(s->k, s->inner.i);
      EXPECT_NE(s->k, s->inner.j);
    } else if (auto* m = std::get_if<MergeD>(&d)) {
      seen_merge = true;
      ++merges;
      EXPECT_LT(m->a.start, m->b.start);
      EXPECT_LT(m->a.end, m->b.start);  // non-overlapping
    } else {
      FAIL() << "compose_topk must only emit Sum3 and Merge";
    }
  }
  EXPECT_EQ(sum3, 3u);  // 3 sums x 1 remaining mention
  EXPECT_GT(merges, 0u);
  std::set<std::uint64_t> keys;
  for (const auto& d : comp) EXPECT_TRUE(keys.insert(derivation_key(d)).second);
}

TEST(Enumerate, TopKComposeKeepsHighestScoringArguments) {
  Example ex = make_example("e", "q", "10 20 30 40");
  OpConfig cfg = OpConfig::drop_full();
  cfg.top_k_compose = 1;
  auto base = enumerate_base(ex, cfg);
  std::vector<double> span_scores, sum_scores;
  std::vector<SpanD> spans;
  std::vector<SumD> sums;
  for (const auto& d : base) {
    if (auto* s = std::get_if<SpanD>(&d)) {
      spans.push_back(*s);
      span_scores.push_back(s->start == 1 && s->end == 1 ? 5.0 : -1.0);
    } else if (auto* s = std::get_if<SumD>(&d)) {
      sums.push_back(*s);
      sum_scores.push_back(s->i == 1 && s->j == 3 ? 7.0 : 0.0);
    }
  }
  auto comp = compose_topk(base, &span_scores, &sum_scores, ex, cfg);
  std::size_t sum3 = 0;
  for (const auto& d : comp) {
    if (auto* s = std::get_if<Sum3D>(&d)) {
      ++sum3;
      EXPECT_EQ(s->inner.i, 1u);
      EXPECT_EQ(s->inner.j, 3u);
    }
    EXPECT_FALSE(std::holds_alternative<MergeD>(d))
        << "a single kept span cannot form a merge";
  }
  EXPECT_EQ(sum3, 2u);  // Sum(1,3) composed with mentions 0 and 2
}

TEST(Sexpr, RendersReadableForms) {
  Example ex = fixture();
  EXPECT_EQ(to_sexpr(LiteralD{Lit13::Yes}, ex), "(Lit Yes)");
  EXPECT_EQ(to_sexpr(LiteralD{Lit13::D7}, ex), "(Lit 7)");
  EXPECT_EQ(to_sexpr(SumD{kV6_4, kV5_1}, ex), "(Sum #8=6.4 #9=5.1)");
  EXPECT_EQ(to_sexpr(Diff100D{kP17_5}, ex), "(Diff100 #1=17.5)");
  EXPECT_EQ(to_sexpr(Sum3D{SumD{kA40543, kA15416}, kA11068}, ex),
            "(Sum3 (Sum #3=40543 #4=15416) #5=11068)");
  EXPECT_EQ(to_sexpr(SpanD{3, 4}, ex), "(Span 3 4 \"Bears took\")");
}

TEST(Sexpr, RoundTripsEveryShape) {
  Example ex = fixture();
  std::vector<Derivation> cases = {
      LiteralD{Lit13::Unknown},
      LiteralD{Lit13::D0},
      SpanD{2, 5},
      SumD{0, 3},
      DiffD{7, 6},
      Diff100D{2},
      MulD{12, 13},
      DivD{10, 11},
      Sum3D{SumD{3, 4}, 5},
      MergeD{SpanD{1, 2}, SpanD{4, 6}},
  };
  for (const auto& d : cases) {
    SCOPED_TRACE(to_sexpr(d, ex));
    Derivation back = parse_sexpr(to_sexpr(d, ex));
    EXPECT_EQ(derivation_key(back), derivation_key(d));
    EXPECT_TRUE(back == d);
  }
}

TEST(Sexpr, RejectsMalformedInput) {
  EXPECT_THROW(parse_sexpr("(Frob 1 2)"), SexprError);
  EXPECT_THROW(parse_sexpr("(Sum #0=1"), SexprError);
  EXPECT_THROW(parse_sexpr("(Sum3 (Span 0 1) #2=5)"), SexprError);
  EXPECT_THROW(parse_sexpr("(Lit Maybe)"), SexprError);
  EXPECT_THROW(parse_sexpr("(Sum #0=1 #1=2) junk"), SexprError);
}

}  // namespace
}  // namespace derivata
