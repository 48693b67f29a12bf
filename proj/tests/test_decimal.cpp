#include "derivata/decimal.hpp"

#include <gtest/gtest.h>

namespace derivata {
namespace {

Decimal dec(const char* s) {
  auto v = Decimal::parse(s);
  EXPECT_TRUE(v.has_value()) << s;
  return v.value_or(Decimal{});
}

TEST(Decimal, ParsesPlainLiterals) {
  EXPECT_EQ(dec("0").to_string(), "0");
  EXPECT_EQ(dec("007").to_string(), "7");
  EXPECT_EQ(dec("82.5").to_string(), "82.5");
  EXPECT_EQ(dec("82.50").to_string(), "82.5");
  EXPECT_EQ(dec("25532").to_string(), "25532");
  EXPECT_EQ(dec("0.001").to_string(), "0.001");
}

TEST(Decimal, RejectsMalformedLiterals) {
  EXPECT_FALSE(Decimal::parse("").has_value());
  EXPECT_FALSE(Decimal::parse(".5").has_value());
  EXPECT_FALSE(Decimal::parse("5.").has_value());
  EXPECT_FALSE(Decimal::parse("1.2.3").has_value());
  EXPECT_FALSE(Decimal::parse("-4").has_value());
  EXPECT_FALSE(Decimal::parse("1,000").has_value());
  EXPECT_FALSE(Decimal::parse("4e2").has_value());
}

TEST(Decimal, ExactArithmetic) {
  EXPECT_EQ((dec("6.4") + dec("5.1")).to_string(), "11.5");
  EXPECT_EQ((dec("100") - dec("17.5")).to_string(), "82.5");
  EXPECT_EQ((dec("100") - dec("55.2")).to_string(), "44.8");
  EXPECT_EQ((dec("0.1") + dec("0.2")).to_string(), "0.3");
  EXPECT_EQ((dec("3") * dec("8")).to_string(), "24");
  EXPECT_EQ((dec("9306") / dec("99")).to_string(), "94");
  EXPECT_EQ((dec("1501") - dec("1507")).to_string(), "-6");
  EXPECT_EQ(((dec("40543") + dec("15416")) + dec("11068")).to_string(), "67027");
}

TEST(Decimal, DivisionByZeroThrows) {
  EXPECT_THROW(dec("5") / Decimal{}, DivisionByZero);
}

TEST(Decimal, NonTerminatingFractionsRoundAtTwelveDigits) {
  EXPECT_EQ((dec("1") / dec("3")).to_string(), "0.333333333333");
  EXPECT_EQ((dec("2") / dec("3")).to_string(), "0.666666666667");
  EXPECT_EQ((dec("1") / dec("7")).to_string(), "0.142857142857");
}

TEST(Decimal, TerminatingFractionsRenderExactly) {
  Decimal v = dec("1");
  for (int i = 0; i < 20; ++i) v = v / dec("2");
  EXPECT_EQ(v.to_string(), "0.00000095367431640625");
}

TEST(Decimal, Comparisons) {
  EXPECT_TRUE(dec("0.1") + dec("0.2") == dec("0.3"));
  EXPECT_TRUE(dec("82.5") < dec("82.51"));
  EXPECT_TRUE(dec("5") > dec("4.999"));
  EXPECT_TRUE(-dec("3") < Decimal{});
  EXPECT_EQ(Decimal::from_int(-4).to_string(), "-4");
}

TEST(Decimal, OverflowThrowsInsteadOfWrapping) {
  Decimal big = dec("99999999999999999999999999999999");
  EXPECT_THROW(big * big, ExecutionError);
}

TEST(Decimal, FifteenSignificantDigitsSurviveTwoOps) {
  Decimal a = dec("123456789.123456");
  Decimal b = dec("987654321.654321");
  Decimal c = dec("0.000000000000001");
  EXPECT_EQ(((a + b) + c).to_string(), "1111111110.777777000000001");
  EXPECT_NO_THROW(a * b);
  EXPECT_EQ(((a * b) / b).to_string(), a.to_string());
}

TEST(Decimal, ToDoubleIsClose) {
  EXPECT_NEAR(dec("82.5").to_double(), 82.5, 1e-12);
  EXPECT_NEAR((dec("1") / dec("3")).to_double(), 1.0 / 3.0, 1e-15);
}

}  // namespace
}  // namespace derivata
