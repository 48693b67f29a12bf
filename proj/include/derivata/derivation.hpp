#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "derivata/corpus.hpp"
#include "derivata/decimal.hpp"

namespace derivata {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The 13 literal answers: Yes / No / Unknown and the digits 0..9.
enum class Lit13 : int {
  Yes = 0,
  No,
  Unknown,
  D0,
  D1,
  D2,
  D3,
  D4,
  D5,
  D6,
  D7,
  D8,
  D9,
};

inline constexpr int kNumLiterals = 13;

inline std::string lit13_name(Lit13 v) {
  int i = static_cast<int>(v);
  if (i < 3) return lit_ynu_name(static_cast<LitYNU>(i));
  return std::string(1, static_cast<char>('0' + (i - 3)));
}

inline std::optional<Lit13> lit13_from_name(std::string_view s) {
  if (s == "Yes") return Lit13::Yes;
  if (s == "No") return Lit13::No;
  if (s == "Unknown") return Lit13::Unknown;
  if (s.size() == 1 && s[0] >= '0' && s[0] <= '9')
    return static_cast<Lit13>(3 + (s[0] - '0'));
  return std::nullopt;
}

struct LiteralD {
  Lit13 value = Lit13::Unknown;
  friend bool operator==(const LiteralD&, const LiteralD&) = default;
};

// Passage token span, inclusive endpoints.
struct SpanD {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const SpanD&, const SpanD&) = default;
};

// Binary numeric ops hold indices into Example::numbers. SumD and MulD are
// commutative and canonicalized to i < j; DiffD and DivD are ordered
// (value_i - value_j, value_i / value_j).
struct SumD {
  std::size_t i = 0, j = 0;
  friend bool operator==(const SumD&, const SumD&) = default;
};
struct DiffD {
  std::size_t i = 0, j = 0;
  friend bool operator==(const DiffD&, const DiffD&) = default;
};
struct MulD {
  std::size_t i = 0, j = 0;
  friend bool operator==(const MulD&, const MulD&) = default;
};
struct DivD {
  std::size_t i = 0, j = 0;
  friend bool operator==(const DivD&, const DivD&) = default;
};

// 100 - value_i, for percentage complements.
struct Diff100D {
  std::size_t i = 0;
  friend bool operator==(const Diff100D&, const Diff100D&) = default;
};

// Sum of three mentions, built as Sum(Sum(i, j), k) with i, j, k pairwise
// distinct.
struct Sum3D {
  SumD inner;
  std::size_t k = 0;
  friend bool operator==(const Sum3D&, const Sum3D&) = default;
};

// Two non-overlapping spans as a set answer, canonicalized to
// a.start < b.start and a.end < b.start.
struct MergeD {
  SpanD a, b;
  friend bool operator==(const MergeD&, const MergeD&) = default;
};

using Derivation =
    std::variant<LiteralD, SpanD, SumD, DiffD, Diff100D, MulD, DivD, Sum3D, MergeD>;

// Dense 64-bit key, unique per derivation within one example. Used for set
// membership tests (oracle lookup) and nothing else.
inline std::uint64_t derivation_key(const Derivation& d) {
  auto pack = [](std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0,
                 std::uint64_t c = 0, std::uint64_t e = 0) {
    return tag | (a << 4) | (b << 19) | (c << 34) | (e << 49);
  };
  return std::visit(
      [&](const auto& v) -> std::uint64_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LiteralD>)
          return pack(0, static_cast<std::uint64_t>(v.value));
        else if constexpr (std::is_same_v<T, SpanD>)
          return pack(1, v.start, v.end);
        else if constexpr (std::is_same_v<T, SumD>)
          return pack(2, v.i, v.j);
        else if constexpr (std::is_same_v<T, DiffD>)
          return pack(3, v.i, v.j);
        else if constexpr (std::is_same_v<T, Diff100D>)
          return pack(4, v.i);
        else if constexpr (std::is_same_v<T, MulD>)
          return pack(5, v.i, v.j);
        else if constexpr (std::is_same_v<T, DivD>)
          return pack(6, v.i, v.j);
        else if constexpr (std::is_same_v<T, Sum3D>)
          return pack(7, v.inner.i, v.inner.j, v.k);
        else
          return pack(8, v.a.start, v.a.end, v.b.start, v.b.end);
      },
      d);
}

// Which ops participate in enumeration, plus the span/composition limits.
struct OpConfig {
  bool literals = true;
  bool spans = true;
  bool sum = true;
  bool diff = true;
  bool diff100 = false;
  bool sum3 = false;
  bool merge = false;
  bool mul = false;
  bool div = false;
  std::size_t max_span_len = 32;
  std::size_t top_k_compose = 128;

  void validate() const {
    if (sum3 && !sum) throw ConfigError("Sum3 requires Sum to be enabled");
    if (merge && !spans) throw ConfigError("Merge requires spans to be enabled");
    if (max_span_len == 0) throw ConfigError("max_span_len must be positive");
    if (top_k_compose == 0) throw ConfigError("top_k_compose must be positive");
  }

  static OpConfig basic() { return OpConfig{}; }

  static OpConfig drop_full() {
    OpConfig c;
    c.diff100 = c.sum3 = c.merge = true;
    return c;
  }

  static OpConfig all_ops() {
    OpConfig c = drop_full();
    c.mul = c.div = true;
    return c;
  }

  // Comma-separated op list, e.g. "literals,spans,sum,diff,mul".
  static OpConfig from_flags(std::string_view csv) {
    OpConfig c;
    c.literals = c.spans = c.sum = c.diff = false;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
      std::size_t comma = csv.find(',', pos);
      if (comma == std::string_view::npos) comma = csv.size();
      std::string_view tok = csv.substr(pos, comma - pos);
      if (tok == "literals") c.literals = true;
      else if (tok == "spans") c.spans = true;
      else if (tok == "sum") c.sum = true;
      else if (tok == "diff") c.diff = true;
      else if (tok == "diff100") c.diff100 = true;
      else if (tok == "sum3") c.sum3 = true;
      else if (tok == "merge") c.merge = true;
      else if (tok == "mul") c.mul = true;
      else if (tok == "div") c.div = true;
      else if (!tok.empty()) throw ConfigError("unknown op '" + std::string(tok) + "'");
      pos = comma + 1;
    }
    c.validate();
    return c;
  }

  std::string to_flags() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
      if (!on) return;
      if (!out.empty()) out += ',';
      out += name;
    };
    add(literals, "literals");
    add(spans, "spans");
    add(sum, "sum");
    add(diff, "diff");
    add(diff100, "diff100");
    add(sum3, "sum3");
    add(merge, "merge");
    add(mul, "mul");
    add(div, "div");
    return out;
  }
};

// What a derivation evaluates to.
struct AnswerValue {
  enum class Kind { Number, SpanSet, Literal };
  Kind kind = Kind::Number;
  Decimal number;
  std::vector<std::string> spans;  // span texts, in derivation order
  LitYNU literal = LitYNU::Unknown;

  static AnswerValue of_number(Decimal v) {
    AnswerValue a;
    a.kind = Kind::Number;
    a.number = v;
    return a;
  }
  static AnswerValue of_spans(std::vector<std::string> s) {
    AnswerValue a;
    a.kind = Kind::SpanSet;
    a.spans = std::move(s);
    return a;
  }
  static AnswerValue of_literal(LitYNU v) {
    AnswerValue a;
    a.kind = Kind::Literal;
    a.literal = v;
    return a;
  }
};

inline std::string span_text(const Example& ex, const SpanD& s) {
  return join_tokens(ex.passage, s.start, s.end + 1);
}

// Evaluates a derivation against an example. Throws DivisionByZero /
// ExecutionError when the arithmetic cannot be carried out; callers treat
// such derivations as inexecutable and drop them.
inline AnswerValue execute(const Derivation& d, const Example& ex) {
  auto value = [&](std::size_t i) -> const Decimal& { return ex.numbers.at(i).value; };
  return std::visit(
      [&](const auto& v) -> AnswerValue {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LiteralD>) {
          int i = static_cast<int>(v.value);
          if (i < 3) return AnswerValue::of_literal(static_cast<LitYNU>(i));
          return AnswerValue::of_number(Decimal::from_int(i - 3));
        } else if constexpr (std::is_same_v<T, SpanD>) {
          return AnswerValue::of_spans({span_text(ex, v)});
        } else if constexpr (std::is_same_v<T, SumD>) {
          return AnswerValue::of_number(value(v.i) + value(v.j));
        } else if constexpr (std::is_same_v<T, DiffD>) {
          return AnswerValue::of_number(value(v.i) - value(v.j));
        } else if constexpr (std::is_same_v<T, Diff100D>) {
          return AnswerValue::of_number(Decimal::from_int(100) - value(v.i));
        } else if constexpr (std::is_same_v<T, MulD>) {
          return AnswerValue::of_number(value(v.i) * value(v.j));
        } else if constexpr (std::is_same_v<T, DivD>) {
          return AnswerValue::of_number(value(v.i) / value(v.j));
        } else if constexpr (std::is_same_v<T, Sum3D>) {
          return AnswerValue::of_number((value(v.inner.i) + value(v.inner.j)) +
                                        value(v.k));
        } else {
          return AnswerValue::of_spans({span_text(ex, v.a), span_text(ex, v.b)});
        }
      },
      d);
}

// Flat string list form of an answer, as emitted in predictions and consumed
// by the evaluation metrics.
inline std::vector<std::string> render_answer(const AnswerValue& a) {
  switch (a.kind) {
    case AnswerValue::Kind::Number: return {a.number.to_string()};
    case AnswerValue::Kind::SpanSet: return a.spans;
    default: return {lit_ynu_name(a.literal)};
  }
}

namespace detail {

inline void sexpr_escape(std::string_view s, std::string& out) {
  out.push_back('"');
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
}

}  // namespace detail

// Readable s-expression form of a derivation. Number arguments render as
// #<mention index>=<value>; spans carry their text for readability.
//   (Sum #0=6.4 #1=5.1)    (Span 3 5 "the visiting team")
//   (Sum3 (Sum #0=40543 #1=15416) #2=11068)
inline std::string to_sexpr(const Derivation& d, const Example& ex) {
  auto num = [&](std::size_t i) {
    return "#" + std::to_string(i) + "=" + ex.numbers.at(i).value.to_string();
  };
  auto span = [&](const SpanD& s) {
    std::string out = "(Span " + std::to_string(s.start) + " " + std::to_string(s.end) + " ";
    detail::sexpr_escape(span_text(ex, s), out);
    out.push_back(')');
    return out;
  };
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LiteralD>)
          return "(Lit " + lit13_name(v.value) + ")";
        else if constexpr (std::is_same_v<T, SpanD>)
          return span(v);
        else if constexpr (std::is_same_v<T, SumD>)
          return "(Sum " + num(v.i) + " " + num(v.j) + ")";
        else if constexpr (std::is_same_v<T, DiffD>)
          return "(Diff " + num(v.i) + " " + num(v.j) + ")";
        else if constexpr (std::is_same_v<T, Diff100D>)
          return "(Diff100 " + num(v.i) + ")";
        else if constexpr (std::is_same_v<T, MulD>)
          return "(Mul " + num(v.i) + " " + num(v.j) + ")";
        else if constexpr (std::is_same_v<T, DivD>)
          return "(Div " + num(v.i) + " " + num(v.j) + ")";
        else if constexpr (std::is_same_v<T, Sum3D>)
          return "(Sum3 (Sum " + num(v.inner.i) + " " + num(v.inner.j) + ") " +
                 num(v.k) + ")";
        else
          return "(Merge " + span(v.a) + " " + span(v.b) + ")";
      },
      d);
}

struct SexprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct SexprParser {
  std::string_view s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && is_space_byte(s[pos])) ++pos;
  }
  void expect(char c) {
    skip_ws();
    if (pos >= s.size() || s[pos] != c)
      throw SexprError("expected '" + std::string(1, c) + "' at offset " +
                       std::to_string(pos));
    ++pos;
  }
  std::string word() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && !is_space_byte(s[pos]) && s[pos] != '(' && s[pos] != ')')
      ++pos;
    if (pos == start) throw SexprError("expected atom at offset " + std::to_string(pos));
    return std::string(s.substr(start, pos - start));
  }
  std::size_t index() {
    std::string w = word();
    if (w.empty() || w[0] != '#') throw SexprError("expected #index argument, got '" + w + "'");
    std::size_t eq = w.find('=');
    std::string digits = w.substr(1, eq == std::string::npos ? eq : eq - 1);
    if (digits.empty()) throw SexprError("empty mention index");
    std::size_t v = 0;
    for (char c : digits) {
      if (!is_digit_byte(c)) throw SexprError("bad mention index '" + w + "'");
      v = v * 10 + (c - '0');
    }
    return v;
  }
  std::size_t plain_index() {
    std::string w = word();
    std::size_t v = 0;
    if (w.empty()) throw SexprError("expected index");
    for (char c : w) {
      if (!is_digit_byte(c)) throw SexprError("bad index '" + w + "'");
      v = v * 10 + (c - '0');
    }
    return v;
  }
  void quoted_string() {  // parsed for validity, value unused (span text is derived)
    skip_ws();
    expect('"');
    while (pos < s.size() && s[pos] != '"') {
      if (s[pos] == '\\') ++pos;
      ++pos;
    }
    expect('"');
  }

  Derivation node() {
    expect('(');
    std::string head = word();
    Derivation out;
    if (head == "Lit") {
      auto v = lit13_from_name(word());
      if (!v) throw SexprError("unknown literal");
      out = LiteralD{*v};
    } else if (head == "Span") {
      SpanD sp;
      sp.start = plain_index();
      sp.end = plain_index();
      skip_ws();
      if (pos < s.size() && s[pos] == '"') quoted_string();
      out = sp;
    } else if (head == "Sum") {
      std::size_t i = index(), j = index();
      out = SumD{i, j};
    } else if (head == "Diff") {
      std::size_t i = index(), j = index();
      out = DiffD{i, j};
    } else if (head == "Diff100") {
      out = Diff100D{index()};
    } else if (head == "Mul") {
      std::size_t i = index(), j = index();
      out = MulD{i, j};
    } else if (head == "Div") {
      std::size_t i = index(), j = index();
      out = DivD{i, j};
    } else if (head == "Sum3") {
      Derivation inner = node();
      if (!std::holds_alternative<SumD>(inner))
        throw SexprError("Sum3 inner node must be a Sum");
      out = Sum3D{std::get<SumD>(inner), index()};
    } else if (head == "Merge") {
      Derivation a = node(), b = node();
      if (!std::holds_alternative<SpanD>(a) || !std::holds_alternative<SpanD>(b))
        throw SexprError("Merge arguments must be Spans");
      out = MergeD{std::get<SpanD>(a), std::get<SpanD>(b)};
    } else {
      throw SexprError("unknown op '" + head + "'");
    }
    expect(')');
    return out;
  }
};

}  // namespace detail

inline Derivation parse_sexpr(std::string_view text) {
  detail::SexprParser p{text};
  Derivation d = p.node();
  p.skip_ws();
  if (p.pos != text.size()) throw SexprError("trailing characters after derivation");
  return d;
}

}  // namespace derivata
