#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "derivata/decimal.hpp"
#include "derivata/token.hpp"

namespace derivata {

struct FormatError : std::runtime_error {
  FormatError(const std::string& path, const std::string& pointer, const std::string& msg)
      : std::runtime_error(pointer.empty() ? path + ": " + msg
                                           : path + ": " + pointer + ": " + msg) {}
};

struct QuestionTooLong : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Token grammar for numbers in passages: digits with optional 3-digit comma
// groups, then optionally '.' and more digits. No sign. "25,532" and "73.2"
// parse; "1,23" and "p90" do not.
inline std::optional<Decimal> parse_number_token(std::string_view t) {
  if (t.empty()) return std::nullopt;
  std::size_t i = 0;
  std::string digits;
  while (i < t.size() && detail::is_digit_byte(t[i])) {
    digits.push_back(t[i]);
    ++i;
  }
  if (digits.empty()) return std::nullopt;
  if (i < t.size() && t[i] == ',') {
    if (digits.size() > 3) return std::nullopt;
    while (i < t.size() && t[i] == ',') {
      ++i;
      for (int k = 0; k < 3; ++k, ++i) {
        if (i >= t.size() || !detail::is_digit_byte(t[i])) return std::nullopt;
        digits.push_back(t[i]);
      }
    }
  }
  if (i < t.size() && t[i] == '.') {
    ++i;
    if (i >= t.size()) return std::nullopt;
    digits.push_back('.');
    while (i < t.size() && detail::is_digit_byte(t[i])) {
      digits.push_back(t[i]);
      ++i;
    }
    if (digits.back() == '.') return std::nullopt;
  }
  if (i != t.size()) return std::nullopt;
  return Decimal::parse(digits);
}

// Gold number fields may carry a sign even though passage numbers never do.
inline std::optional<Decimal> parse_gold_number(std::string_view s) {
  while (!s.empty() && detail::is_space_byte(s.front())) s.remove_prefix(1);
  while (!s.empty() && detail::is_space_byte(s.back())) s.remove_suffix(1);
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  auto v = parse_number_token(s);
  if (!v) return std::nullopt;
  return neg ? -*v : *v;
}

struct NumberMention {
  std::size_t token_index = 0;  // index into the passage token sequence
  Decimal value;
};

inline constexpr std::size_t kMaxNumbersPerDoc = 128;

inline std::vector<NumberMention> extract_numbers(const TokenSeq& passage) {
  std::vector<NumberMention> out;
  for (std::size_t t = 0; t < passage.size(); ++t) {
    if (auto v = parse_number_token(passage[t].text)) {
      out.push_back(NumberMention{t, *v});
      if (out.size() == kMaxNumbersPerDoc) break;
    }
  }
  return out;
}

enum class LitYNU { Yes, No, Unknown };

inline const char* lit_ynu_name(LitYNU v) {
  switch (v) {
    case LitYNU::Yes: return "Yes";
    case LitYNU::No: return "No";
    default: return "Unknown";
  }
}

struct GoldAnswer {
  enum class Kind { Number, SpanSet, Literal };
  Kind kind = Kind::Number;
  Decimal number;
  std::vector<std::string> spans;  // deduplicated, sorted
  LitYNU literal = LitYNU::Unknown;

  static GoldAnswer of_number(Decimal v) {
    GoldAnswer g;
    g.kind = Kind::Number;
    g.number = v;
    return g;
  }
  static GoldAnswer of_spans(std::vector<std::string> spans) {
    GoldAnswer g;
    g.kind = Kind::SpanSet;
    std::sort(spans.begin(), spans.end());
    spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
    g.spans = std::move(spans);
    return g;
  }
  static GoldAnswer of_literal(LitYNU v) {
    GoldAnswer g;
    g.kind = Kind::Literal;
    g.literal = v;
    return g;
  }
};

struct Example {
  std::string id;
  TokenSeq question;
  TokenSeq passage;
  std::vector<NumberMention> numbers;
  std::optional<GoldAnswer> gold;
};

inline Example make_example(std::string id, std::string_view question_text,
                            std::string_view passage_text,
                            std::optional<GoldAnswer> gold = std::nullopt) {
  Example ex;
  ex.id = std::move(id);
  ex.question = tokenize(question_text);
  ex.passage = tokenize(passage_text);
  ex.numbers = extract_numbers(ex.passage);
  ex.gold = std::move(gold);
  return ex;
}

inline constexpr std::size_t kMaxSequenceLen = 512;

// Splits an example whose encoded form would exceed max_len into consecutive
// passage windows. The encoded form is [CLS] question [SEP] passage, so the
// per-window passage budget is max_len - 2 - |question|.
inline std::vector<Example> window_split(const Example& ex,
                                         std::size_t max_len = kMaxSequenceLen) {
  const std::size_t overhead = 2;
  if (ex.question.size() + overhead + ex.passage.size() <= max_len) return {ex};
  if (ex.question.size() + overhead >= max_len)
    throw QuestionTooLong("question leaves no room for passage tokens: " + ex.id);
  const std::size_t budget = max_len - overhead - ex.question.size();
  std::vector<Example> out;
  for (std::size_t lo = 0, w = 0; lo < ex.passage.size(); lo += budget, ++w) {
    std::size_t hi = std::min(lo + budget, ex.passage.size());
    Example window;
    window.id = ex.id + "#w" + std::to_string(w);
    window.question = ex.question;
    window.passage.assign(ex.passage.begin() + lo, ex.passage.begin() + hi);
    for (const auto& m : ex.numbers) {
      if (m.token_index >= lo && m.token_index < hi)
        window.numbers.push_back(NumberMention{m.token_index - lo, m.value});
    }
    window.gold = ex.gold;
    out.push_back(std::move(window));
  }
  return out;
}

namespace detail {

inline std::string lower_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::optional<GoldAnswer> parse_drop_answer(const nlohmann::json& ans,
                                                   const std::string& path,
                                                   const std::string& pointer) {
  if (!ans.is_object()) throw FormatError(path, pointer, "answer must be an object");
  if (ans.contains("number")) {
    const auto& num = ans["number"];
    if (num.is_string()) {
      std::string s = num.get<std::string>();
      if (!s.empty()) {
        auto v = parse_gold_number(s);
        if (!v) throw FormatError(path, pointer + "/number", "unparseable number '" + s + "'");
        return GoldAnswer::of_number(*v);
      }
    } else if (num.is_number_integer()) {
      return GoldAnswer::of_number(Decimal::from_int(num.get<long long>()));
    } else if (num.is_number_float()) {
      auto v = parse_gold_number(num.dump());
      if (!v) throw FormatError(path, pointer + "/number", "unparseable number");
      return GoldAnswer::of_number(*v);
    } else if (!num.is_null()) {
      throw FormatError(path, pointer + "/number", "number must be a string or numeric");
    }
  }
  if (ans.contains("spans")) {
    const auto& spans = ans["spans"];
    if (!spans.is_array()) throw FormatError(path, pointer + "/spans", "spans must be an array");
    std::vector<std::string> texts;
    for (const auto& s : spans) {
      if (!s.is_string())
        throw FormatError(path, pointer + "/spans", "span entries must be strings");
      if (!s.get<std::string>().empty()) texts.push_back(s.get<std::string>());
    }
    if (!texts.empty()) return GoldAnswer::of_spans(std::move(texts));
  }
  if (ans.contains("other") && ans["other"].is_string()) {
    std::string o = lower_ascii(ans["other"].get<std::string>());
    if (o == "yes") return GoldAnswer::of_literal(LitYNU::Yes);
    if (o == "no") return GoldAnswer::of_literal(LitYNU::No);
    if (o == "unknown") return GoldAnswer::of_literal(LitYNU::Unknown);
  }
  return std::nullopt;  // e.g. date-only answers
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, "", "cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path, "", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace detail

// DROP-format reader: {passage_id: {"passage": ..., "qa_pairs": [{"question",
// "answer", "query_id"?}, ...]}}. One example per question per window.
// Questions whose answer has no usable number/spans/other field keep an empty
// gold (usable for inference, skipped by training).
inline std::vector<Example> load_drop(const std::string& path,
                                      std::size_t max_len = kMaxSequenceLen) {
  nlohmann::json doc = detail::load_json_file(path);
  if (!doc.is_object()) throw FormatError(path, "", "top level must be an object");
  std::vector<Example> out;
  for (const auto& [pid, pobj] : doc.items()) {
    const std::string ppointer = "/" + pid;
    if (!pobj.is_object() || !pobj.contains("passage") || !pobj["passage"].is_string())
      throw FormatError(path, ppointer, "missing string field 'passage'");
    if (!pobj.contains("qa_pairs") || !pobj["qa_pairs"].is_array())
      throw FormatError(path, ppointer, "missing array field 'qa_pairs'");
    TokenSeq passage = tokenize(pobj["passage"].get<std::string>());
    std::vector<NumberMention> numbers = extract_numbers(passage);
    std::size_t qi = 0;
    for (const auto& qa : pobj["qa_pairs"]) {
      const std::string qpointer = ppointer + "/qa_pairs/" + std::to_string(qi);
      if (!qa.is_object() || !qa.contains("question") || !qa["question"].is_string())
        throw FormatError(path, qpointer, "missing string field 'question'");
      Example ex;
      ex.id = qa.contains("query_id") && qa["query_id"].is_string()
                  ? qa["query_id"].get<std::string>()
                  : pid + "-q" + std::to_string(qi);
      ex.question = tokenize(qa["question"].get<std::string>());
      ex.passage = passage;
      ex.numbers = numbers;
      if (qa.contains("answer"))
        ex.gold = detail::parse_drop_answer(qa["answer"], path, qpointer + "/answer");
      for (auto& w : window_split(ex, max_len)) out.push_back(std::move(w));
      ++qi;
    }
  }
  return out;
}

// Math word problem reader: a JSON array of {"id"?, "question", "answer"}.
// The problem text plays the passage role (it carries the numbers); the
// question sequence is left empty.
inline std::vector<Example> load_mathword(const std::string& path) {
  nlohmann::json doc = detail::load_json_file(path);
  if (!doc.is_array()) throw FormatError(path, "", "top level must be an array");
  std::vector<Example> out;
  std::size_t i = 0;
  for (const auto& item : doc) {
    const std::string pointer = "/" + std::to_string(i);
    if (!item.is_object() || !item.contains("question") || !item["question"].is_string())
      throw FormatError(path, pointer, "missing string field 'question'");
    if (!item.contains("answer"))
      throw FormatError(path, pointer, "missing field 'answer'");
    Example ex;
    ex.id = item.contains("id") && item["id"].is_string() ? item["id"].get<std::string>()
                                                          : "mw-" + std::to_string(i);
    ex.passage = tokenize(item["question"].get<std::string>());
    ex.numbers = extract_numbers(ex.passage);
    const auto& ans = item["answer"];
    std::optional<Decimal> v;
    if (ans.is_number_integer()) {
      v = Decimal::from_int(ans.get<long long>());
    } else if (ans.is_number_float()) {
      v = parse_gold_number(ans.dump());
    } else if (ans.is_string()) {
      v = parse_gold_number(ans.get<std::string>());
    }
    if (!v) throw FormatError(path, pointer + "/answer", "answer must be numeric");
    ex.gold = GoldAnswer::of_number(*v);
    out.push_back(std::move(ex));
    ++i;
  }
  return out;
}

}  // namespace derivata
