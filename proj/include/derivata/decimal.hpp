#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace derivata {

struct ExecutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivisionByZero : ExecutionError {
  DivisionByZero() : ExecutionError("division by zero") {}
};

// Exact base-10 rational. Backed by __int128, which is wide enough that any
// value parsed from a decimal literal with <= 15 significant digits survives
// the whole two-step derivation space (Sum3, Mul, Div of parsed values)
// without rounding. Anything past that envelope throws ExecutionError rather
// than silently losing precision.
class Decimal {
 public:
  using Int = __int128;

  constexpr Decimal() = default;

  static Decimal from_int(long long v) { return Decimal(Int(v), Int(1)); }

  // Unsigned decimal literal: one or more digits, optionally '.' and more
  // digits. No sign, no commas, no exponent (the corpus token grammar strips
  // commas before calling this). Returns nullopt on any other shape or when
  // the literal is too long to represent exactly.
  static std::optional<Decimal> parse(std::string_view s) {
    if (s.empty() || s.size() > 34) return std::nullopt;
    Int num = 0;
    Int den = 1;
    bool seen_point = false;
    bool int_digit = false;
    bool frac_digit = false;
    for (char c : s) {
      if (c == '.') {
        if (seen_point) return std::nullopt;
        seen_point = true;
      } else if (c >= '0' && c <= '9') {
        num = num * 10 + (c - '0');
        if (seen_point) {
          den *= 10;
          frac_digit = true;
        } else {
          int_digit = true;
        }
      } else {
        return std::nullopt;
      }
    }
    if (!int_digit || (seen_point && !frac_digit)) return std::nullopt;
    return Decimal(num, den);
  }

  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }
  bool is_integer() const { return den_ == 1; }

  friend Decimal operator+(const Decimal& a, const Decimal& b) {
    Int g = gcd128(a.den_, b.den_);
    Int bd = b.den_ / g;
    Int n = checked_add(checked_mul(a.num_, bd), checked_mul(b.num_, a.den_ / g));
    Int d = checked_mul(a.den_, bd);
    return Decimal(n, d);
  }

  friend Decimal operator-(const Decimal& a, const Decimal& b) { return a + (-b); }

  friend Decimal operator*(const Decimal& a, const Decimal& b) {
    Int g1 = gcd128(abs128(a.num_), b.den_);
    Int g2 = gcd128(abs128(b.num_), a.den_);
    Int n = checked_mul(a.num_ / g1, b.num_ / g2);
    Int d = checked_mul(a.den_ / g2, b.den_ / g1);
    return Decimal(n, d);
  }

  friend Decimal operator/(const Decimal& a, const Decimal& b) {
    if (b.num_ == 0) throw DivisionByZero();
    Int g1 = gcd128(abs128(a.num_), abs128(b.num_));
    Int g2 = gcd128(a.den_, b.den_);
    Int n = checked_mul(a.num_ / g1, b.den_ / g2);
    Int d = checked_mul(a.den_ / g2, b.num_ / g1);
    return Decimal(n, d);
  }

  Decimal operator-() const { return Decimal(-num_, den_, NoNormalize{}); }

  friend bool operator==(const Decimal& a, const Decimal& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;  // unique normalized form
  }
  friend bool operator!=(const Decimal& a, const Decimal& b) { return !(a == b); }
  friend bool operator<(const Decimal& a, const Decimal& b) { return compare(a, b) < 0; }
  friend bool operator>(const Decimal& a, const Decimal& b) { return compare(a, b) > 0; }
  friend bool operator<=(const Decimal& a, const Decimal& b) { return compare(a, b) <= 0; }
  friend bool operator>=(const Decimal& a, const Decimal& b) { return compare(a, b) >= 0; }

  double to_double() const {
    return static_cast<double>(static_cast<long double>(num_) /
                               static_cast<long double>(den_));
  }

  // Canonical decimal rendering, trailing zeros stripped. Terminating
  // fractions render exactly; non-terminating ones round half-up at 12
  // fractional digits.
  std::string to_string() const {
    if (num_ == 0) return "0";
    Int n = abs128(num_);
    Int d = den_;
    int twos = 0, fives = 0;
    Int t = d;
    while (t % 2 == 0) { t /= 2; ++twos; }
    while (t % 5 == 0) { t /= 5; ++fives; }
    std::string out;
    if (t == 1) {
      int k = twos > fives ? twos : fives;
      Int mult = 1;
      bool overflow = false;
      for (int i = 0; i < k - twos && !overflow; ++i) overflow = mul_overflows(mult, 2, mult);
      for (int i = 0; i < k - fives && !overflow; ++i) overflow = mul_overflows(mult, 5, mult);
      Int scaled;
      if (!overflow && !mul_overflows(n, mult, scaled)) {
        out = with_point(dec_string(scaled), k);
      } else {
        out = long_division(n, d);
      }
    } else {
      out = long_division(n, d);
    }
    if (num_ < 0) out.insert(out.begin(), '-');
    return out;
  }

 private:
  struct NoNormalize {};
  Decimal(Int n, Int d, NoNormalize) : num_(n), den_(d) {}

  Decimal(Int n, Int d) : num_(n), den_(d) {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    Int g = gcd128(abs128(num_), den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  static Int abs128(Int v) { return v < 0 ? -v : v; }

  static Int gcd128(Int a, Int b) {
    while (b != 0) {
      Int r = a % b;
      a = b;
      b = r;
    }
    return a == 0 ? 1 : a;
  }

  static bool mul_overflows(Int a, Int b, Int& out) {
    return __builtin_mul_overflow(a, b, &out);
  }

  static Int checked_mul(Int a, Int b) {
    Int r;
    if (__builtin_mul_overflow(a, b, &r)) throw ExecutionError("decimal overflow");
    return r;
  }

  static Int checked_add(Int a, Int b) {
    Int r;
    if (__builtin_add_overflow(a, b, &r)) throw ExecutionError("decimal overflow");
    return r;
  }

  static int compare(const Decimal& a, const Decimal& b) {
    Int l, r;
    if (!__builtin_mul_overflow(a.num_, b.den_, &l) &&
        !__builtin_mul_overflow(b.num_, a.den_, &r)) {
      return l < r ? -1 : (l > r ? 1 : 0);
    }
    long double x = a.to_double(), y = b.to_double();
    return x < y ? -1 : (x > y ? 1 : 0);
  }

  static std::string dec_string(Int v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
      s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    return {s.rbegin(), s.rend()};
  }

  // digits with a decimal point k places from the right, trailing zeros
  // stripped
  static std::string with_point(std::string digits, int k) {
    if (k == 0) return digits;
    while (static_cast<int>(digits.size()) <= k) digits.insert(digits.begin(), '0');
    digits.insert(digits.end() - k, '.');
    while (digits.back() == '0') digits.pop_back();
    if (digits.back() == '.') digits.pop_back();
    return digits;
  }

  static std::string long_division(Int n, Int d) {
    static constexpr int kFracDigits = 12;
    Int q = n / d;
    Int rem = n % d;
    Int frac = 0;
    for (int i = 0; i < kFracDigits; ++i) {
      rem *= 10;
      frac = frac * 10 + rem / d;
      rem %= d;
    }
    rem *= 10;
    if (rem / d >= 5) ++frac;  // half-up on the 13th digit
    Int carry_unit = 1;
    for (int i = 0; i < kFracDigits; ++i) carry_unit *= 10;
    if (frac >= carry_unit) {
      frac -= carry_unit;
      ++q;
    }
    std::string fs = dec_string(frac);
    while (static_cast<int>(fs.size()) < kFracDigits) fs.insert(fs.begin(), '0');
    while (!fs.empty() && fs.back() == '0') fs.pop_back();
    std::string out = dec_string(q);
    if (!fs.empty()) out += "." + fs;
    return out;
  }

  Int num_ = 0;
  Int den_ = 1;
};

}  // namespace derivata
