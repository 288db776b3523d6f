#pragma once

#include <gmpxx.h>

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aauction {

/// Exact arbitrary-precision rational; every probability, price and virtual
/// valuation in the library is one of these.
using Rational = mpq_class;

/// num/den in canonical form. The raw two-argument mpq_class constructor does
/// not reduce, and GMP equality assumes reduced operands.
inline Rational ratio(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Parses "7/2", "-1/3", "12", "7.5" or "-0.25" exactly. Throws
/// std::invalid_argument on anything else.
Rational parse_rational(std::string_view text);

/// Canonical reduced form: "7/2", "-1/3", "12".
std::string to_string(const Rational& value);

/// Finite decimal rendering when the denominator has only factors 2 and 5,
/// otherwise the fraction form.
std::string to_decimal_or_fraction(const Rational& value);

int sign(const Rational& value);

/// Rational extended with -inf and +inf. Virtual valuations use -inf for the
/// empty list and for lists that never meet a selected product; win thresholds
/// use +inf when a buyer cannot win at all.
class ExtRational {
public:
  enum class Kind { NegInf, Finite, PosInf };

  ExtRational() : kind_(Kind::NegInf) {}
  ExtRational(Rational value) : kind_(Kind::Finite), value_(std::move(value)) { value_.canonicalize(); }
  ExtRational(long value) : kind_(Kind::Finite), value_(value) {}

  static ExtRational neg_inf() { return ExtRational(Kind::NegInf); }
  static ExtRational pos_inf() { return ExtRational(Kind::PosInf); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_neg_inf() const { return kind_ == Kind::NegInf; }
  bool is_pos_inf() const { return kind_ == Kind::PosInf; }

  /// Throws std::logic_error when not finite.
  const Rational& value() const;

  bool is_positive() const { return kind_ == Kind::PosInf || (is_finite() && sgn(value_) > 0); }

  friend bool operator==(const ExtRational& a, const ExtRational& b);
  friend std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b);

private:
  explicit ExtRational(Kind kind) : kind_(kind) {}

  Kind kind_;
  Rational value_;
};

std::string to_string(const ExtRational& value);

}  // namespace aauction
