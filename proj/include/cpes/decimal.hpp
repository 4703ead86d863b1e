#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace cpes {

/// Exact base-10 number as used by xsd:decimal and xsd:integer literals.
///
/// Only comparison and conversion are provided; values are kept as normalized
/// digit strings so that ordering never suffers binary floating point drift.
class Decimal {
public:
  Decimal() = default;

  /// Parses `[+-]?digits[.digits]`. Returns nullopt on anything else
  /// (exponents are not part of the decimal lexical space).
  static std::optional<Decimal> parse(std::string_view lexical);

  /// Shortest fixed-notation text that converts back to exactly `value`.
  static std::string format(double value);
  static Decimal from_double(double value);

  double to_double() const;
  bool is_zero() const { return integer_.empty() && fraction_.empty(); }
  bool negative() const { return negative_; }

  /// Canonical lexical form: no superfluous zeros, "0" for zero.
  std::string canonical() const;

  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);
  friend bool operator==(const Decimal& a, const Decimal& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

private:
  bool negative_ = false;
  std::string integer_;  // no leading zeros; empty means 0
  std::string fraction_; // no trailing zeros
};

} // namespace cpes
