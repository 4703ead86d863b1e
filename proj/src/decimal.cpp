#include "cpes/decimal.hpp"

#include <charconv>
#include <cstdlib>
#include <system_error>

namespace cpes {

std::optional<Decimal> Decimal::parse(std::string_view s) {
  Decimal d;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    d.negative_ = s[i] == '-';
    ++i;
  }
  std::size_t int_begin = i;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  std::string_view int_part = s.substr(int_begin, i - int_begin);
  std::string_view frac_part;
  if (i < s.size() && s[i] == '.') {
    ++i;
    std::size_t frac_begin = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    frac_part = s.substr(frac_begin, i - frac_begin);
  }
  if (i != s.size() || (int_part.empty() && frac_part.empty())) return std::nullopt;

  auto first_nonzero = int_part.find_first_not_of('0');
  d.integer_ = first_nonzero == std::string_view::npos ? std::string{}
                                                        : std::string(int_part.substr(first_nonzero));
  auto last_nonzero = frac_part.find_last_not_of('0');
  d.fraction_ = last_nonzero == std::string_view::npos ? std::string{}
                                                        : std::string(frac_part.substr(0, last_nonzero + 1));
  if (d.is_zero()) d.negative_ = false;
  return d;
}

std::string Decimal::format(double value) {
  char buf[512];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (ec != std::errc{}) return "0";
  std::string out(buf, end);
  if (out == "-0") out = "0";
  return out;
}

Decimal Decimal::from_double(double value) { return *parse(format(value)); }

double Decimal::to_double() const { return std::strtod(canonical().c_str(), nullptr); }

std::string Decimal::canonical() const {
  std::string out;
  if (negative_) out += '-';
  out += integer_.empty() ? "0" : integer_;
  if (!fraction_.empty()) {
    out += '.';
    out += fraction_;
  }
  return out;
}

namespace {

std::strong_ordering compare_magnitude(const std::string& ai, const std::string& af,
                                       const std::string& bi, const std::string& bf) {
  if (ai.size() != bi.size()) return ai.size() <=> bi.size();
  if (auto c = ai.compare(bi); c != 0) return c <=> 0;
  std::size_t n = std::max(af.size(), bf.size());
  for (std::size_t k = 0; k < n; ++k) {
    char x = k < af.size() ? af[k] : '0';
    char y = k < bf.size() ? bf[k] : '0';
    if (x != y) return x <=> y;
  }
  return std::strong_ordering::equal;
}

} // namespace

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  if (a.negative_ != b.negative_) return a.negative_ ? std::strong_ordering::less : std::strong_ordering::greater;
  auto mag = compare_magnitude(a.integer_, a.fraction_, b.integer_, b.fraction_);
  if (!a.negative_) return mag;
  return 0 <=> mag;
}

} // namespace cpes
