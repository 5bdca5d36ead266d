#include "cexdex/decimal.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <ios>
#include <stdexcept>
#include <system_error>

namespace cexdex {

namespace {

bool is_decimal_literal(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; ++digits; }
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; ++digits; }
  }
  if (digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; ++exp_digits; }
    if (exp_digits == 0) return false;
  }
  return i == s.size();
}

}  // namespace

Decimal parse_decimal(std::string_view text) {
  if (!is_decimal_literal(text)) {
    throw std::invalid_argument("not a decimal literal: '" + std::string(text) + "'");
  }
  return Decimal(std::string(text));
}

std::string format_decimal(const Decimal& value) {
  if (value.is_zero()) return "0";
  std::string s = value.str(0, std::ios_base::fixed);
  if (auto dot = s.find('.'); dot != std::string::npos) {
    auto last = s.find_last_not_of('0');
    s.erase(last == dot ? dot : last + 1);
  }
  if (s == "-0") return "0";
  return s;
}

double to_double(const Decimal& value) {
  // cpp_dec_float's own conversion is not guaranteed to round correctly.
  std::string s = value.str(60, std::ios_base::scientific);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec == std::errc::result_out_of_range) return value.sign() < 0 ? -HUGE_VAL : HUGE_VAL;
  (void)ptr;
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "";
  if (value == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  std::string_view s = text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(out)) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return out;
}

}  // namespace cexdex
