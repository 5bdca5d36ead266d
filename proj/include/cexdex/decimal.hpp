#pragma once

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <string>
#include <string_view>

namespace cexdex {

// Token amounts routinely exceed the 64-bit integer range once decimals are
// applied, so they are carried as 50-digit decimal floats.
using Decimal = boost::multiprecision::number<
    boost::multiprecision::cpp_dec_float<50>,
    boost::multiprecision::et_off>;

/// Parses a plain or scientific decimal literal. Throws std::invalid_argument
/// on anything else (including empty input, "nan", "inf").
Decimal parse_decimal(std::string_view text);

/// Canonical fixed-point rendering without trailing zeros ("2.5", "-1", "0").
std::string format_decimal(const Decimal& value);

/// Correctly rounded conversion to binary64.
double to_double(const Decimal& value);

/// Shortest round-trip rendering of a double; "" for NaN.
std::string format_double(double value);

/// Parses a double with std::from_chars semantics; throws on trailing junk.
double parse_double(std::string_view text);

}  // namespace cexdex
