#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace fdenergy {

/// Exact rational number. All energies, bounds and slot durations are held
/// in this type; conversion to floating point happens only at output.
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

/// Parses a decimal literal ("80", "-0.25", "1e-3", "2.5E+4") or a fraction
/// ("3/7") into an exact rational. Throws std::invalid_argument on malformed
/// input.
Rational parse_rational(std::string_view text);

/// Exact value of a finite double (every double is a dyadic rational).
Rational from_double(double value);

double to_double(const Rational& value);

/// Shortest round-trip decimal representation of the nearest double.
std::string format_double(double value);
std::string format_decimal(const Rational& value);

/// floor(sqrt(v)) for v >= 0.
BigInt floor_sqrt(const Rational& value);

}  // namespace fdenergy
