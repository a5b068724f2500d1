#include "fdenergy/rational.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace fdenergy {

namespace {

BigInt pow10(unsigned exponent) {
   BigInt result = 1;
   for (unsigned i = 0; i < exponent; ++i) result *= 10;
   return result;
}

[[noreturn]] void bad_literal(std::string_view text) {
   throw std::invalid_argument("not a number: '" + std::string(text) + "'");
}

Rational parse_decimal(std::string_view text) {
   std::size_t pos = 0;
   bool negative = false;
   if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      negative = text[pos] == '-';
      ++pos;
   }
   std::string digits;
   int fraction_digits = 0;
   bool seen_point = false;
   for (; pos < text.size(); ++pos) {
      const char c = text[pos];
      if (std::isdigit(static_cast<unsigned char>(c))) {
         digits.push_back(c);
         if (seen_point) ++fraction_digits;
      } else if (c == '.' && !seen_point) {
         seen_point = true;
      } else {
         break;
      }
   }
   if (digits.empty()) bad_literal(text);
   long exponent = 0;
   if (pos < text.size()) {
      if (text[pos] != 'e' && text[pos] != 'E') bad_literal(text);
      ++pos;
      const char* first = text.data() + pos;
      const char* last = text.data() + text.size();
      if (first != last && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, exponent);
      if (ec != std::errc{} || ptr != last || first == last) bad_literal(text);
      if (exponent > 4000 || exponent < -4000) bad_literal(text);
   }
   BigInt numerator(digits);
   const long scale = exponent - fraction_digits;
   Rational value;
   if (scale >= 0) {
      value = Rational(numerator * pow10(static_cast<unsigned>(scale)));
   } else {
      value = Rational(numerator, pow10(static_cast<unsigned>(-scale)));
   }
   return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
   while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
   while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
   if (text.empty()) bad_literal(text);
   if (const auto slash = text.find('/'); slash != std::string_view::npos) {
      const Rational num = parse_decimal(text.substr(0, slash));
      const Rational den = parse_decimal(text.substr(slash + 1));
      if (den == 0) throw std::invalid_argument("zero denominator: '" + std::string(text) + "'");
      return num / den;
   }
   return parse_decimal(text);
}

Rational from_double(double value) {
   if (!std::isfinite(value)) throw std::invalid_argument("non-finite value");
   int exponent = 0;
   double mantissa = std::frexp(value, &exponent);
   // 53 significant bits fit exactly in an int64 after scaling.
   const auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
   exponent -= 53;
   Rational result{BigInt(scaled)};
   if (exponent > 0) {
      result *= Rational(BigInt(1) << exponent);
   } else if (exponent < 0) {
      result /= Rational(BigInt(1) << -exponent);
   }
   return result;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string format_double(double value) {
   std::array<char, 64> buffer{};
   auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
   if (ec != std::errc{}) return "nan";
   return std::string(buffer.data(), ptr);
}

std::string format_decimal(const Rational& value) { return format_double(to_double(value)); }

BigInt floor_sqrt(const Rational& value) {
   if (value < 0) throw std::domain_error("floor_sqrt of negative value");
   // floor(sqrt(q)) == isqrt(floor(q))
   const BigInt whole = numerator(value) / denominator(value);
   return boost::multiprecision::sqrt(whole);
}

}  // namespace fdenergy
