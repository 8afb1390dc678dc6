#ifndef QKELLY_RATIONAL_HPP
#define QKELLY_RATIONAL_HPP

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qkelly {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double x) { return x; }

inline std::vector<double> to_double(const std::vector<Rational>& v)
{
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(to_double(x));
    return out;
}

/// Exact value of a binary double.
inline Rational exact_from_double(double x)
{
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value has no rational form");
    return Rational(x);
}

inline std::string to_string(const Rational& r)
{
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

inline int sign(const Rational& r) { return r.sign(); }

inline Rational pow(const Rational& base, unsigned exponent)
{
    Rational result = 1;
    Rational b = base;
    while (exponent) {
        if (exponent & 1U) result *= b;
        exponent >>= 1U;
        if (exponent) b *= b;
    }
    return result;
}

inline BigInt factorial(unsigned n)
{
    BigInt f = 1;
    for (unsigned i = 2; i <= n; ++i) f *= i;
    return f;
}

namespace detail {

inline BigInt parse_digits(std::string_view s)
{
    if (s.empty()) throw std::invalid_argument("empty digit string");
    BigInt v = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::invalid_argument("invalid digit '" + std::string(1, c) + "'");
        v = v * 10 + (c - '0');
    }
    return v;
}

inline BigInt pow10(unsigned e)
{
    BigInt v = 1;
    for (unsigned i = 0; i < e; ++i) v *= 10;
    return v;
}

// Decimal literal such as "-12.375e-2", converted by exact decimal expansion.
inline Rational parse_decimal(std::string_view s)
{
    bool negative = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view exp_part = s.substr(e + 1);
        bool exp_negative = false;
        if (!exp_part.empty() && (exp_part.front() == '+' || exp_part.front() == '-')) {
            exp_negative = exp_part.front() == '-';
            exp_part.remove_prefix(1);
        }
        if (exp_part.empty() || exp_part.size() > 6) throw std::invalid_argument("bad exponent");
        exponent = static_cast<long>(parse_digits(exp_part).convert_to<long>());
        if (exp_negative) exponent = -exponent;
        s = s.substr(0, e);
    }
    std::string digits;
    long frac_len = 0;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        digits = std::string(s.substr(0, dot)) + std::string(s.substr(dot + 1));
        frac_len = static_cast<long>(s.size() - dot - 1);
        if (dot == 0 && frac_len == 0) throw std::invalid_argument("bad decimal");
    } else {
        digits = std::string(s);
    }
    Rational value(parse_digits(digits));
    long scale = exponent - frac_len;
    if (scale > 0) value *= Rational(pow10(static_cast<unsigned>(scale)));
    if (scale < 0) value /= Rational(pow10(static_cast<unsigned>(-scale)));
    return negative ? Rational(-value) : value;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace detail

/// Parses "a/b", integers and decimal literals exactly ("0.6" -> 3/5).
inline Rational parse_rational(std::string_view text)
{
    std::string_view s = detail::trim(text);
    try {
        if (auto slash = s.find('/'); slash != std::string_view::npos) {
            Rational num = detail::parse_decimal(detail::trim(s.substr(0, slash)));
            Rational den = detail::parse_decimal(detail::trim(s.substr(slash + 1)));
            if (den == 0) throw std::invalid_argument("zero denominator");
            return num / den;
        }
        return detail::parse_decimal(s);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("cannot parse rational '" + std::string(text) + "': " + e.what());
    }
}

/// Comma separated list of rational literals.
inline std::vector<Rational> parse_rational_list(std::string_view text)
{
    std::vector<Rational> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        out.push_back(parse_rational(text.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

} // namespace qkelly

#endif // QKELLY_RATIONAL_HPP
