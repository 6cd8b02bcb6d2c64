#pragma once

// Scalar backends. Every module is generic over a scalar type S for which
// scalar_traits<S> is specialized: exact rationals (GMP) and binary64.

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace sojourn {

using Rational = mpq_class;

template <typename S>
struct scalar_traits;

namespace detail {

inline std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Exact decimal -> rational: [+-]digits[.digits][(e|E)[+-]digits]
inline Rational parse_decimal_exact(const std::string& s)
{
    std::size_t pos = 0;
    bool negative = false;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) negative = s[pos++] == '-';
    std::string digits;
    long scale = 0;
    bool seen_digit = false;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        digits += s[pos++];
        seen_digit = true;
    }
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            digits += s[pos++];
            ++scale;
            seen_digit = true;
        }
    }
    if (!seen_digit) throw std::invalid_argument("not a number: '" + s + "'");
    long exponent = 0;
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        ++pos;
        std::size_t used = 0;
        try {
            exponent = std::stol(s.substr(pos), &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad exponent in '" + s + "'");
        }
        pos += used;
    }
    if (pos != s.size()) throw std::invalid_argument("trailing characters in '" + s + "'");
    mpz_class num(digits.empty() ? "0" : digits, 10);
    long shift = exponent - scale;
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
    Rational value = shift >= 0 ? Rational(num * pow10) : Rational(num, pow10);
    value.canonicalize();
    return negative ? Rational(-value) : value;
}

}  // namespace detail

template <>
struct scalar_traits<Rational> {
    static constexpr bool exact = true;
    static constexpr const char* name = "rational";

    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }
    static Rational from_ratio(long num, long den)
    {
        Rational q(num, den);
        q.canonicalize();
        return q;
    }
    static bool is_zero(const Rational& v) { return sgn(v) == 0; }
    static double to_double(const Rational& v) { return v.get_d(); }
    static Rational abs(const Rational& v) { return ::abs(v); }

    static Rational parse(std::string_view text)
    {
        std::string s = detail::trim(text);
        auto slash = s.find('/');
        if (slash == std::string::npos) return detail::parse_decimal_exact(s);
        Rational num = detail::parse_decimal_exact(detail::trim(s.substr(0, slash)));
        Rational den = detail::parse_decimal_exact(detail::trim(s.substr(slash + 1)));
        if (sgn(den) == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
        Rational q = num / den;
        q.canonicalize();
        return q;
    }

    static std::string format(const Rational& v)
    {
        if (v.get_den() == 1) return v.get_num().get_str();
        return v.get_num().get_str() + "/" + v.get_den().get_str();
    }
};

template <>
struct scalar_traits<double> {
    static constexpr bool exact = false;
    static constexpr const char* name = "float";
    static constexpr double sum_tolerance = 1e-12;

    static double zero() { return 0.0; }
    static double one() { return 1.0; }
    static double from_ratio(long num, long den) { return static_cast<double>(num) / den; }
    static bool is_zero(double v) { return v == 0.0; }
    static double to_double(double v) { return v; }
    static double abs(double v) { return std::fabs(v); }

    static double parse(std::string_view text)
    {
        return scalar_traits<Rational>::parse(text).get_d();
    }

    static std::string format(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
};

// Equality used by structural invariants: exact for rationals, |a-b| <= tol for floats.
template <typename S>
bool nearly_equal(const S& a, const S& b, double tol = 1e-12)
{
    if constexpr (scalar_traits<S>::exact) {
        return a == b;
    } else {
        return std::fabs(a - b) <= tol;
    }
}

template <typename To, typename From>
To scalar_cast(const From& v)
{
    if constexpr (std::is_same_v<To, From>) {
        return v;
    } else if constexpr (std::is_same_v<To, double>) {
        return scalar_traits<From>::to_double(v);
    } else {
        return To(v);
    }
}

}  // namespace sojourn
