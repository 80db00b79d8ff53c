#include "geosynth/rational.hpp"

#include <cctype>
#include <numeric>
#include <stdexcept>

namespace geosynth {

namespace {

    constexpr std::size_t kMaxDigits = 15;

    std::optional<std::int64_t> parse_digits(std::string_view s)
    {
        if (s.empty() || s.size() > kMaxDigits) {
            return std::nullopt;
        }
        std::int64_t value = 0;
        for (char c : s) {
            if (!std::isdigit(static_cast<unsigned char>(c))) {
                return std::nullopt;
            }
            value = value * 10 + (c - '0');
        }
        return value;
    }

    bool terminates(std::int64_t den)
    {
        while (den % 2 == 0) {
            den /= 2;
        }
        while (den % 5 == 0) {
            den /= 5;
        }
        return den == 1;
    }

} // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator)
{
    if (denominator == 0) {
        throw std::invalid_argument("Rational: zero denominator");
    }
    if (denominator < 0) {
        numerator = -numerator;
        denominator = -denominator;
    }
    const std::int64_t g = std::gcd(numerator, denominator);
    num_ = g == 0 ? 0 : numerator / g;
    den_ = g == 0 ? 1 : denominator / g;
}

std::optional<Rational> Rational::parse(std::string_view text)
{
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    std::optional<Rational> result;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        auto num = parse_digits(text.substr(0, slash));
        auto den = parse_digits(text.substr(slash + 1));
        if (!num || !den || *den == 0) {
            return std::nullopt;
        }
        result = Rational(*num, *den);
    } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
        auto whole = parse_digits(text.substr(0, dot));
        auto frac_text = text.substr(dot + 1);
        auto frac = parse_digits(frac_text);
        if (!whole || !frac || dot + frac_text.size() > kMaxDigits) {
            return std::nullopt;
        }
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < frac_text.size(); ++i) {
            scale *= 10;
        }
        result = Rational(*whole * scale + *frac, scale);
    } else {
        auto whole = parse_digits(text);
        if (!whole) {
            return std::nullopt;
        }
        result = Rational(*whole);
    }
    return negative ? -*result : *result;
}

std::string Rational::to_string() const
{
    if (den_ == 1) {
        return std::to_string(num_);
    }
    if (!terminates(den_)) {
        return std::to_string(num_) + "/" + std::to_string(den_);
    }
    std::string out = num_ < 0 ? "-" : "";
    std::int64_t n = num_ < 0 ? -num_ : num_;
    out += std::to_string(n / den_);
    out += '.';
    std::int64_t rem = n % den_;
    while (rem != 0) {
        rem *= 10;
        out += static_cast<char>('0' + rem / den_);
        rem %= den_;
    }
    return out;
}

Rational operator+(const Rational& a, const Rational& b)
{
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b)
{
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
}

Rational operator/(const Rational& a, const Rational& b)
{
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b)
{
    return a.num_ * b.den_ <=> b.num_ * a.den_;
}

} // namespace geosynth
