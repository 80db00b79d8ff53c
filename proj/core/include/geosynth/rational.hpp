#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace geosynth {

/// Exact rational number with a positive, reduced denominator.
///
/// DSL parameters (lengths and degrees) are stored this way so that
/// grid arithmetic such as 15-degree steps never accumulates rounding.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t numerator, std::int64_t denominator = 1);

    /// Accepts `-?digits`, `-?digits.digits` and `-?digits/digits`.
    static std::optional<Rational> parse(std::string_view text);

    std::int64_t numerator() const { return num_; }
    std::int64_t denominator() const { return den_; }

    bool is_integer() const { return den_ == 1; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// Canonical text: integers bare, terminating fractions as decimals,
    /// everything else as `p/q`.
    std::string to_string() const;

    Rational operator-() const { return Rational(-num_, den_); }
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);

    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace geosynth
