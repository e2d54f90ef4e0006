#pragma once

#include <cstdint>
#include <string>

namespace wgflow {

/// Exact rational p/q in lowest terms, q > 0. Used for step sizes and final
/// times so that grid constraints such as N tau = T are checked exactly.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    /// Accepts "p", "p/q", and decimal components such as "0.5/1024" or "0.015625".
    /// Throws ConfigError on malformed input or a zero denominator.
    static Rational parse(const std::string& text);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_integer() const noexcept { return den_ == 1; }
    /// "p/q", or "p" when q = 1.
    std::string to_string() const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    friend bool operator==(const Rational&, const Rational&) = default;
    friend bool operator<(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// True when total / step is a positive integer.
bool divides_evenly(const Rational& step, const Rational& total);

}  // namespace wgflow
